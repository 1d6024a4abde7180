"""Benchmark the compiled action-search kernel against the Python twin.

Runs the same exhaustive permutation searches through both kernels,
checks that they return identical tables, and reports wall times plus
the speedup.  Usage:

    python3 benchmarks/oracle_benchmark.py [--max-index K] [--repeat R]
"""
from __future__ import annotations

import argparse
import time

from surfsep import _oracle_py
from surfsep.alphabet import SurfaceBasis, boundary_word, parse_word
from surfsep.verify import _encode_words

try:
    from surfsep import _core
except ImportError:
    _core = None


def _workloads(max_index: int):
    """(name, n_letters, h_words, excluded, cycle_words) tuples."""
    out = []
    b11 = SurfaceBasis(1, 1)
    out.append(
        (
            "g1b1 <a1> excl b1",
            b11.letter_count,
            _encode_words(b11, [parse_word(b11, "a1")]),
            _encode_words(b11, [parse_word(b11, "b1")]),
            _encode_words(b11, [boundary_word(b11, 1)]),
        )
    )
    b03 = SurfaceBasis(0, 3)
    out.append(
        (
            "g0b3 <x1 x2'> ",
            b03.letter_count,
            _encode_words(b03, [parse_word(b03, "x1 x2'")]),
            [],
            _encode_words(b03, [boundary_word(b03, i) for i in (1, 2, 3)]),
        )
    )
    b12 = SurfaceBasis(1, 2)
    out.append(
        (
            "g1b2 <a1 x1> excl b1",
            b12.letter_count,
            _encode_words(b12, [parse_word(b12, "a1 x1")]),
            _encode_words(b12, [parse_word(b12, "b1")]),
            _encode_words(b12, [boundary_word(b12, i) for i in (1, 2)]),
        )
    )
    # Exhaustive case: the least separating degree is 11, so every
    # degree up to the cap is searched to completion before giving up.
    out.append(
        (
            "g1b1 <a1^11> excl a1",
            b11.letter_count,
            _encode_words(b11, [parse_word(b11, " ".join(["a1"] * 11))]),
            _encode_words(b11, [parse_word(b11, "a1")]),
            _encode_words(b11, [boundary_word(b11, 1)]),
        )
    )
    return [(name, n, h, ex, cyc, max_index) for (name, n, h, ex, cyc) in out]


def _run(kernel, n_letters, h_words, ex_words, cycle_words, max_index):
    for degree in range(1, max_index + 1):
        found = kernel.search_action(n_letters, degree, h_words, ex_words, cycle_words)
        if found is not None:
            return degree, found
    return None, None


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--max-index", type=int, default=8)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if _core is None:
        print("compiled kernel unavailable; benchmarking the Python kernel only")
    header = f"{'workload':<24}{'python':>10}{'compiled':>10}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, n_letters, h, ex, cyc, cap in _workloads(args.max_index):
        t0 = time.perf_counter()
        for _ in range(args.repeat):
            deg_py, found_py = _run(_oracle_py, n_letters, h, ex, cyc, cap)
        t_py = (time.perf_counter() - t0) / args.repeat
        if _core is None:
            print(f"{name:<24}{t_py:>9.4f}s{'-':>10}{'-':>9}")
            continue
        t0 = time.perf_counter()
        for _ in range(args.repeat):
            deg_c, found_c = _run(_core, n_letters, h, ex, cyc, cap)
        t_c = (time.perf_counter() - t0) / args.repeat
        if (deg_py, found_py) != (deg_c, found_c):
            raise SystemExit(f"kernel mismatch on {name!r}: {deg_py} vs {deg_c}")
        ratio = t_py / t_c if t_c > 0 else float("inf")
        print(f"{name:<24}{t_py:>9.4f}s{t_c:>9.4f}s{ratio:>8.1f}x")
    print("results identical across kernels")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end for the cover-construction pipeline.

Subcommands: fold, separate, wrap, verify, oracle, export-dot.  Exit
codes: 0 on success, 1 when a precondition or domain check fails
(the stderr line names the failed condition), 2 on malformed arguments
or unparseable input.  Outputs are canonical: the same inputs always
produce byte-identical files, and stdout stays silent when --json is
given so machine consumers only see the file.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import List, Optional

from .alphabet import SurfaceBasis, Word, WordParseError, parse_word
from .extend import (
    NotSeparableHere,
    PeripheralSubgroup,
    SeparabilityCertificate,
    separate,
)
from .stallings import (
    DisconnectedGraphError,
    InternalInvariantError,
    LabeledGraph,
    NotFoldedError,
    XiLoopPresent,
    canonicalize,
    fold,
    graph_from_json_dict,
    graph_to_dot,
    graph_to_json_dict,
    wedge_from_words,
)
from .wrap import (
    NTooSmall,
    PeripheralContent,
    WrapCertificate,
    WrapSpec,
    adjust_wrapping,
)
from . import verify as verify_mod

_DOMAIN_ERRORS = (
    PeripheralSubgroup,
    NotSeparableHere,
    XiLoopPresent,
    NTooSmall,
    PeripheralContent,
    DisconnectedGraphError,
    NotFoldedError,
    InternalInvariantError,
    verify_mod.NotRegular,
    verify_mod.NotConnected,
    OSError,
)


class _UsageError(ValueError):
    """Bad input that should map to exit code 2."""


def _read_words(basis: SurfaceBasis, path: str) -> List[Word]:
    """Words from a list file: one per line, '#' lines are comments."""
    words = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if text.startswith("#"):
                continue
            try:
                words.append(parse_word(basis, text))
            except WordParseError as exc:
                raise _UsageError(f"{path}:{lineno}: {exc}") from exc
    return words


def _load_json(path: str) -> dict:
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise _UsageError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise _UsageError(f"{path}: expected a JSON object")
    return data


def _write_json(path: str, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _note(args, text: str) -> None:
    """Progress line: stdout normally, stderr when --json claims stdout."""
    stream = sys.stderr if getattr(args, "json", None) else sys.stdout
    print(text, file=stream)


def _basis_from_args(args) -> SurfaceBasis:
    if args.genus is None or args.boundary is None:
        raise _UsageError("this command needs --genus and --boundary")
    try:
        return SurfaceBasis(args.genus, args.boundary)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def cmd_fold(args) -> int:
    basis = _basis_from_args(args)
    loops = _read_words(basis, args.loops) if args.loops else []
    rays = _read_words(basis, args.rays) if args.rays else []
    if not loops and not rays:
        raise _UsageError("fold needs --loops or --rays")
    wedge = wedge_from_words(basis, loops=loops, rays=rays)
    folded, _ = fold(wedge)
    out = canonicalize(folded)
    if args.json:
        _write_json(args.json, graph_to_json_dict(out))
    if args.dot:
        _write_text(args.dot, graph_to_dot(out))
    _note(args, f"vertices={out.vertex_count} edges={len(out.edges)}")
    return 0


def cmd_separate(args) -> int:
    basis = _basis_from_args(args)
    if not args.subgroup:
        raise _UsageError("separate needs --subgroup")
    gens = _read_words(basis, args.subgroup)
    excluded = _read_words(basis, args.exclude) if args.exclude else []
    cert = separate(basis, gens, excluded)
    if args.json:
        _write_json(args.json, cert.to_json_dict())
    if args.dot:
        _write_text(args.dot, graph_to_dot(cert.graph))
    _note(args, f"index={cert.index}")
    return 0


def cmd_wrap(args) -> int:
    if not args.spec:
        raise _UsageError("wrap needs --spec FILE")
    try:
        spec = WrapSpec.from_json_dict(_load_json(args.spec))
        if args.d is not None:
            spec = replace(spec, d=args.d)
        if args.n is not None:
            spec = replace(spec, n=args.n)
    except _DOMAIN_ERRORS:
        raise
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    cert = adjust_wrapping(spec)
    if args.json:
        _write_json(args.json, cert.to_json_dict())
    if args.dot:
        _write_text(args.dot, graph_to_dot(cert.graph))
    _note(args, f"index={cert.index} N={cert.N}")
    return 0


def _check_certificate_file(path: str):
    data = _load_json(path)
    try:
        if "N" in data:
            cert = WrapCertificate.from_json_dict(data)
            return verify_mod.check_wrap(cert)
        cert = SeparabilityCertificate.from_json_dict(data)
        return verify_mod.check_separability(cert)
    except ValueError as exc:
        raise _UsageError(f"{path}: {exc}") from exc


def cmd_verify(args) -> int:
    if args.jobs > 1 and len(args.certificates) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_check_certificate_file, args.certificates))
    else:
        reports = [_check_certificate_file(path) for path in args.certificates]
    merged = {
        "claims": [
            dict(claim, certificate=path)
            for path, report in zip(args.certificates, reports)
            for claim in report.to_json_dict()["claims"]
        ],
        "pass": all(report.passed for report in reports),
    }
    if args.json:
        _write_json(args.json, merged)
    for path, report in zip(args.certificates, reports):
        verdict = "pass" if report.passed else f"FAIL ({report.first_failure()})"
        _note(args, f"{path}: {verdict}")
    return 0 if merged["pass"] else 1


def cmd_oracle(args) -> int:
    basis = _basis_from_args(args)
    if not args.subgroup:
        raise _UsageError("oracle needs --subgroup")
    gens = _read_words(basis, args.subgroup)
    excluded = _read_words(basis, args.exclude) if args.exclude else []
    cert = verify_mod.brute_force_separate(
        basis, gens, excluded, max_index=args.max_index, boundary_cycles=True
    )
    payload = {
        "found": cert is not None,
        "max_index": args.max_index,
        "kernel": verify_mod.kernel_name(),
        "certificate": cert.to_json_dict() if cert is not None else None,
    }
    if args.json:
        _write_json(args.json, payload)
    _note(args, f"degree={cert.index}" if cert is not None else "none")
    return 0


def cmd_export_dot(args) -> int:
    data = _load_json(args.input)
    graph_data = data.get("graph", data)
    try:
        graph = graph_from_json_dict(graph_data)
    except ValueError as exc:
        raise _UsageError(f"{args.input}: {exc}") from exc
    _write_text(args.dot, graph_to_dot(graph))
    _note(args, f"vertices={graph.vertex_count} edges={len(graph.edges)}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surfsep",
        description="Finite-cover certificates for surface groups with boundary.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, basis=True):
        if basis:
            p.add_argument("--genus", type=int, default=None)
            p.add_argument("--boundary", type=int, default=None)
        p.add_argument("--json", metavar="PATH", default=None)
        p.add_argument("--dot", metavar="PATH", default=None)
        p.add_argument("--seed", type=int, default=0, help="reserved for test-instance generation")
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("fold", help="fold a wedge of loops and rays")
    common(p)
    p.add_argument("--loops", metavar="FILE", default=None)
    p.add_argument("--rays", metavar="FILE", default=None)
    p.set_defaults(func=cmd_fold)

    p = sub.add_parser("separate", help="build a separability certificate")
    common(p)
    p.add_argument("--subgroup", metavar="FILE", default=None)
    p.add_argument("--exclude", metavar="FILE", default=None)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("wrap", help="build an index-controlled wrapping certificate")
    common(p, basis=False)
    p.add_argument("--spec", metavar="FILE", default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_wrap)

    p = sub.add_parser("verify", help="re-check certificate files")
    common(p, basis=False)
    p.add_argument("certificates", nargs="+", metavar="CERT")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="exhaustive low-index search")
    common(p)
    p.add_argument("--subgroup", metavar="FILE", default=None)
    p.add_argument("--exclude", metavar="FILE", default=None)
    p.add_argument("--max-index", type=int, default=8)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("export-dot", help="convert graph or certificate JSON to DOT")
    common(p, basis=False)
    p.add_argument("input", metavar="INPUT")
    p.set_defaults(func=cmd_export_dot)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "export-dot" and not args.dot:
        print("error: export-dot needs --dot PATH", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DOMAIN_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Pure-Python action-search kernel.

Twin of the compiled core with identical semantics: depth-first search
over base-pointed transitive actions of a free group on a fixed number
of points, with first-occurrence vertex numbering to break relabeling
symmetry.  Constraint words prune partial tables as soon as they trace
completely.
"""
from __future__ import annotations

from typing import List, Optional, Sequence


def _trace(word: Sequence[int], fwd, bwd, start: int) -> int:
    """End vertex of the word read from start, or -1 when incomplete."""
    v = start
    for s in word:
        v = fwd[s - 1][v] if s > 0 else bwd[-s - 1][v]
        if v < 0:
            return -1
    return v


def _partial_ok(h_words, excluded_words, fwd, bwd) -> bool:
    for w in h_words:
        end = _trace(w, fwd, bwd, 0)
        if end >= 0 and end != 0:
            return False
    for w in excluded_words:
        end = _trace(w, fwd, bwd, 0)
        if end == 0:
            return False
    return True


def _single_cycle(word, fwd, bwd, degree: int) -> bool:
    length = 0
    v = 0
    while True:
        v = _trace(word, fwd, bwd, v)
        length += 1
        if v == 0:
            return length == degree
        if length > degree:
            return False


def search_action(
    n_letters: int,
    degree: int,
    h_words: Sequence[Sequence[int]],
    excluded_words: Sequence[Sequence[int]],
    cycle_words: Sequence[Sequence[int]] = (),
) -> Optional[List[List[int]]]:
    """Complete permutation tables satisfying the constraints, or None.

    Words are sequences of signed letter numbers (letter id + 1, negated
    for inverses).  Every word in h_words must fix point 0, no word in
    excluded_words may fix it, and every word in cycle_words must act as
    a single cycle on all the points.
    """
    if n_letters <= 0 or degree <= 0:
        return None
    fwd = [[-1] * degree for _ in range(n_letters)]
    bwd = [[-1] * degree for _ in range(n_letters)]
    used = [1]

    def dfs() -> bool:
        slot_l = slot_v = -1
        for v in range(used[0]):
            for lid in range(n_letters):
                if fwd[lid][v] < 0:
                    slot_l, slot_v = lid, v
                    break
            if slot_l >= 0:
                break
        if slot_l < 0:
            if used[0] != degree:
                return False
            for w in h_words:
                if _trace(w, fwd, bwd, 0) != 0:
                    return False
            for w in excluded_words:
                if _trace(w, fwd, bwd, 0) == 0:
                    return False
            return all(_single_cycle(w, fwd, bwd, degree) for w in cycle_words)
        top = used[0] + 1 if used[0] < degree else used[0]
        for u in range(top):
            if u < used[0] and bwd[slot_l][u] >= 0:
                continue
            grew = u == used[0]
            fwd[slot_l][slot_v] = u
            bwd[slot_l][u] = slot_v
            if grew:
                used[0] += 1
            if _partial_ok(h_words, excluded_words, fwd, bwd) and dfs():
                return True
            if grew:
                used[0] -= 1
            fwd[slot_l][slot_v] = -1
            bwd[slot_l][u] = -1
        return False

    if not _partial_ok(h_words, excluded_words, fwd, bwd):
        return None
    if dfs():
        return [list(row) for row in fwd]
    return None

"""Independent verification of finite-cover certificates.

Nothing here trusts the construction pipeline: a certificate is checked
from its graph alone by converting it to a permutation representation
and re-reading every claimed property (cover degree, subgroup loops,
excluded words staying outside, boundary words acting as single cycles).
A brute-force search over transitive actions doubles as an oracle for
tiny instances; its hot loop has a compiled core with a pure-Python
twin selected at import time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from .alphabet import (
    Letter,
    SurfaceBasis,
    Word,
    boundary_word,
    format_word,
    free_reduce,
)
from .stallings import LabeledGraph, has_xi_loop

try:
    from . import _core as _kernel

    _KERNEL_NAME = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from . import _oracle_py as _kernel

    _KERNEL_NAME = "python"


def kernel_name() -> str:
    """Name of the active action-search kernel: "compiled" or "python"."""
    return _KERNEL_NAME


class NotRegular(ValueError):
    """Some letter does not act as a permutation of the vertices."""


class NotConnected(ValueError):
    """The graph is not connected, so it is not a cover."""


@dataclass(frozen=True)
class PermutationRep:
    """Action of the basis letters on the vertices of a regular graph."""

    basis: SurfaceBasis
    degree: int
    tables: Tuple[Tuple[int, ...], ...]
    inverse_tables: Tuple[Tuple[int, ...], ...]

    def act(self, letter: Letter, v: int) -> int:
        lid = self.basis.letter_id(letter.positive)
        if letter.sign > 0:
            return self.tables[lid][v]
        return self.inverse_tables[lid][v]

    def act_word(self, w: Word, v: int) -> int:
        for letter in w:
            v = self.act(letter, v)
        return v

    def word_permutation(self, w: Word) -> Tuple[int, ...]:
        return tuple(self.act_word(w, v) for v in range(self.degree))


def to_permutation_rep(g: LabeledGraph) -> PermutationRep:
    """Read off the letter permutations, or explain why there are none."""
    basis = g.basis
    m = g.vertex_count
    tables: List[Tuple[int, ...]] = []
    inverses: List[Tuple[int, ...]] = []
    for lid in range(basis.letter_count):
        letter = basis.letter_from_id(lid)
        row: List[int] = []
        back = [-1] * m
        for v in range(m):
            img = g.hat_out(v, lid + 1)
            if img is None:
                raise NotRegular(f"vertex {v} has no outgoing {letter} edge")
            row.append(img)
            back[img] = v
        if -1 in back:
            raise NotRegular(f"letter {letter} is not onto: vertex {back.index(-1)}")
        tables.append(tuple(row))
        inverses.append(tuple(back))
    seen = {g.base}
    frontier = [g.base]
    while frontier:
        v = frontier.pop()
        for lid in range(basis.letter_count):
            for u in (tables[lid][v], inverses[lid][v]):
                if u not in seen:
                    seen.add(u)
                    frontier.append(u)
    if len(seen) != m:
        raise NotConnected(f"only {len(seen)} of {m} vertices reachable from base")
    return PermutationRep(basis, m, tuple(tables), tuple(inverses))


def index_of(rep: PermutationRep) -> int:
    """Degree of the representation, the index of the covered subgroup."""
    return rep.degree


def word_cycle_structure(rep: PermutationRep, w: Word) -> Tuple[int, ...]:
    """Sorted cycle lengths of the permutation induced by a word."""
    perm = rep.word_permutation(w)
    seen = [False] * rep.degree
    lengths: List[int] = []
    for v in range(rep.degree):
        if seen[v]:
            continue
        length = 0
        at = v
        while not seen[at]:
            seen[at] = True
            at = perm[at]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths))


@dataclass(frozen=True)
class CheckReport:
    """Outcome of re-checking a certificate, one entry per property."""

    checks: Tuple[Tuple[str, bool, str], ...]

    @property
    def passed(self) -> bool:
        return all(ok for (_, ok, _) in self.checks)

    def first_failure(self) -> Optional[str]:
        for (name, ok, detail) in self.checks:
            if not ok:
                return f"{name}: {detail}" if detail else name
        return None

    def to_json_dict(self) -> dict:
        return {
            "claims": [
                {"name": name, "pass": ok, "witness": detail}
                for (name, ok, detail) in self.checks
            ],
            "pass": self.passed,
        }


def _rep_checks(basis: SurfaceBasis, g: LabeledGraph, checks: list):
    if g.basis != basis:
        checks.append(("basis", False, "graph basis differs from certificate basis"))
        return None
    checks.append(("basis", True, f"genus {basis.genus}, boundary {basis.boundary}"))
    if not g.is_folded:
        checks.append(("folded", False, "two equal-label edges share an endpoint"))
        return None
    checks.append(("folded", True, f"{len(g.edges)} edges"))
    try:
        rep = to_permutation_rep(g)
    except (NotRegular, NotConnected) as exc:
        checks.append(("regular-cover", False, str(exc)))
        return None
    checks.append(("regular-cover", True, f"degree {rep.degree}"))
    m = g.vertex_count
    expected_edges = m * basis.letter_count
    checks.append(
        (
            "euler-count",
            len(g.edges) == expected_edges,
            f"{len(g.edges)} edges, expected {expected_edges}",
        )
    )
    return rep


def _boundary_checks(rep: PermutationRep, checks: list) -> None:
    basis = rep.basis
    m = rep.degree
    for i in range(1, basis.boundary + 1):
        structure = word_cycle_structure(rep, boundary_word(basis, i))
        checks.append(
            (
                f"boundary-x{i}",
                structure == (m,),
                f"cycle structure {structure}",
            )
        )


def _membership_checks(
    rep: PermutationRep,
    base: int,
    subgroup: Sequence[Word],
    excluded: Sequence[Word],
    checks: list,
) -> None:
    bad = [w for w in subgroup if rep.act_word(w, base) != base]
    checks.append(
        (
            "subgroup-loops",
            not bad,
            "; ".join(format_word(w) for w in bad) if bad else f"{len(subgroup)} generators",
        )
    )
    inside = [w for w in excluded if rep.act_word(free_reduce(w), base) == base]
    checks.append(
        (
            "excluded-outside",
            not inside,
            "; ".join(format_word(w) for w in inside) if inside else f"{len(excluded)} words",
        )
    )


def check_separability(cert) -> CheckReport:
    """Re-verify a separability certificate from its graph alone."""
    checks: List[Tuple[str, bool, str]] = []
    g = cert.graph
    rep = _rep_checks(cert.basis, g, checks)
    if rep is None:
        return CheckReport(tuple(checks))
    checks.append(
        (
            "index",
            cert.index == g.vertex_count,
            f"claimed {cert.index}, graph has {g.vertex_count}",
        )
    )
    _boundary_checks(rep, checks)
    _membership_checks(rep, g.base, cert.subgroup_generators, cert.excluded, checks)
    return CheckReport(tuple(checks))


def check_wrap(cert) -> CheckReport:
    """Re-verify a wrapping certificate from its graph alone."""
    checks: List[Tuple[str, bool, str]] = []
    g = cert.graph
    spec = cert.spec
    rep = _rep_checks(cert.basis, g, checks)
    if rep is None:
        return CheckReport(tuple(checks))
    expected = spec.d * cert.N + 1
    checks.append(
        (
            "index-formula",
            cert.index == g.vertex_count == expected,
            f"claimed {cert.index}, graph {g.vertex_count}, d*N+1 = {expected}",
        )
    )
    checks.append(
        (
            "wrapping-exceeds-request",
            cert.N > spec.n,
            f"N = {cert.N}, request {spec.n}",
        )
    )
    bad = [
        w for w in cert.z_words if rep.act_word(free_reduce(w), g.base) != g.base
    ]
    checks.append(
        (
            "wrapped-boundary-loops",
            not bad,
            "; ".join(format_word(w) for w in bad)
            if bad
            else f"{len(cert.z_words)} words",
        )
    )
    _boundary_checks(rep, checks)
    _membership_checks(rep, g.base, spec.subgroup_words, spec.excluded, checks)
    return CheckReport(tuple(checks))


def _embeds(sub: LabeledGraph, ext: LabeledGraph) -> bool:
    """Whether sub embeds in ext as a based labeled subgraph.

    Both graphs must be folded, so a base-fixing label-preserving map is
    forced edge by edge; the embedding exists iff the forced map is
    total and injective.
    """
    if sub.basis != ext.basis or not sub.is_folded or not ext.is_folded:
        return False
    image = {sub.base: ext.base}
    pending = list(sub.edges)
    while pending:
        progress = False
        remaining = []
        for (u, lid, v) in pending:
            if u in image:
                target = ext.hat_out(image[u], lid + 1)
            elif v in image:
                target = ext.hat_out(image[v], -(lid + 1))
                u, v = v, u
            else:
                remaining.append((u, lid, v))
                continue
            if target is None:
                return False
            if v in image and image[v] != target:
                return False
            image[v] = target
            progress = True
        pending = remaining
        if pending and not progress:
            return False
    if len(image) != sub.vertex_count:
        return False
    return len(set(image.values())) == len(image)


def is_good_extension(sub: LabeledGraph, ext: LabeledGraph) -> bool:
    """Folded extension embedding sub with no boundary-power loops."""
    if not _embeds(sub, ext):
        return False
    return all(
        has_xi_loop(ext, i, ext.vertex_count) is None
        for i in range(1, ext.basis.boundary + 1)
    )


def is_perfect_extension(sub: LabeledGraph, ext: LabeledGraph) -> bool:
    """Regular extension embedding sub whose boundary words are single cycles."""
    if not _embeds(sub, ext):
        return False
    try:
        rep = to_permutation_rep(ext)
    except (NotRegular, NotConnected):
        return False
    m = ext.vertex_count
    return all(
        word_cycle_structure(rep, boundary_word(ext.basis, i)) == (m,)
        for i in range(1, ext.basis.boundary + 1)
    )


def _encode_words(basis: SurfaceBasis, words: Sequence[Word]) -> List[List[int]]:
    return [[basis.encode_letter(l) for l in free_reduce(w)] for w in words]


def brute_force_separate(
    basis: SurfaceBasis,
    subgroup_generators: Sequence[Word],
    excluded: Sequence[Word] = (),
    max_index: int = 8,
    boundary_cycles: bool = False,
):
    """Least-degree certificate from exhaustive action search, or None.

    Searches base-pointed transitive actions of increasing degree in
    which every generator fixes the base point and no excluded word
    does; with boundary_cycles the boundary words must additionally act
    as single cycles.  Independent of the constructive pipeline, so it
    doubles as ground truth on tiny instances.
    """
    for w in excluded:
        if len(free_reduce(w)) == 0:
            return None
    h_words = _encode_words(basis, subgroup_generators)
    ex_words = _encode_words(basis, excluded)
    cycle_words = (
        _encode_words(basis, [boundary_word(basis, i) for i in range(1, basis.boundary + 1)])
        if boundary_cycles
        else []
    )
    for degree in range(1, max_index + 1):
        found = _kernel.search_action(
            basis.letter_count, degree, h_words, ex_words, cycle_words
        )
        if found is not None:
            edges = frozenset(
                (v, lid, found[lid][v])
                for lid in range(basis.letter_count)
                for v in range(degree)
            )
            graph = LabeledGraph(basis, degree, edges, base=0)
            from .extend import SeparabilityCertificate

            return SeparabilityCertificate(
                basis=basis,
                subgroup_generators=tuple(free_reduce(w) for w in subgroup_generators),
                excluded=tuple(free_reduce(w) for w in excluded),
                graph=graph,
                index=degree,
                stage_log=(("oracle", f"degree {degree}"),),
            )
    return None

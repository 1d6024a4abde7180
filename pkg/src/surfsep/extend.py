"""Completion of folded subgroup graphs to finite covers.

Starting from a folded graph with no boundary-power loops, the engine
adds vertices and edges (never merging or renumbering old ones) until
every letter acts as a permutation of the vertices and every boundary
class reads a single cycle through all of them.  The original graph
stays embedded, so subgroup membership is preserved and excluded words
stay outside.

The elimination order: genus letters first (edge joins where legal, a
bridge vertex otherwise, a chain gadget when every gap of a letter is
carried by a one-vertex path, and a single closing vertex once each
remaining letter has exactly one blocked gap pair); then the boundary
letters x_j, by legal joins plus on-demand gadgets, finishing with a
copy-and-close phase that turns the residual path permutation into a
single cycle.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import lcm
from typing import Dict, List, Optional, Sequence, Tuple

from .alphabet import (
    Letter,
    SurfaceBasis,
    Word,
    format_word,
    free_reduce,
    parse_word,
)
from .stallings import (
    InternalInvariantError,
    LabeledGraph,
    XiPath,
    all_maximal_paths,
    boundary_cycle,
    fold,
    graph_from_json_dict,
    graph_to_json_dict,
    has_xi_loop,
    maximal_xi_paths,
    member,
    wedge_from_words,
)


class PeripheralSubgroup(ValueError):
    """The subgroup contains a conjugate of a boundary power."""

    def __init__(self, i: int, vertex: int, power: int):
        super().__init__(
            f"subgroup traps boundary class {i}: x_{i}^{power} loop at vertex {vertex}"
        )
        self.i = i
        self.vertex = vertex
        self.power = power


class NotSeparableHere(ValueError):
    """An excluded word already lies in the subgroup."""

    def __init__(self, word: Word):
        super().__init__(f"excluded word is a member: {format_word(word)!r}")
        self.word = word


@dataclass(frozen=True)
class PathType:
    """Shape of a maximal boundary path by its two missing labels."""

    kind: str  # "type_i" | "type_ii" | "mixed" | "plain"
    label: Optional[Letter] = None
    terminal_label: Optional[Letter] = None

    @staticmethod
    def type_i(label: Letter) -> "PathType":
        return PathType("type_i", label)

    @staticmethod
    def type_ii(label: Letter) -> "PathType":
        return PathType("type_ii", label)

    @staticmethod
    def mixed(initial_label: Letter, terminal_label: Letter) -> "PathType":
        return PathType("mixed", initial_label, terminal_label)

    @staticmethod
    def plain() -> "PathType":
        return PathType("plain")


def classify_xb_path(p: XiPath) -> PathType:
    """Classify a maximal path of the long boundary class by its gaps."""
    if not p.maximal:
        raise ValueError("path is not maximal")
    init, term = p.initial_missing, p.terminal_missing
    if init == term:
        return PathType.type_ii(init)
    if term == init.inverse() and p.initial_vertex == p.terminal_vertex:
        return PathType.type_i(init)
    if init.kind == "x" and term.kind == "x" and init.sign > 0 and term.sign > 0:
        return PathType.mixed(init, term)
    return PathType.plain()


@dataclass(frozen=True)
class SeparabilityCertificate:
    """A finite cover separating a subgroup from excluded words."""

    basis: SurfaceBasis
    subgroup_generators: Tuple[Word, ...]
    excluded: Tuple[Word, ...]
    graph: LabeledGraph
    index: int
    stage_log: Tuple[Tuple[str, str], ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "genus": self.basis.genus,
            "boundary": self.basis.boundary,
            "subgroup": [format_word(w) for w in self.subgroup_generators],
            "excluded": [format_word(w) for w in self.excluded],
            "index": self.index,
            "stages": [list(stage) for stage in self.stage_log],
            "graph": graph_to_json_dict(self.graph),
        }

    @staticmethod
    def from_json_dict(data: dict) -> "SeparabilityCertificate":
        try:
            basis = SurfaceBasis(int(data["genus"]), int(data["boundary"]))
            graph = graph_from_json_dict(data["graph"])
            subgroup = tuple(parse_word(basis, w) for w in data["subgroup"])
            excluded = tuple(parse_word(basis, w) for w in data["excluded"])
            index = int(data["index"])
            stages = tuple((str(n), str(p)) for (n, p) in data.get("stages", []))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed certificate object: {exc}") from exc
        return SeparabilityCertificate(basis, subgroup, excluded, graph, index, stages)


def _lstar_letters(basis: SurfaceBasis) -> Tuple[Letter, ...]:
    """Genus letters a1, b1, ..., ag, bg in elimination order."""
    out = []
    for i in range(1, basis.genus + 1):
        out.append(Letter("a", i))
        out.append(Letter("b", i))
    return tuple(out)


def _partner(letter: Letter) -> Letter:
    if letter.kind not in ("a", "b"):
        raise ValueError(f"letter has no partner: {letter}")
    return Letter("b" if letter.kind == "a" else "a", letter.index)


def _add_hat_edge(g: LabeledGraph, u: int, signed: int, v: int) -> LabeledGraph:
    lid = abs(signed) - 1
    edge = (u, lid, v) if signed > 0 else (v, lid, u)
    return LabeledGraph(g.basis, g.vertex_count, g.edges | {edge}, g.base)


def _with_new_vertices(g: LabeledGraph, extra: int, new_edges) -> LabeledGraph:
    out = LabeledGraph(g.basis, g.vertex_count + extra, g.edges, g.base)
    for (u, signed, v) in new_edges:
        out = _add_hat_edge(out, u, signed, v)
    return out


class _PathIndex:
    """Lookup of maximal paths by their start and end slots, per class."""

    def __init__(self, g: LabeledGraph):
        self.basis = g.basis
        self.by_class = all_maximal_paths(g)
        self.starts: Dict[int, Dict[Tuple[int, int], XiPath]] = {}
        self.ends: Dict[int, Dict[Tuple[int, int], XiPath]] = {}
        self.period: Dict[int, int] = {}
        for i, paths in self.by_class.items():
            period = len(boundary_cycle(g.basis, i))
            self.period[i] = period
            starts: Dict[Tuple[int, int], XiPath] = {}
            ends: Dict[Tuple[int, int], XiPath] = {}
            for p in paths:
                starts[(p.initial_vertex, p.phase)] = p
                ends[(p.terminal_vertex, p.terminal_phase(period))] = p
            self.starts[i] = starts
            self.ends[i] = ends

    def end_at(self, i: int, vertex: int, phase: int) -> XiPath:
        p = self.ends[i].get((vertex, phase))
        if p is None:
            raise InternalInvariantError(
                f"no class-{i} path ends at vertex {vertex} phase {phase}"
            )
        return p

    def start_at(self, i: int, vertex: int, phase: int) -> XiPath:
        p = self.starts[i].get((vertex, phase))
        if p is None:
            raise InternalInvariantError(
                f"no class-{i} path starts at vertex {vertex} phase {phase}"
            )
        return p

    def joins_for_edge(self, u: int, signed: int, v: int):
        """Path joins a new hat-edge (u, signed, v) would perform.

        Covers both hat directions of the geometric edge; each join is
        (class, path-ending-at-u, path-starting-at-v) for a phase reading
        the signed label, likewise reversed for the inverse label.
        """
        joins = []
        for i in sorted(self.by_class):
            cycle = boundary_cycle(self.basis, i)
            period = self.period[i]
            for t in range(period):
                if cycle[t] == signed:
                    joins.append(
                        (i, self.end_at(i, u, t), self.start_at(i, v, (t + 1) % period))
                    )
                elif cycle[t] == -signed:
                    joins.append(
                        (i, self.end_at(i, v, t), self.start_at(i, u, (t + 1) % period))
                    )
        return joins


def _join_conflict(joins) -> Optional[str]:
    """Why the joins would close a boundary loop, or None when legal."""
    for (i, end, start) in joins:
        if end == start:
            return f"class-{i} path would close onto itself"
    for (i1, e1, s1), (i2, e2, s2) in combinations(joins, 2):
        if i1 == i2 and s1 == e2 and s2 == e1:
            return f"two class-{i1} paths would close into a loop"
    return None


def _require_open_slots(g: LabeledGraph, v: int, signed: int, v_prime: int) -> None:
    letter = g.basis.decode_letter(signed)
    if g.hat_out(v, signed) is not None:
        raise ValueError(f"vertex {v} already has an outgoing {letter} edge")
    if g.hat_out(v_prime, -signed) is not None:
        raise ValueError(f"vertex {v_prime} already has an incoming {letter} edge")


def operation2(g: LabeledGraph, v: int, v_prime: int, x: Letter) -> LabeledGraph:
    """Add a single x-edge from v to v_prime when no boundary loop results.

    Requires the outgoing-x slot at v and incoming-x slot at v_prime to be
    open; rejects the edge when a maximal path would close onto itself or
    two paths would close into a loop.
    """
    b = g.basis.boundary
    s = g.basis.encode_letter(x)
    _require_open_slots(g, v, s, v_prime)
    index = _PathIndex(g)
    joins = index.joins_for_edge(v, s, v_prime)
    conflict = _join_conflict(joins)
    if conflict is not None:
        raise ValueError(f"edge {v} -{x}-> {v_prime} is illegal: {conflict}")
    before_b = len(index.by_class[b])
    before_i = len(index.by_class[x.index]) if x.kind == "x" else None
    out = _add_hat_edge(g, v, s, v_prime)
    after = all_maximal_paths(out)
    if x.kind == "x":
        if len(after[b]) != before_b - 1 or len(after[x.index]) != before_i - 1:
            raise InternalInvariantError("edge join changed path counts unexpectedly")
    else:
        if len(after[b]) != before_b - 2:
            raise InternalInvariantError("edge join changed path counts unexpectedly")
    return out


def operation1(g: LabeledGraph, pair_data: Tuple[Letter, int, int]) -> LabeledGraph:
    """Bridge a gap pair through a fresh vertex carrying genus loops.

    pair_data is (x, v, v_prime) with x a genus letter, v missing its
    outgoing x-edge and v_prime missing its incoming one.  The new vertex
    sits on a two-edge x-path from v to v_prime and carries one self-loop
    for every other genus letter.
    """
    x, v, v_prime = pair_data
    if x.kind not in ("a", "b"):
        raise ValueError(f"bridge vertex requires a genus letter: {x}")
    basis = g.basis
    b = basis.boundary
    s = basis.encode_letter(x)
    _require_open_slots(g, v, s, v_prime)
    index = _PathIndex(g)
    cycle = boundary_cycle(basis, b)
    period = len(cycle)
    t_pos = cycle.index(s)
    t_neg = cycle.index(-s)
    c_j = index.end_at(b, v, t_pos)
    c_j2 = index.start_at(b, v, (t_neg + 1) % period)
    c_k = index.end_at(b, v_prime, t_neg)
    c_k2 = index.start_at(b, v_prime, (t_pos + 1) % period)
    if c_j == c_j2:
        raise ValueError("bridge is illegal: v-side path would close onto itself")
    if c_k == c_k2:
        raise ValueError("bridge is illegal: v'-side path would close onto itself")
    if c_j == c_k2 and c_j2 == c_k:
        raise ValueError("bridge is illegal: the two sides would close into a loop")
    w = g.vertex_count
    new_edges = [(v, s, w), (w, s, v_prime)]
    for loop in _lstar_letters(basis):
        if loop.positive != x.positive:
            new_edges.append((w, basis.encode_letter(loop), w))
    before_b = len(index.by_class[b])
    before_rest = {i: len(index.by_class[i]) for i in range(1, b)}
    out = _with_new_vertices(g, 1, new_edges)
    after = all_maximal_paths(out)
    expected_b = before_b - 2 if b == 1 else before_b + b - 3
    if len(after[b]) != expected_b:
        raise InternalInvariantError("bridge changed long-class path count unexpectedly")
    for i in range(1, b):
        if len(after[i]) != before_rest[i] + 1:
            raise InternalInvariantError("bridge changed x_i path count unexpectedly")
    return out


def operation3(g: LabeledGraph, x: Letter) -> LabeledGraph:
    """Resolve a letter whose every gap is carried by a one-vertex path.

    Requires each maximal long-class path flagged with x or its inverse to
    start and end at a single vertex (a type I path).  Adds a chain of k
    fresh vertices joined by partner-letter edges, routes x through them,
    and leaves exactly one new gap pair for the partner letter.
    """
    if x.kind not in ("a", "b"):
        raise ValueError(f"chain gadget requires a genus letter: {x}")
    z = x.positive
    basis = g.basis
    b = basis.boundary
    s = basis.encode_letter(z)
    paths = maximal_xi_paths(g, b)
    flagged = [
        p
        for p in paths
        if p.initial_missing.positive == z or p.terminal_missing.positive == z
    ]
    if not flagged:
        raise ValueError(f"no maximal path is missing {z}")
    if any(classify_xb_path(p).kind != "type_i" for p in flagged):
        raise ValueError(f"not every path missing {z} is type I")
    heads = sorted(p.initial_vertex for p in flagged if p.initial_missing == z)
    tails = sorted(p.initial_vertex for p in flagged if p.initial_missing == z.inverse())
    if len(heads) != len(tails) or not heads:
        raise InternalInvariantError(
            f"unbalanced type I paths for {z}: {len(heads)} vs {len(tails)}"
        )
    k = len(heads)
    y = _partner(z)
    sy = basis.encode_letter(y)
    first = g.vertex_count
    new_edges = []
    for t in range(k):
        w = first + t
        new_edges.append((tails[t], s, w))
        new_edges.append((w, s, heads[t]))
        if t + 1 < k:
            new_edges.append((w, sy, w + 1))
        for loop in _lstar_letters(basis):
            if loop.positive not in (z, y):
                new_edges.append((w, basis.encode_letter(loop), w))
    before_b = len(paths)
    partner_out = set(g.out_missing(sy))
    partner_in = set(g.out_missing(-sy))
    out = _with_new_vertices(g, k, new_edges)
    after = all_maximal_paths(out)
    if out.out_missing(s) or out.out_missing(-s):
        raise InternalInvariantError(f"chain gadget left {z} gaps open")
    if set(out.out_missing(sy)) != partner_out | {first + k - 1}:
        raise InternalInvariantError("chain gadget outgoing partner gap is wrong")
    if set(out.out_missing(-sy)) != partner_in | {first}:
        raise InternalInvariantError("chain gadget incoming partner gap is wrong")
    weave = [
        p
        for p in after[b]
        if p.initial_missing == y and p.initial_vertex == first
    ]
    if len(weave) != 1:
        raise InternalInvariantError("chain gadget partner path missing")
    # The weave path returns to the chain and ends on the partner gap only
    # when the long word is all commutators; with x letters present it
    # exits into an x gap instead, which the endgame closes later.
    if b == 1 and classify_xb_path(weave[0]).kind != "type_ii":
        raise InternalInvariantError("chain gadget partner path is not type II")
    if b == 1 and len(after[b]) != before_b + 2 - 2 * k:
        raise InternalInvariantError("chain gadget changed path count unexpectedly")
    return out


def _case_two_pairs(g: LabeledGraph):
    """Per genus letter: its single blocked gap pair, or its loop status.

    Returns (pairs, loops) where pairs lists (letter, source, target) for
    letters with exactly one gap on each side forming a blocked type II
    configuration, and loops lists fully saturated letters.
    """
    basis = g.basis
    b = basis.boundary
    index = _PathIndex(g)
    cycle = boundary_cycle(basis, b)
    period = len(cycle)
    pairs = []
    loops = []
    for z in _lstar_letters(basis):
        s = basis.encode_letter(z)
        outm = g.out_missing(s)
        inm = g.out_missing(-s)
        if not outm and not inm:
            loops.append(z)
            continue
        if len(outm) != 1 or len(inm) != 1:
            raise ValueError(
                f"letter {z} has {len(outm)}+{len(inm)} gaps, not a single pair"
            )
        beta, alpha = outm[0], inm[0]
        t_pos = cycle.index(s)
        t_neg = cycle.index(-s)
        fwd_end = index.end_at(b, beta, t_pos)
        fwd_start = index.start_at(b, alpha, (t_pos + 1) % period)
        bwd_end = index.end_at(b, alpha, t_neg)
        bwd_start = index.start_at(b, beta, (t_neg + 1) % period)
        if fwd_end != fwd_start or bwd_end != bwd_start:
            raise ValueError(f"gap pair for {z} is not a blocked type II pair")
        pairs.append((z, beta, alpha))
    return pairs, loops


def operation4(g: LabeledGraph) -> LabeledGraph:
    """Close all remaining gap pairs through one fresh vertex (b = 1).

    Every letter must either be saturated or carry exactly one blocked
    type II gap pair.  The result is regular with the boundary class
    reading a single cycle through all vertices.
    """
    basis = g.basis
    if basis.boundary != 1:
        raise ValueError("single-vertex closure applies to one-boundary surfaces")
    out = _close_case_two(g)
    m = out.vertex_count
    if not out.is_regular():
        raise InternalInvariantError("closure left the graph irregular")
    if has_xi_loop(out, 1, m - 1) is not None:
        raise InternalInvariantError("closure created a short boundary loop")
    return out


def _close_case_two(g: LabeledGraph) -> LabeledGraph:
    pairs, loops = _case_two_pairs(g)
    if not pairs:
        raise ValueError("no gap pairs to close")
    basis = g.basis
    w = g.vertex_count
    new_edges = []
    for (z, beta, alpha) in pairs:
        s = basis.encode_letter(z)
        new_edges.append((beta, s, w))
        new_edges.append((w, s, alpha))
    for z in loops:
        s = basis.encode_letter(z)
        new_edges.append((w, s, w))
    out = _with_new_vertices(g, 1, new_edges)
    for z in _lstar_letters(basis):
        s = basis.encode_letter(z)
        if out.out_missing(s) or out.out_missing(-s):
            raise InternalInvariantError(f"closure left {z} gaps open")
    return out


def _first_legal_edge(g: LabeledGraph, index: _PathIndex, x: Letter):
    """Smallest legal (v, v_prime) for a new x-edge, if any."""
    s = g.basis.encode_letter(x)
    for v in g.out_missing(s):
        for v_prime in g.out_missing(-s):
            joins = index.joins_for_edge(v, s, v_prime)
            if _join_conflict(joins) is None:
                return (v, v_prime)
    return None


def _legal_edge_batch(g: LabeledGraph, index: _PathIndex, x: Letter):
    """Greedy batch of x-edges that are jointly legal on one path index.

    Joins chain maximal paths end-to-start; a batch stays legal as long
    as no path start or end is consumed twice and no chain of joins
    closes into a cycle.  Pairs are taken in the same order as
    _first_legal_edge, so a singleton batch matches its choice.
    """
    s = g.basis.encode_letter(x)
    nxt: Dict[XiPath, XiPath] = {}
    has_in = set()
    batch = []
    used_in = set()

    def chain_closes(end, start):
        seen = 0
        cur = start
        while cur is not None and seen <= len(nxt) + 1:
            if cur == end:
                return True
            cur = nxt.get(cur)
            seen += 1
        return False

    for v in g.out_missing(s):
        for v_prime in g.out_missing(-s):
            if v_prime in used_in:
                continue
            joins = index.joins_for_edge(v, s, v_prime)
            if _join_conflict(joins) is not None:
                continue
            staged = []
            ok = True
            for (_, end, start) in joins:
                if end in nxt or start in has_in:
                    ok = False
                    break
                if chain_closes(end, start):
                    ok = False
                    break
                nxt[end] = start
                has_in.add(start)
                staged.append((end, start))
            if not ok:
                for (end, start) in staged:
                    del nxt[end]
                    has_in.discard(start)
                continue
            batch.append((v, v_prime, tuple(i for (i, _, _) in joins)))
            used_in.add(v_prime)
            break
    return batch


def _apply_edge_batch(
    g: LabeledGraph, index: _PathIndex, batch, x: Letter
) -> LabeledGraph:
    """Add a jointly legal batch of x-edges and re-check path counts once."""
    basis = g.basis
    s = basis.encode_letter(x)
    before = {i: len(paths) for i, paths in index.by_class.items()}
    drops: Dict[int, int] = {}
    out = g
    for (v, v_prime, classes) in batch:
        _require_open_slots(out, v, s, v_prime)
        out = _add_hat_edge(out, v, s, v_prime)
        for i in classes:
            drops[i] = drops.get(i, 0) + 1
    after = all_maximal_paths(out)
    for i, count in before.items():
        if len(after[i]) != count - drops.get(i, 0):
            raise InternalInvariantError("edge batch changed path counts unexpectedly")
    return out


def _first_legal_bridge(g: LabeledGraph, index: _PathIndex, x: Letter):
    basis = g.basis
    b = basis.boundary
    s = basis.encode_letter(x)
    cycle = boundary_cycle(basis, b)
    period = len(cycle)
    t_pos = cycle.index(s)
    t_neg = cycle.index(-s)
    for v in g.out_missing(s):
        for v_prime in g.out_missing(-s):
            c_j = index.end_at(b, v, t_pos)
            c_j2 = index.start_at(b, v, (t_neg + 1) % period)
            c_k = index.end_at(b, v_prime, t_neg)
            c_k2 = index.start_at(b, v_prime, (t_pos + 1) % period)
            if c_j == c_j2 or c_k == c_k2:
                continue
            if c_j == c_k2 and c_j2 == c_k:
                continue
            return (v, v_prime)
    return None


def _eliminate_genus_letters(g: LabeledGraph, log: List[Tuple[str, str]]) -> LabeledGraph:
    """Drive every genus letter to zero gaps (joins, bridges, chains, closure)."""
    basis = g.basis
    b = basis.boundary
    chained = set()
    while True:
        acted = False
        any_missing = False
        for z in _lstar_letters(basis):
            s = basis.encode_letter(z)
            outm = g.out_missing(s)
            inm = g.out_missing(-s)
            if not outm and not inm:
                continue
            any_missing = True
            index = _PathIndex(g)
            batch = _legal_edge_batch(g, index, z)
            if batch:
                g = _apply_edge_batch(g, index, batch, z)
                log.append(("op2", f"x={z} n={len(batch)}"))
                acted = True
                break
            pair = _first_legal_bridge(g, index, z)
            if pair is not None:
                g = operation1(g, (z, pair[0], pair[1]))
                log.append(("op1", f"x={z} v={pair[0]} v'={pair[1]}"))
                acted = True
                break
            flagged = [
                p
                for p in index.by_class[b]
                if p.initial_missing.positive == z
                or p.terminal_missing.positive == z
            ]
            if flagged and all(classify_xb_path(p).kind == "type_i" for p in flagged):
                if z in chained:
                    raise InternalInvariantError(
                        f"chain gadget requested twice for {z}", tuple(log)
                    )
                chained.add(z)
                g = operation3(g, z)
                log.append(("op3", f"x={z} k={len(flagged) // 2}"))
                acted = True
                break
        if not any_missing:
            return g
        if not acted:
            try:
                g = _close_case_two(g)
            except ValueError as exc:
                raise InternalInvariantError(str(exc), tuple(log)) from exc
            log.append(("op4", f"w={g.vertex_count - 1}"))
            return g


def _assert_perfect(g: LabeledGraph, log: List[Tuple[str, str]]) -> None:
    if not g.is_regular():
        raise InternalInvariantError("completion is not regular", tuple(log))
    m = g.vertex_count
    for i in range(1, g.basis.boundary + 1):
        hit = has_xi_loop(g, i, m - 1)
        if hit is not None:
            raise InternalInvariantError(
                f"completion has a short x_{i} loop at {hit}", tuple(log)
            )


def _close_final_edge(g: LabeledGraph, v: int, s: int, v_prime: int) -> LabeledGraph:
    _require_open_slots(g, v, s, v_prime)
    return _add_hat_edge(g, v, s, v_prime)


def _complete_b1(g: LabeledGraph, log: List[Tuple[str, str]]) -> LabeledGraph:
    g = _eliminate_genus_letters(g, log)
    _assert_perfect(g, log)
    return g


def _double_and_close_b2(g: LabeledGraph, log: List[Tuple[str, str]]) -> LabeledGraph:
    basis = g.basis
    m = g.vertex_count
    paths = sorted(
        maximal_xi_paths(g, 2), key=lambda p: (p.initial_vertex, p.phase)
    )
    if len(paths) != 2:
        raise InternalInvariantError("doubling expects exactly two long paths")
    alpha = [p.initial_vertex for p in paths]
    beta = [p.terminal_vertex for p in paths]
    s = basis.encode_letter(Letter("x", 1))
    edges = set(g.edges)
    edges |= {(u + m, lid, v + m) for (u, lid, v) in g.edges}
    doubled = LabeledGraph(basis, 2 * m, frozenset(edges), g.base)
    for (u, v) in (
        (beta[0], alpha[0] + m),
        (beta[1], alpha[1] + m),
        (beta[0] + m, alpha[1]),
        (beta[1] + m, alpha[0]),
    ):
        doubled = _close_final_edge(doubled, u, s, v)
    log.append(("double", f"m={m}"))
    return doubled


def _complete_b2(g: LabeledGraph, log: List[Tuple[str, str]]) -> LabeledGraph:
    basis = g.basis
    x1 = Letter("x", 1)
    s = basis.encode_letter(x1)
    g = _eliminate_genus_letters(g, log)
    while True:
        chains = maximal_xi_paths(g, 1)
        r = len(chains)
        if r < 1:
            raise InternalInvariantError("no x_1 gap left before closing", tuple(log))
        if r == 1:
            beta = g.out_missing(s)[0]
            alpha = g.out_missing(-s)[0]
            g = _close_final_edge(g, beta, s, alpha)
            log.append(("close", f"x=x1 v={beta} v'={alpha}"))
            break
        index = _PathIndex(g)
        batch = _legal_edge_batch(g, index, x1)
        if batch:
            g = _apply_edge_batch(g, index, batch, x1)
            log.append(("join", f"x=x1 n={len(batch)}"))
            continue
        if r != 2:
            raise InternalInvariantError(
                f"no legal x_1 join with {r} gaps", tuple(log)
            )
        g = _double_and_close_b2(g, log)
        break
    _assert_perfect(g, log)
    return g


def _apply_round_gadget(g: LabeledGraph, log: List[Tuple[str, str]]) -> LabeledGraph:
    """One fresh vertex collecting an x_j-edge per label, shifting gap labels."""
    basis = g.basis
    b = basis.boundary
    paths = maximal_xi_paths(g, b)
    w = g.vertex_count
    new_edges = []
    for j in range(1, b):
        letter = Letter("x", j)
        candidates = sorted(
            (p for p in paths if p.terminal_missing == letter),
            key=lambda p: (p.terminal_vertex, p.phase),
        )
        if not candidates:
            raise InternalInvariantError(f"no path ends missing x_{j}", tuple(log))
        new_edges.append((candidates[0].terminal_vertex, basis.encode_letter(letter), w))
    for z in _lstar_letters(basis):
        new_edges.append((w, basis.encode_letter(z), w))
    out = _with_new_vertices(g, 1, new_edges)
    all_maximal_paths(out)
    log.append(("gadget", f"w={w}"))
    return out


def _gap_counts(g: LabeledGraph) -> Dict[int, int]:
    return {
        j: len(g.out_missing(g.basis.encode_letter(Letter("x", j))))
        for j in range(1, g.basis.boundary)
    }


def _reduce_boundary_gaps(g: LabeledGraph, log: List[Tuple[str, str]]) -> LabeledGraph:
    """Legal joins (gadget on demand) until each x_j has exactly one gap."""
    basis = g.basis
    b = basis.boundary
    stale_gadgets = 0
    while True:
        counts = _gap_counts(g)
        if any(c < 1 for c in counts.values()):
            raise InternalInvariantError("boundary letter lost its gap", tuple(log))
        if all(c == 1 for c in counts.values()):
            return g
        index = _PathIndex(g)
        pair = None
        for j in range(1, b):
            if counts[j] == 1:
                continue
            letter = Letter("x", j)
            batch = _legal_edge_batch(g, index, letter)
            if batch:
                pair = batch[0]
                g = _apply_edge_batch(g, index, batch, letter)
                log.append(("join", f"x=x{j} n={len(batch)}"))
                stale_gadgets = 0
                break
        if pair is None:
            stale_gadgets += 1
            if stale_gadgets > b + 2:
                raise InternalInvariantError(
                    "gadget streak without a legal join", tuple(log)
                )
            g = _apply_round_gadget(g, log)


def _sigma_close(g: LabeledGraph, log: List[Tuple[str, str]]) -> LabeledGraph:
    """Copy-and-close phase once every x_j has exactly one gap."""
    basis = g.basis
    b = basis.boundary
    paths = maximal_xi_paths(g, b)
    if len(paths) != b - 1:
        raise InternalInvariantError(
            f"expected {b - 1} long paths, found {len(paths)}", tuple(log)
        )
    by_init: Dict[int, XiPath] = {}
    sigma: Dict[int, int] = {}
    for p in paths:
        if p.initial_missing.kind != "x" or p.terminal_missing.kind != "x":
            raise InternalInvariantError("long path has a genus gap left", tuple(log))
        by_init[p.initial_missing.index] = p
        sigma[p.initial_missing.index] = p.terminal_missing.index
    if sorted(by_init) != list(range(1, b)) or sorted(sigma.values()) != list(range(1, b)):
        raise InternalInvariantError("gap labels do not pair into a permutation", tuple(log))
    order = 1
    for j in range(1, b):
        length, at = 1, sigma[j]
        while at != j:
            at = sigma[at]
            length += 1
        order = lcm(order, length)
    m = g.vertex_count
    if order > 1:
        edges = set()
        for c in range(order):
            edges |= {(u + c * m, lid, v + c * m) for (u, lid, v) in g.edges}
        g = LabeledGraph(basis, order * m, frozenset(edges), g.base)
        for c in range(order - 1):
            for j in range(1, b):
                target = sigma[j]
                s = basis.encode_letter(Letter("x", target))
                g = _close_final_edge(
                    g,
                    by_init[j].terminal_vertex + c * m,
                    s,
                    by_init[target].initial_vertex + (c + 1) * m,
                )
        log.append(("copies", f"n={order}"))
        composite = maximal_xi_paths(g, b)
        for p in composite:
            if p.initial_missing != p.terminal_missing:
                raise InternalInvariantError(
                    "copies did not align gap labels", tuple(log)
                )
    g = _apply_round_gadget(g, log)
    w = g.vertex_count - 1
    final_paths = maximal_xi_paths(g, b)
    inits = {}
    for p in final_paths:
        shifted = p.initial_missing.index % (b - 1) + 1
        if p.terminal_missing.index != shifted:
            raise InternalInvariantError("gadget did not shift gap labels", tuple(log))
        inits[p.initial_missing.index] = p.initial_vertex
    for j in range(1, b):
        s = basis.encode_letter(Letter("x", j))
        g = _close_final_edge(g, w, s, inits[j])
    log.append(("close", f"w={w}"))
    return g


def _complete_bmulti(g: LabeledGraph, log: List[Tuple[str, str]]) -> LabeledGraph:
    g = _eliminate_genus_letters(g, log)
    g = _reduce_boundary_gaps(g, log)
    g = _sigma_close(g, log)
    _assert_perfect(g, log)
    return g


def _check_embedding(before: LabeledGraph, after: LabeledGraph) -> None:
    if not before.edges <= after.edges or before.base != after.base:
        raise InternalInvariantError("completion moved the original graph")


def _validate_completion_input(g: LabeledGraph) -> None:
    if not g.is_folded:
        raise ValueError("completion requires a folded graph")
    for i in range(1, g.basis.boundary + 1):
        hit = has_xi_loop(g, i, g.vertex_count)
        if hit is not None:
            raise ValueError(f"graph has an x_{i} power loop at vertex {hit[0]}")


def _complete(g: LabeledGraph) -> Tuple[LabeledGraph, List[Tuple[str, str]]]:
    _validate_completion_input(g)
    log: List[Tuple[str, str]] = []
    b = g.basis.boundary
    if b == 1:
        out = _complete_b1(g, log)
    elif b == 2:
        out = _complete_b2(g, log)
    else:
        out = _complete_bmulti(g, log)
    _check_embedding(g, out)
    return out, log


def complete_b1(g: LabeledGraph) -> LabeledGraph:
    """Perfect extension of a folded loop-free graph, one boundary circle."""
    if g.basis.boundary != 1:
        raise ValueError("wrong completion arity for this basis")
    return _complete(g)[0]


def complete_b2(g: LabeledGraph) -> LabeledGraph:
    """Perfect extension of a folded loop-free graph, two boundary circles."""
    if g.basis.boundary != 2:
        raise ValueError("wrong completion arity for this basis")
    return _complete(g)[0]


def complete_b3(g: LabeledGraph, basis: SurfaceBasis) -> LabeledGraph:
    """Perfect extension of a folded loop-free graph, three or more circles."""
    if basis != g.basis:
        raise ValueError("basis does not match the graph")
    if g.basis.boundary < 3:
        raise ValueError("wrong completion arity for this basis")
    return _complete(g)[0]


def separate(
    basis: SurfaceBasis,
    subgroup_generators: Sequence[Word],
    excluded: Sequence[Word] = (),
) -> SeparabilityCertificate:
    """Finite-index certificate separating the subgroup from excluded words.

    Raises PeripheralSubgroup when the subgroup traps a boundary power and
    NotSeparableHere when an excluded word already lies in the subgroup.
    The returned certificate has been re-verified from scratch.
    """
    gens = tuple(free_reduce(w) for w in subgroup_generators)
    excl = tuple(free_reduce(w) for w in excluded)
    for w in excl:
        if len(w) == 0:
            raise NotSeparableHere(w)
    loops = [w for w in gens if len(w) > 0]
    wedge = wedge_from_words(basis, loops=loops, rays=excl)
    g0, _ = fold(wedge)
    for i in range(1, basis.boundary + 1):
        hit = has_xi_loop(g0, i, g0.vertex_count)
        if hit is not None:
            raise PeripheralSubgroup(i, hit[0], hit[1])
    for w in excl:
        if member(g0, w):
            raise NotSeparableHere(w)
    final, log = _complete(g0)
    log.insert(0, ("fold", f"m={g0.vertex_count}"))
    cert = SeparabilityCertificate(
        basis=basis,
        subgroup_generators=gens,
        excluded=excl,
        graph=final,
        index=final.vertex_count,
        stage_log=tuple(log),
    )
    from . import verify as _verify

    report = _verify.check_separability(cert)
    if not report.passed:
        raise InternalInvariantError(
            f"self-verification failed: {report.first_failure()}", tuple(log)
        )
    return cert

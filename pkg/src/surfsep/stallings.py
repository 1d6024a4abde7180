"""Folded labeled graphs for subgroups of a surface group.

A graph has vertices 0..m-1, a base vertex, and directed edges labeled by
positive letters.  Reading an edge against its direction reads the inverse
letter, so every geometric edge (u, l, v) provides the two hat-edges
(u, l, v) and (v, l', u).  A graph is folded when no vertex has two
outgoing hat-edges with the same signed label; membership of a word in the
subgroup is then a deterministic trace from the base vertex.

Maximal boundary paths: for each boundary class i the cyclic word C_i
(a single letter x_i, or the long product for i = b) induces a successor
relation on instances (hat-edge, phase).  A maximal path starts where the
phase-(t-1) in-edge is missing and runs until the next out-edge is
missing.  A vertex whose in-edge at phase t-1 and out-edge at phase t are
both missing carries an empty maximal path at that phase.  Instance
cycles correspond to x_i-power loops and are reported, never silently
traversed.
"""
from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .alphabet import Letter, SurfaceBasis, Word, boundary_word, format_word, free_reduce


class NotFoldedError(ValueError):
    """Operation requires a folded graph."""


class DisconnectedGraphError(ValueError):
    """Operation requires a connected graph."""


class InternalInvariantError(RuntimeError):
    """A structural invariant failed; indicates a bug, never a bad input."""

    def __init__(self, message: str, stage_log: Tuple[Tuple[str, str], ...] = ()):
        super().__init__(message)
        self.stage_log = stage_log


class XiLoopPresent(ValueError):
    """The graph carries a loop reading a power of a boundary letter."""

    def __init__(self, i: int, vertex: int, power: int):
        super().__init__(f"x_{i}^{power} loop at vertex {vertex}")
        self.i = i
        self.vertex = vertex
        self.power = power


HatEdge = Tuple[int, Letter, int]


@dataclass(frozen=True)
class LabeledGraph:
    """Immutable labeled graph over a surface basis."""

    basis: SurfaceBasis
    vertex_count: int
    edges: FrozenSet[Tuple[int, int, int]]
    base: int = 0

    def __post_init__(self) -> None:
        if self.vertex_count < 1:
            raise ValueError("graph needs at least one vertex")
        if not 0 <= self.base < self.vertex_count:
            raise ValueError(f"base vertex out of range: {self.base}")
        if not isinstance(self.edges, frozenset):
            object.__setattr__(self, "edges", frozenset(self.edges))
        k = self.basis.letter_count
        for (u, lid, v) in self.edges:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge endpoint out of range: {(u, lid, v)}")
            if not 0 <= lid < k:
                raise ValueError(f"edge label out of range: {(u, lid, v)}")

    @cached_property
    def _hat(self) -> Tuple[Dict[Tuple[int, int], int], bool]:
        hat: Dict[Tuple[int, int], int] = {}
        folded = True
        for (u, lid, v) in self.edges:
            for (src, s, dst) in ((u, lid + 1, v), (v, -(lid + 1), u)):
                cur = hat.get((src, s))
                if cur is None:
                    hat[(src, s)] = dst
                elif cur != dst:
                    folded = False
        return hat, folded

    @property
    def is_folded(self) -> bool:
        return self._hat[1]

    def hat_out(self, v: int, signed: int) -> Optional[int]:
        """Target of the outgoing hat-edge at v with signed label code."""
        if not self.is_folded:
            raise NotFoldedError("hat-edge lookup requires a folded graph")
        return self._hat[0].get((v, signed))

    def out_missing(self, signed: int) -> Tuple[int, ...]:
        """Vertices with no outgoing hat-edge for the signed label code."""
        if not self.is_folded:
            raise NotFoldedError("slot scan requires a folded graph")
        hat = self._hat[0]
        return tuple(v for v in range(self.vertex_count) if (v, signed) not in hat)

    def is_regular(self, letters: Optional[Sequence[Letter]] = None) -> bool:
        """True when every vertex has both hat-edges for every given letter.

        Defaults to all positive letters of the basis.
        """
        if letters is None:
            letters = self.basis.positive_letters()
        codes = [self.basis.encode_letter(l) for l in letters]
        return all(
            not self.out_missing(s) and not self.out_missing(-s) for s in codes
        )


def wedge_from_words(
    basis: SurfaceBasis,
    loops: Sequence[Word] = (),
    rays: Sequence[Word] = (),
) -> LabeledGraph:
    """Wedge of loops and rays at a single base vertex, not folded.

    Loops trace their word back to the base; rays end at a dangling
    vertex.  Words must be freely reduced; empty loops are dropped and an
    empty ray is an error.
    """
    edges = set()
    count = 1

    def lay(word: Word, close: bool) -> None:
        nonlocal count
        codes = basis.encode(word)
        at = 0
        for pos, s in enumerate(codes):
            last = pos == len(codes) - 1
            nxt = 0 if (close and last) else count
            if not (close and last):
                count += 1
            if s > 0:
                edges.add((at, s - 1, nxt))
            else:
                edges.add((nxt, -s - 1, at))
            at = nxt

    for word in loops:
        if free_reduce(word) != word:
            raise ValueError(f"loop word not freely reduced: {format_word(word)}")
        if len(word) == 0:
            continue
        lay(word, close=True)
    for word in rays:
        if free_reduce(word) != word:
            raise ValueError(f"ray word not freely reduced: {format_word(word)}")
        if len(word) == 0:
            raise ValueError("ray word must be nonempty")
        lay(word, close=False)
    return LabeledGraph(basis, count, frozenset(edges), base=0)


def fold(g: LabeledGraph, rng=None) -> Tuple[LabeledGraph, Tuple[int, ...]]:
    """Fold g; returns the folded graph and the vertex surjection.

    Folding is confluent, so the result is independent of processing
    order; rng (a random.Random) optionally permutes the internal order
    and exists so tests can exercise that independence.  Vertices of the
    result are renumbered by the least original vertex id in each class,
    which keeps a base of 0 at 0.
    """
    n = g.vertex_count
    parent = list(range(n))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    out: List[Dict[int, int]] = [dict() for _ in range(n)]
    pending: List[Tuple[int, int]] = []
    items: List[Tuple[int, int, int]] = []
    for (u, lid, v) in sorted(g.edges):
        items.append((u, lid + 1, v))
        items.append((v, -(lid + 1), u))
    if rng is not None:
        rng.shuffle(items)

    def insert(root: int, s: int, dst: int) -> None:
        cur = out[root].get(s)
        if cur is None:
            out[root][s] = dst
        elif find(cur) != find(dst):
            pending.append((cur, dst))

    for (src, s, dst) in items:
        insert(find(src), s, dst)
    while pending:
        a, b = pending.pop()
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        if len(out[ra]) < len(out[rb]):
            ra, rb = rb, ra
        parent[rb] = ra
        moved = out[rb]
        out[rb] = {}
        for s, dst in moved.items():
            insert(ra, s, dst)

    first_seen: Dict[int, int] = {}
    for v in range(n):
        first_seen.setdefault(find(v), v)
    order = sorted(first_seen, key=lambda r: first_seen[r])
    new_id = {r: i for i, r in enumerate(order)}
    vmap = tuple(new_id[find(v)] for v in range(n))
    edges = frozenset((vmap[u], lid, vmap[v]) for (u, lid, v) in g.edges)
    folded = LabeledGraph(g.basis, len(order), edges, base=vmap[g.base])
    if not folded.is_folded:
        raise InternalInvariantError("fold produced an unfolded graph")
    return folded, vmap


def traces(g: LabeledGraph, w: Word, start: Optional[int] = None) -> Optional[int]:
    """Endpoint of reading w from start (default base), or None if it exits."""
    v = g.base if start is None else start
    for s in g.basis.encode(w):
        nxt = g.hat_out(v, s)
        if nxt is None:
            return None
        v = nxt
    return v


def member(g: LabeledGraph, w: Word) -> bool:
    """True when w lies in the subgroup the folded graph represents."""
    return traces(g, free_reduce(w)) == g.base


def canonicalize(g: LabeledGraph) -> LabeledGraph:
    """Canonical vertex numbering by base-point BFS.

    Neighbors are explored per letter in basis order, positive direction
    before negative, so isomorphic based graphs canonicalize identically.
    """
    if not g.is_folded:
        raise NotFoldedError("canonicalize requires a folded graph")
    k = g.basis.letter_count
    seen = {g.base: 0}
    queue = deque([g.base])
    while queue:
        v = queue.popleft()
        for lid in range(k):
            for s in (lid + 1, -(lid + 1)):
                w = g.hat_out(v, s)
                if w is not None and w not in seen:
                    seen[w] = len(seen)
                    queue.append(w)
    if len(seen) != g.vertex_count:
        raise DisconnectedGraphError("graph is not connected")
    edges = frozenset((seen[u], lid, seen[v]) for (u, lid, v) in g.edges)
    return LabeledGraph(g.basis, g.vertex_count, edges, base=0)


def boundary_cycle(basis: SurfaceBasis, i: int) -> Tuple[int, ...]:
    """Signed letter codes of boundary class i as a cyclic word."""
    return basis.encode(boundary_word(basis, i))


@dataclass(frozen=True)
class XiPath:
    """A maximal path reading consecutive phases of boundary class i.

    phase is the cyclic position of the first (missing-predecessor) slot;
    the edge sequence lists traversed hat-edges.  An empty sequence is the
    empty path at a vertex whose phase-(phase-1) in-edge and phase-phase
    out-edge are both missing.
    """

    i: int
    phase: int
    initial_vertex: int
    terminal_vertex: int
    initial_missing: Letter
    terminal_missing: Letter
    edge_sequence: Tuple[HatEdge, ...] = ()
    maximal: bool = True

    def __len__(self) -> int:
        return len(self.edge_sequence)

    def terminal_phase(self, period: int) -> int:
        return (self.phase + len(self.edge_sequence)) % period


def _xi_scan(g: LabeledGraph, i: int) -> Tuple[List[XiPath], List[List[Tuple[int, int]]]]:
    if not g.is_folded:
        raise NotFoldedError("path enumeration requires a folded graph")
    basis = g.basis
    if not 1 <= i <= basis.boundary:
        raise ValueError(f"boundary index out of range: {i}")
    cycle = boundary_cycle(basis, i)
    period = len(cycle)
    paths: List[XiPath] = []
    visited = set()
    for v in range(g.vertex_count):
        for t in range(period):
            if g.hat_out(v, -cycle[(t - 1) % period]) is not None:
                continue
            init_missing = basis.decode_letter(cycle[(t - 1) % period])
            u, tt = v, t
            seq: List[HatEdge] = []
            while True:
                nxt = g.hat_out(u, cycle[tt % period])
                if nxt is None:
                    break
                visited.add((u, tt % period))
                seq.append((u, basis.decode_letter(cycle[tt % period]), nxt))
                u = nxt
                tt += 1
            paths.append(
                XiPath(
                    i=i,
                    phase=t,
                    initial_vertex=v,
                    terminal_vertex=u,
                    initial_missing=init_missing,
                    terminal_missing=basis.decode_letter(cycle[tt % period]),
                    edge_sequence=tuple(seq),
                )
            )
    leftover = {
        (v, t)
        for v in range(g.vertex_count)
        for t in range(period)
        if (v, t) not in visited and g.hat_out(v, cycle[t]) is not None
    }
    cycles: List[List[Tuple[int, int]]] = []
    while leftover:
        v, t = min(leftover)
        run: List[Tuple[int, int]] = []
        while (v, t) in leftover:
            leftover.remove((v, t))
            run.append((v, t))
            v = g.hat_out(v, cycle[t])
            t = (t + 1) % period
        cycles.append(run)
    return paths, cycles


def maximal_xi_paths(g: LabeledGraph, i: int) -> List[XiPath]:
    """All maximal paths of boundary class i; raises XiLoopPresent on loops."""
    paths, cycles = _xi_scan(g, i)
    if cycles:
        period = len(boundary_cycle(g.basis, i))
        best = None
        for run in cycles:
            power = len(run) // period
            for (v, t) in run:
                if t == 0 and (best is None or (power, v) < best):
                    best = (power, v)
        assert best is not None
        raise XiLoopPresent(i=i, vertex=best[1], power=best[0])
    return paths


def has_xi_loop(g: LabeledGraph, i: int, max_power: int) -> Optional[Tuple[int, int]]:
    """Least (vertex, k) with an x_i^k loop, k <= max_power, if any.

    Minimizes the power first; vertex order breaks ties.
    """
    _, cycles = _xi_scan(g, i)
    period = len(boundary_cycle(g.basis, i))
    best = None
    for run in cycles:
        power = len(run) // period
        if power > max_power:
            continue
        for (v, t) in run:
            if t == 0 and (best is None or (power, v) < best):
                best = (power, v)
    if best is None:
        return None
    return (best[1], best[0])


def all_maximal_paths(g: LabeledGraph) -> Dict[int, List[XiPath]]:
    """Maximal paths for every boundary class, with structural checks.

    Checks, for the whole family: per-letter balance of initial and
    terminal missing labels; the pairing of genus-letter gaps (an initial
    gap x at v always co-locates with a terminal gap x' at v); and path
    disjointness (vertex-disjoint for i < b, hat-edge-disjoint for i = b).
    """
    by_class = {i: maximal_xi_paths(g, i) for i in range(1, g.basis.boundary + 1)}
    _check_gap_pairing(g, by_class)
    _check_disjointness(g, by_class)
    return by_class


def _check_gap_pairing(g: LabeledGraph, by_class: Dict[int, List[XiPath]]) -> None:
    init_tally: Counter = Counter()
    term_tally: Counter = Counter()
    init_at: Dict[Letter, Counter] = {}
    term_at: Dict[Letter, Counter] = {}
    for paths in by_class.values():
        for p in paths:
            init_tally[p.initial_missing] += 1
            term_tally[p.terminal_missing] += 1
            init_at.setdefault(p.initial_missing, Counter())[p.initial_vertex] += 1
            term_at.setdefault(p.terminal_missing, Counter())[p.terminal_vertex] += 1
    for letter in set(init_tally) | set(term_tally):
        if init_tally[letter] != term_tally[letter]:
            raise InternalInvariantError(
                f"gap balance violated for {letter}: "
                f"{init_tally[letter]} initial vs {term_tally[letter]} terminal"
            )
    for i in range(1, g.basis.genus + 1):
        for base_letter in (Letter("a", i), Letter("b", i)):
            for letter in (base_letter, base_letter.inverse()):
                left = init_at.get(letter, Counter())
                right = term_at.get(letter.inverse(), Counter())
                if left != right:
                    raise InternalInvariantError(
                        f"gap pairing violated for {letter}: initial gaps at "
                        f"{dict(left)} vs inverse terminal gaps at {dict(right)}"
                    )


def _check_disjointness(g: LabeledGraph, by_class: Dict[int, List[XiPath]]) -> None:
    b = g.basis.boundary
    for i, paths in by_class.items():
        if i < b:
            seen_vertices = set()
            for p in paths:
                vertices = {p.initial_vertex, p.terminal_vertex}
                for (u, _, v) in p.edge_sequence:
                    vertices.update((u, v))
                if vertices & seen_vertices:
                    raise InternalInvariantError(
                        f"x_{i} paths are not vertex-disjoint"
                    )
                seen_vertices |= vertices
        else:
            seen_edges = set()
            for p in paths:
                for e in p.edge_sequence:
                    if e in seen_edges:
                        raise InternalInvariantError(
                            f"x_{i} paths are not edge-disjoint"
                        )
                    seen_edges.add(e)


def missing_label_tally(g: LabeledGraph) -> Dict[Letter, Tuple[int, int]]:
    """Per signed letter: (initial, terminal) missing-label counts.

    Aggregated over the maximal paths of every boundary class; letters
    that never appear as a missing label report (0, 0).
    """
    init_tally: Counter = Counter()
    term_tally: Counter = Counter()
    for i in range(1, g.basis.boundary + 1):
        for p in maximal_xi_paths(g, i):
            init_tally[p.initial_missing] += 1
            term_tally[p.terminal_missing] += 1
    result = {}
    for letter in g.basis.positive_letters():
        for signed in (letter, letter.inverse()):
            result[signed] = (init_tally[signed], term_tally[signed])
    return result


def graph_to_json_dict(g: LabeledGraph) -> dict:
    edges = [
        {"from": u, "label": str(g.basis.letter_from_id(lid)), "to": v}
        for (u, lid, v) in g.edges
    ]
    edges.sort(key=lambda e: (e["from"], e["label"], e["to"]))
    return {
        "genus": g.basis.genus,
        "boundary": g.basis.boundary,
        "base": g.base,
        "vertices": g.vertex_count,
        "edges": edges,
    }


def graph_from_json_dict(data: dict) -> LabeledGraph:
    try:
        basis = SurfaceBasis(int(data["genus"]), int(data["boundary"]))
        vertex_count = int(data["vertices"])
        base = int(data["base"])
        edges = set()
        for e in data["edges"]:
            label = str(e["label"])
            if label.endswith("'"):
                raise ValueError(f"edge labels must be positive letters: {label}")
            kind, index = label[0], int(label[1:])
            lid = basis.letter_id(Letter(kind, index))
            edges.add((int(e["from"]), lid, int(e["to"])))
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed graph object: {exc}") from exc
    return LabeledGraph(basis, vertex_count, frozenset(edges), base=base)


def graph_to_dot(g: LabeledGraph) -> str:
    lines = ["digraph subgroup_graph {", "  rankdir=LR;"]
    for v in range(g.vertex_count):
        shape = "doublecircle" if v == g.base else "circle"
        lines.append(f'  v{v} [shape={shape} label="{v}"];')
    data = graph_to_json_dict(g)
    for e in data["edges"]:
        lines.append(f'  v{e["from"]} -> v{e["to"]} [label="{e["label"]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

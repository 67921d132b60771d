"""Mixed-graph view of simple 2-CNF formulas.

An all-negative clause (-u v -v) is an undirected edge {u, v}; a Horn clause
(-u v v) is a directed edge (u, v). Polarization orients every edge and
labels it NEG (from an undirected edge) or POS (from a directed one).
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

from .cnf_core import Formula
from .errors import CycleError, NotSimple
from .simplify import is_simple

NEG = -1
POS = 1


@dataclass(frozen=True)
class Diagram:
    vertices: frozenset
    undirected: frozenset  # pairs (u, v) with u < v
    directed: frozenset    # pairs (u, v)

    def __post_init__(self):
        seen = set()
        for u, v in self.undirected:
            if u >= v:
                raise ValueError(f"undirected pair {(u, v)} must be stored with u < v")
        for u, v in list(self.undirected) + list(self.directed):
            if u == v:
                raise ValueError(f"loop at {u}")
            if u not in self.vertices or v not in self.vertices:
                raise ValueError(f"edge {(u, v)} leaves the vertex set")
            k = (min(u, v), max(u, v))
            if k in seen:
                raise ValueError(f"pair {k} carries more than one edge")
            seen.add(k)

    def num_edges(self) -> int:
        return len(self.undirected) + len(self.directed)


@dataclass(frozen=True)
class PolarizedDiagram:
    vertices: frozenset
    polarity: dict  # (u, v) -> NEG | POS

    @property
    def edges(self) -> frozenset:
        return frozenset(self.polarity)

    def num_edges(self) -> int:
        return len(self.polarity)


def diagram_unchecked(f: Formula) -> Diagram:
    und, dire = set(), set()
    for a, b in f.clauses:
        if a < 0 and b < 0:
            und.add((min(-a, -b), max(-a, -b)))
        elif a < 0:
            dire.add((-a, b))
        else:
            dire.add((-b, a))
    return Diagram(f.variables(), frozenset(und), frozenset(dire))


def diagram_of(f: Formula) -> Diagram:
    viol = is_simple(f)
    if viol is not None:
        raise NotSimple(viol)
    return diagram_unchecked(f)


def _kahn(vertices, edges):
    succ = {v: [] for v in vertices}
    indeg = dict.fromkeys(vertices, 0)
    for u, v in edges:
        succ[u].append(v)
        indeg[v] += 1
    heap = [v for v, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    return order, succ, indeg


def _find_cycle(succ, candidates):
    """Walk backwards inside the residual subgraph, where every vertex keeps
    a predecessor, until a vertex repeats."""
    cand = set(candidates)
    pred = {v: [] for v in cand}
    for u in cand:
        for w in succ[u]:
            if w in cand:
                pred[w].append(u)
    pos = {}
    path = []
    v = min(cand)
    while v not in pos:
        pos[v] = len(path)
        path.append(v)
        v = min(pred[v])
    cyc = path[pos[v]:] + [v]
    return cyc[::-1]


def topo_order(d: Diagram) -> list:
    """Min-id Kahn order of the directed part; undirected edges are ignored."""
    order, succ, indeg = _kahn(d.vertices, d.directed)
    if len(order) < len(d.vertices):
        raise CycleError(_find_cycle(succ, [v for v, k in indeg.items() if k > 0]))
    return order


def polarize(d: Diagram, order) -> PolarizedDiagram:
    pos = {v: i for i, v in enumerate(order)}
    if set(pos) != set(d.vertices):
        raise ValueError("order must list every vertex exactly once")
    pol = {}
    for u, v in d.undirected:
        pol[(u, v) if pos[u] < pos[v] else (v, u)] = NEG
    for u, v in d.directed:
        if pos[u] > pos[v]:
            raise ValueError(f"order is not topological for edge {(u, v)}")
        pol[(u, v)] = POS
    return PolarizedDiagram(frozenset(d.vertices), pol)


def polarized_topo_order(g: PolarizedDiagram) -> list:
    """Min-id topological order of a polarized diagram (all edges directed)."""
    order, succ, indeg = _kahn(g.vertices, g.polarity)
    if len(order) < len(g.vertices):
        raise CycleError(_find_cycle(succ, [v for v, k in indeg.items() if k > 0]))
    return order


def formula_of_polarized(g: PolarizedDiagram) -> Formula:
    out = set()
    for (u, v), p in g.polarity.items():
        a, b = -u, (-v if p == NEG else v)
        out.add((a, b) if abs(a) < abs(b) else (b, a))
    return Formula.from_canonical(frozenset(out), max(g.vertices, default=0))

"""Polarized rectifier networks (PRNs).

A PRN has base vertices (formula variables), auxiliary vertices (fresh
variables) and directed edges. Edges into a base vertex carry a polarity
NEG or POS. Edge (u, v) stands for the clause (-u v -v) when v is base with
polarity NEG, and (-u v v) otherwise. A valid walk runs base -> aux* -> base;
its sign is the polarity of its last edge.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import chain
from typing import Iterable, Mapping

import numpy as np

from .cnf_core import Formula
from .diagram import NEG, POS, Diagram, PolarizedDiagram
from .errors import CycleError, NotCoherentBiclique


class Prn:
    """Immutable PRN. ``edges`` maps (u, v) to NEG/POS when v is base and to
    None when v is auxiliary."""

    __slots__ = ("base", "aux", "_edges", "_succ", "_pred")

    def __init__(self, base: Iterable[int], aux: Iterable[int],
                 edges: Mapping[tuple, int | None], check: bool = True):
        self.base = frozenset(base)
        self.aux = frozenset(aux)
        self._edges = dict(edges)
        self._succ = None
        self._pred = None
        if check:
            self._validate()

    def _validate(self):
        if self.base & self.aux:
            raise ValueError(f"base and aux overlap: {sorted(self.base & self.aux)[:5]}")
        verts = self.base | self.aux
        for (u, v), p in self._edges.items():
            if u == v:
                raise ValueError(f"loop at {u}")
            if u not in verts or v not in verts:
                raise ValueError(f"edge {(u, v)} leaves the vertex set")
            if v in self.base:
                if p not in (NEG, POS):
                    raise ValueError(f"edge {(u, v)} into a base vertex needs a polarity")
            elif p is not None:
                raise ValueError(f"edge {(u, v)} into an aux vertex must not carry a polarity")

    @property
    def edges(self) -> frozenset:
        return frozenset(self._edges)

    @property
    def polarity(self) -> dict:
        return {e: p for e, p in self._edges.items() if p is not None}

    def edge_map(self) -> dict:
        return dict(self._edges)

    def num_edges(self) -> int:
        return len(self._edges)

    def vertices(self) -> frozenset:
        return self.base | self.aux

    def max_id(self) -> int:
        return max(self.base | self.aux, default=0)

    def has_edge(self, u, v) -> bool:
        return (u, v) in self._edges

    def pol(self, u, v):
        return self._edges[(u, v)]

    def succ(self, v) -> list:
        if self._succ is None:
            self._build_adj()
        return self._succ.get(v, [])

    def pred(self, v) -> list:
        if self._pred is None:
            self._build_adj()
        return self._pred.get(v, [])

    def _build_adj(self):
        succ, pred = defaultdict(list), defaultdict(list)
        for u, v in sorted(self._edges):
            succ[u].append(v)
            pred[v].append(u)
        self._succ, self._pred = dict(succ), dict(pred)

    def __eq__(self, other):
        if not isinstance(other, Prn):
            return NotImplemented
        return (self.base, self.aux, self._edges) == (other.base, other.aux, other._edges)

    def __repr__(self):
        return f"Prn(|base|={len(self.base)}, |aux|={len(self.aux)}, |edges|={len(self._edges)})"


@dataclass(frozen=True)
class ValidWalk:
    vertices: tuple
    sign: int


@dataclass(frozen=True)
class Counterexample:
    pair: tuple
    kind: str  # "missing walk" | "spurious walk" | "wrong sign" | "self-walk"


@dataclass(frozen=True)
class StrictnessWitness:
    pair: tuple | None
    walks: tuple = ()
    dangling: int | None = None


def prn_of(g: PolarizedDiagram) -> Prn:
    """Zero-auxiliary PRN with one edge per polarized diagram edge."""
    return Prn(g.vertices, (), g.polarity)


def clause_of_edge(u, v, p):
    a, b = -u, (-v if p == NEG else v)
    return (a, b) if abs(a) < abs(b) else (b, a)


def formula_of(r: Prn) -> Formula:
    out = frozenset(clause_of_edge(u, v, p) for (u, v), p in r._edges.items())
    return Formula.from_canonical(out, r.max_id())


def valid_walks_from(r: Prn, u: int) -> list:
    if u not in r.base:
        raise ValueError(f"{u} is not a base vertex")
    walks = []
    stack = [(u, iter(r.succ(u)))]
    path = [u]
    onpath = {u}
    while stack:
        v, it = stack[-1]
        w = next(it, None)
        if w is None:
            stack.pop()
            onpath.discard(path.pop())
            continue
        if w in r.base:
            walks.append(ValidWalk(tuple(path) + (w,), r._edges[(v, w)]))
        elif w in onpath:
            i = path.index(w)
            raise CycleError(path[i:] + [w], "auxiliary")
        else:
            path.append(w)
            onpath.add(w)
            stack.append((w, iter(r.succ(w))))
    return walks


def _aux_counts(r: Prn) -> dict:
    """For every aux vertex, Counter{(base endpoint, sign): number of walks}."""
    memo = {}
    state = {}
    for a0 in sorted(r.aux):
        if a0 in memo:
            continue
        stack = [(a0, iter(r.succ(a0)))]
        state[a0] = 1
        path = [a0]
        while stack:
            a, it = stack[-1]
            w = next(it, None)
            if w is None:
                cnt = Counter()
                for x in r.succ(a):
                    if x in r.base:
                        cnt[(x, r._edges[(a, x)])] += 1
                    else:
                        cnt.update(memo[x])
                memo[a] = cnt
                state[a] = 2
                stack.pop()
                path.pop()
                continue
            if w in r.base:
                continue
            st = state.get(w, 0)
            if st == 1:
                i = path.index(w)
                raise CycleError(path[i:] + [w], "auxiliary")
            if st == 0:
                state[w] = 1
                path.append(w)
                stack.append((w, iter(r.succ(w))))
    return memo


def _base_counts(r: Prn, memo, u) -> Counter:
    cnt = Counter()
    for w in r.succ(u):
        if w in r.base:
            cnt[(w, r._edges[(u, w)])] += 1
        else:
            cnt.update(memo[w])
    return cnt


def walk_table(r: Prn) -> dict:
    """u -> Counter{(v, sign): walks} for every base vertex u."""
    memo = _aux_counts(r)
    return {u: _base_counts(r, memo, u) for u in r.base}



FAST_MIN_EDGES = 400
FAST_MAX_CELLS = 4_000_000


def _aux_topo(r: Prn):
    """Aux vertices in topological order of the aux subgraph, None on a cycle."""
    indeg = dict.fromkeys(r.aux, 0)
    for (u, v) in r._edges:
        if u in indeg and v in indeg:
            indeg[v] += 1
    order = sorted(v for v, k in indeg.items() if k == 0)
    i = 0
    while i < len(order):
        for w in r.succ(order[i]):
            if w in indeg:
                indeg[w] -= 1
                if indeg[w] == 0:
                    order.append(w)
        i += 1
    return order if len(order) == len(indeg) else None


def _walk_matrices(r: Prn):
    """Dense walk counts (neg, pos) between sorted base vertices plus a mask
    of aux vertices lying on some valid walk; None when the matrix route does
    not apply (aux cycle or too large). Counts are floats, exact below 2**53.

    With aux in topological order E_AA is strictly upper triangular, so the
    walk counts are E_BB + E_BA (I - E_AA)^-1 E_AB per sign.
    """
    import scipy.sparse as sp
    from scipy.sparse.linalg import spsolve_triangular

    base = sorted(r.base)
    order = _aux_topo(r)
    if order is None or len(order) * len(base) > FAST_MAX_CELLS:
        return None
    n, a = len(base), len(order)
    bi = {v: i for i, v in enumerate(base)}
    ai = {v: i for i, v in enumerate(order)}
    parts = {k: ([], []) for k in ("bbn", "bbp", "ba", "aa", "abn", "abp")}
    for (u, v), p in r._edges.items():
        if u in bi:
            key = "ba" if v in ai else ("bbn" if p == NEG else "bbp")
            rows, cols = parts[key]
            rows.append(bi[u])
            cols.append(ai[v] if v in ai else bi[v])
        else:
            key = "aa" if v in ai else ("abn" if p == NEG else "abp")
            rows, cols = parts[key]
            rows.append(ai[u])
            cols.append(ai[v] if v in ai else bi[v])
    shapes = {"bbn": (n, n), "bbp": (n, n), "ba": (n, a), "aa": (a, a), "abn": (a, n), "abp": (a, n)}
    m = {k: sp.csr_matrix((np.ones(len(rc[0])), rc), shape=shapes[k]) for k, rc in parts.items()}
    neg, pos = m["bbn"].toarray(), m["bbp"].toarray()
    on_walk = np.zeros(a, dtype=bool)
    if a:
        ia = (sp.identity(a, format="csr") - m["aa"]).tocsr()
        rhs = np.hstack([m["abn"].toarray(), m["abp"].toarray()])
        x = spsolve_triangular(ia, rhs, lower=False)
        neg += m["ba"] @ x[:, :n]
        pos += m["ba"] @ x[:, n:]
        # reached from base: solve the transposed system
        y = spsolve_triangular(ia.T.tocsr(), m["ba"].T.toarray(), lower=True)
        on_walk = (x.sum(axis=1) > 0) & (y.sum(axis=1) > 0)
    return base, neg, pos, on_walk


def _fast_strict_ok(r: Prn):
    """True/False when the matrix route decides strictness, None otherwise."""
    if r.num_edges() < FAST_MIN_EDGES:
        return None
    w = _walk_matrices(r)
    if w is None:
        return None
    _, neg, pos, on_walk = w
    tot = neg + pos
    pair = np.triu(tot + tot.T, 1)
    return bool(pair.max(initial=0) <= 1 and np.diag(tot).max(initial=0) <= 1 and on_walk.all())


def _fast_realizes_ok(r: Prn, g):
    if r.num_edges() < FAST_MIN_EDGES or set(r.base) != set(g.vertices):
        return None
    w = _walk_matrices(r)
    if w is None:
        return None
    base, neg, pos, _ = w
    barr = np.asarray(base)
    n = len(base)
    want = np.zeros((n, n), dtype=bool)
    sgn = np.zeros((n, n), dtype=np.int8)

    def ends(pairs):
        a = np.fromiter(chain.from_iterable(pairs), dtype=np.int64).reshape(-1, 2)
        return np.searchsorted(barr, a[:, 0]), np.searchsorted(barr, a[:, 1])

    if isinstance(g, Diagram):
        # same orientation rule as realized_polarization
        if g.undirected:
            u, v = ends(g.undirected)
            flip = (neg[v, u] > 0) & ~(neg[u, v] > 0)
            tu, tv = np.where(flip, v, u), np.where(flip, u, v)
            want[tu, tv] = True
            sgn[tu, tv] = NEG
        if g.directed:
            u, v = ends(g.directed)
            want[u, v] = True
            sgn[u, v] = POS
    elif g.polarity:
        pol = g.polarity
        u, v = ends(pol.keys())
        want[u, v] = True
        sgn[u, v] = np.fromiter(pol.values(), dtype=np.int8, count=len(pol))
    walk = (neg + pos) > 0
    if (walk & ~want).any():
        return False
    hit = np.where(sgn == NEG, neg, pos) > 0
    return bool((hit | ~want).all())


def realized_polarization(r: Prn, d: Diagram, table=None):
    """Orient each undirected edge of ``d`` along the NEG walk that realizes
    it in ``r`` (low-to-high when no walk exists)."""
    table = walk_table(r) if table is None else table
    pol = {}
    for u, v in d.undirected:
        if table.get(v, {}).get((u, NEG), 0) and not table.get(u, {}).get((v, NEG), 0):
            pol[(v, u)] = NEG
        else:
            pol[(u, v)] = NEG
    for e in d.directed:
        pol[e] = POS
    return PolarizedDiagram(frozenset(d.vertices), pol)


def check_realizes(r: Prn, g):
    """None if ``r`` realizes ``g``, else a :class:`Counterexample`.

    ``g`` may be a PolarizedDiagram, or a Diagram in which case undirected
    edges may be realized in either direction.
    """
    if _fast_realizes_ok(r, g):
        return None
    table = walk_table(r)
    if isinstance(g, Diagram):
        g = realized_polarization(r, g, table)
    if set(r.base) != set(g.vertices):
        raise ValueError("PRN base and diagram vertices differ")
    gp = g.polarity
    for u in sorted(r.base):
        cnt = table[u]
        for (v, s) in sorted(cnt):
            if v == u:
                return Counterexample((u, u), "self-walk")
            if (u, v) not in gp:
                return Counterexample((u, v), "spurious walk")
    for (u, v), p in sorted(gp.items()):
        cnt = table[u]
        if cnt.get((v, p), 0) == 0:
            kind = "wrong sign" if cnt.get((v, -p), 0) else "missing walk"
            return Counterexample((u, v), kind)
    return None


def check_strict(r: Prn):
    """None if ``r`` is strict, else a :class:`StrictnessWitness`."""
    if _fast_strict_ok(r):
        return None
    memo = _aux_counts(r)
    totals = defaultdict(int)
    for u in sorted(r.base):
        for (v, _s), k in _base_counts(r, memo, u).items():
            totals[(min(u, v), max(u, v))] += k
    for (u, v), k in sorted(totals.items()):
        if k > 1:
            ws = [w for w in valid_walks_from(r, u) if w.vertices[-1] == v]
            if u != v:
                ws += [w for w in valid_walks_from(r, v) if w.vertices[-1] == u]
            return StrictnessWitness((u, v), tuple(ws[:2]))
    reached = set()
    frontier = [w for u in r.base for w in r.succ(u) if w in r.aux]
    while frontier:
        a = frontier.pop()
        if a in reached:
            continue
        reached.add(a)
        frontier.extend(w for w in r.succ(a) if w in r.aux and w not in reached)
    for a in sorted(r.aux):
        if a not in reached or not memo[a]:
            return StrictnessWitness(None, (), a)
    return None


def reduce_biclique(r: Prn, X, Y) -> Prn:
    """Replace the complete X x Y edge set by a fresh aux hub."""
    X, Y = frozenset(X), frozenset(Y)
    if not X or not Y:
        raise NotCoherentBiclique("X and Y must be nonempty")
    if X & Y:
        raise NotCoherentBiclique(f"X and Y overlap on {sorted(X & Y)}")
    verts = r.vertices()
    if not (X | Y) <= verts:
        raise NotCoherentBiclique(f"unknown vertices {sorted((X | Y) - verts)}")
    e = r._edges
    for y in sorted(Y):
        pols = set()
        for x in sorted(X):
            if (x, y) not in e:
                raise NotCoherentBiclique(f"edge {(x, y)} missing")
            pols.add(e[(x, y)])
        if len(pols) > 1:
            raise NotCoherentBiclique(f"incoming polarities into {y} disagree")
    z = r.max_id() + 1
    new = dict(e)
    for y in Y:
        p = e[(min(X), y)]
        for x in X:
            del new[(x, y)]
        new[(z, y)] = p
    for x in X:
        new[(x, z)] = None
    return Prn(r.base, r.aux | {z}, new, check=False)


def contract_unit_degree(r: Prn) -> Prn:
    """Contract aux vertices of in-degree 1 or out-degree 1 to a fixpoint.

    A contraction that would create a loop or a parallel edge is skipped;
    that only happens on inputs that are not strict.
    """
    e = dict(r._edges)
    succ, pred = defaultdict(set), defaultdict(set)
    for u, v in e:
        succ[u].add(v)
        pred[v].add(u)
    aux = set(r.aux)
    work = sorted(aux)
    while work:
        y = work.pop()
        if y not in aux:
            continue
        ins, outs = pred[y], succ[y]
        if not ins or not outs:
            continue
        if len(ins) == 1:
            (yp,) = ins
            if any(z == yp or (yp, z) in e for z in outs):
                continue
            for z in outs:
                e[(yp, z)] = e.pop((y, z))
                succ[yp].add(z)
                pred[z].discard(y)
                pred[z].add(yp)
            del e[(yp, y)]
            succ[yp].discard(y)
            touched = set(outs) | {yp}
        elif len(outs) == 1:
            (yp,) = outs
            p = e[(y, yp)]
            if any(z == yp or (z, yp) in e for z in ins):
                continue
            for z in ins:
                del e[(z, y)]
                e[(z, yp)] = p
                pred[yp].add(z)
                succ[z].discard(y)
                succ[z].add(yp)
            del e[(y, yp)]
            pred[yp].discard(y)
            touched = set(ins) | {yp}
        else:
            continue
        aux.discard(y)
        succ.pop(y, None)
        pred.pop(y, None)
        work.extend(sorted(t for t in touched if t in aux))
    return Prn(r.base, aux, e, check=False)


def to_dot(r: Prn) -> str:
    """Human-readable DOT-like dump; not a stable format."""
    lines = ["digraph prn {"]
    for v in sorted(r.base):
        lines.append(f"  x{v} [shape=box];")
    for v in sorted(r.aux):
        lines.append(f"  y{v} [shape=circle];")
    name = lambda v: f"x{v}" if v in r.base else f"y{v}"
    for (u, v), p in sorted(r._edges.items()):
        lab = "" if p is None else f' [label="{"-" if p == NEG else "+"}"]'
        lines.append(f"  {name(u)} -> {name(v)}{lab};")
    lines.append("}")
    return "\n".join(lines)

"""Greedy bounded variable addition.

``apply_bva_step`` is the raw formula-level replacement of a clause grid
C x D by (C_i v y) and (-y v D_j). ``heuristic_step`` picks a profitable
biclique greedily; ``run_heuristic`` repeats it and returns the final PRN.

Neighborhoods are literal sets: for a variable v, N(v) holds every literal
l with (-v v l) in the current formula, except that a clause between an
aux vertex and a base vertex is only listed from the side that owns the
PRN edge (its tail).
"""
from __future__ import annotations

import random
import time
from collections import Counter, defaultdict
from dataclasses import dataclass

from .cnf_core import Formula, make_clause
from .construct import ReencodeReport
from .diagram import NEG, POS, Diagram, diagram_of, topo_order
from .errors import PatternMissing, TautologyError
from .sprn import Prn


@dataclass(frozen=True)
class Biclique:
    L: frozenset
    R: frozenset
    quality: int


def _as_clause(c):
    return (c,) if isinstance(c, int) else tuple(c)


def apply_bva_step(f: Formula, C, D, fresh: int | None = None) -> Formula:
    """Replace C x D by (C_i v y), (-y v D_j) for a fresh variable y.

    C and D are collections of clauses; a bare int stands for a unit clause.
    """
    C = [_as_clause(c) for c in C]
    D = [_as_clause(d) for d in D]
    if not C or not D:
        raise ValueError("C and D must be nonempty")
    grid, missing = set(), []
    for c in C:
        for d in D:
            try:
                cl = make_clause(c + d)
            except TautologyError:
                missing.append(c + d)
                continue
            if cl in f.clauses:
                grid.add(cl)
            else:
                missing.append(cl)
    if missing:
        raise PatternMissing(missing)
    y = f.num_vars + 1 if fresh is None else fresh
    if y in f.variables():
        raise ValueError(f"variable {y} is not fresh")
    out = set(f.clauses) - grid
    for c in C:
        out.add(make_clause(c + (y,)))
    for d in D:
        out.add(make_clause((-y,) + d))
    return Formula.from_canonical(frozenset(out), max(f.num_vars, y))


class _State:
    """Literal-neighborhood index over base and aux vertices.

    ``und`` holds base pairs whose all-negative clause has not been used by
    any step yet; such a clause appears in both endpoints' neighborhoods.
    """

    def __init__(self):
        self.nbr = defaultdict(set)
        self.rev = defaultdict(set)
        self.und = set()
        self.base = set()
        self.aux = []
        self.next_id = 1

    def add(self, v, lit):
        self.nbr[v].add(lit)
        self.rev[lit].add(v)

    def remove(self, v, lit):
        self.nbr[v].discard(lit)
        self.rev[lit].discard(v)

    @classmethod
    def from_diagram(cls, d: Diagram, next_id: int):
        st = cls()
        st.base = set(d.vertices)
        for v in d.vertices:
            st.nbr[v]
        for u, v in d.undirected:
            st.add(u, -v)
            st.add(v, -u)
            st.und.add((u, v))
        for u, v in d.directed:
            st.add(u, v)
        st.next_id = next_id
        return st

    @classmethod
    def from_prn(cls, r: Prn):
        st = cls()
        st.base = set(r.base)
        st.aux = sorted(r.aux)
        for v in r.vertices():
            st.nbr[v]
        for (u, v), p in r.edge_map().items():
            st.add(u, -v if p == NEG else v)
        st.next_id = r.max_id() + 1
        return st

    def apply(self, b: Biclique) -> int:
        z = self.next_id
        self.next_id += 1
        for v in b.L:
            for l in b.R:
                self.remove(v, l)
                if l < 0:
                    k = (min(v, -l), max(v, -l))
                    if k in self.und:
                        self.und.discard(k)
                        self.remove(-l, -v)
            self.add(v, z)
        for l in b.R:
            self.add(z, l)
        self.aux.append(z)
        return z

    def to_prn(self, order) -> Prn:
        pos = {v: i for i, v in enumerate(order)}
        edges = {}
        for v, lits in self.nbr.items():
            for l in lits:
                w = abs(l)
                if l < 0 and (min(v, w), max(v, w)) in self.und:
                    if pos[v] > pos[w]:
                        continue
                if w in self.base:
                    edges[(v, w)] = NEG if l < 0 else POS
                else:
                    edges[(v, w)] = None
        return Prn(self.base, self.aux, edges, check=False)


def _grow_biclique(st: _State, rng: random.Random):
    degs = {v: len(ls) for v, ls in st.nbr.items()}
    if not degs:
        return None
    top = max(degs.values())
    if top == 0:
        return None
    v = rng.choice(sorted(u for u, k in degs.items() if k == top))
    L = [v]
    Lset = {v}
    R = set(st.nbr[v])
    Q = -1
    while True:
        counts = Counter()
        for l in R:
            for w in st.rev[l]:
                if w not in Lset:
                    counts[w] += 1
        lp = len(L) + 1
        bestq, best = Q, []
        for w, c in counts.items():
            qw = lp * c - lp - c
            if qw > bestq:
                bestq, best = qw, [w]
            elif qw == bestq and best:
                best.append(w)
        if not best:
            break
        w = rng.choice(sorted(best))
        L.append(w)
        Lset.add(w)
        R &= st.nbr[w]
        Q = bestq
    if Q > 0:
        return Biclique(frozenset(L), frozenset(R), Q)
    return None


def heuristic_step(g: Diagram, seed=0):
    """One greedy biclique search on a diagram; None if nothing profitable."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    st = _State.from_diagram(g, max(g.vertices, default=0) + 1)
    return _grow_biclique(st, rng)


def _drive(st: _State, rng, max_steps=None):
    steps = 0
    while max_steps is None or steps < max_steps:
        b = _grow_biclique(st, rng)
        if b is None:
            break
        st.apply(b)
        steps += 1
    return steps


def run_heuristic(f: Formula, seed=0, first_aux: int | None = None):
    """Greedy BVA to a fixpoint on a simple formula. Returns (prn, report)."""
    t0 = time.perf_counter()
    d = diagram_of(f)
    order = topo_order(d)
    st = _State.from_diagram(d, first_aux or f.num_vars + 1)
    _drive(st, random.Random(seed))
    prn = st.to_prn(order)
    ms = (time.perf_counter() - t0) * 1000
    rep = ReencodeReport("heuristic", len(f), prn.num_edges(), len(prn.aux), ms, prn.num_edges(), None, f)
    return prn, rep


def improve_prn(r: Prn, seed=0) -> Prn:
    """Continue greedy steps on an existing PRN (every edge already oriented)."""
    st = _State.from_prn(r)
    _drive(st, random.Random(seed))
    return st.to_prn(sorted(r.vertices()))

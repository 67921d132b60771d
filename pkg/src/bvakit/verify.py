"""Independent checks for encodings: Davis-Putnam elimination of auxiliary
variables, an exhaustive truth-table comparison, and an audit combining both.
"""
from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .cnf_core import Formula, resolve, solve_2sat
from .errors import BlowupGuard, DomainError

ORIG_SAT_ENC_UNSAT = "OrigSatEncUnsat"
ORIG_UNSAT_ENC_SAT = "OrigUnsatEncSat"
DP_MISMATCH = "DpMismatch"

MAX_EXHAUSTIVE = 20


@dataclass(frozen=True)
class Verdict:
    ok: bool
    counterexample: dict | None = None
    detail: str | None = None
    extra: frozenset = frozenset()
    missing: frozenset = frozenset()
    dp_ok: bool | None = None
    truth_ok: bool | None = None

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {
            "ok": self.ok,
            "detail": self.detail,
            "counterexample": None if self.counterexample is None
            else {str(k): v for k, v in sorted(self.counterexample.items())},
            "extra": [list(c) for c in sorted(self.extra)][:50],
            "missing": [list(c) for c in sorted(self.missing)][:50],
            "dp_ok": self.dp_ok,
            "truth_ok": self.truth_ok,
        }


def elimination_order(f: Formula, aux) -> list:
    """Reverse topological order of the aux implication DAG: clause (-a v b)
    with a, b aux gives a -> b. Ascending id if the graph has a cycle."""
    aux = sorted(aux)
    aset = set(aux)
    succ = defaultdict(list)
    indeg = dict.fromkeys(aux, 0)
    for c in f.clauses:
        if len(c) != 2:
            continue
        a, b = c
        if abs(a) in aset and abs(b) in aset and (a < 0) != (b < 0):
            u, v = (-a, b) if a < 0 else (-b, a)
            succ[u].append(v)
            indeg[v] += 1
    heap = [v for v, k in indeg.items() if k == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(order) != len(aux):
        return aux
    return order[::-1]


def eliminate_auxiliaries(f: Formula, aux, cap: int = 10 ** 7, order=None) -> Formula:
    """Resolve away every auxiliary variable (Davis-Putnam)."""
    present = f.variables()
    aux = [a for a in aux if a in present]
    if not aux:
        return f
    if order is None:
        order = elimination_order(f, aux)
    clauses = set(f.clauses)
    occ = defaultdict(set)
    aset = set(aux)
    for c in clauses:
        for l in c:
            if abs(l) in aset:
                occ[l].add(c)
    for v in order:
        pos, neg = occ.pop(v, set()), occ.pop(-v, set())
        for c in pos | neg:
            clauses.discard(c)
            for l in c:
                if abs(l) != v and abs(l) in aset:
                    occ[l].discard(c)
        for c in pos:
            for d in neg:
                r = resolve(c, d, v)
                if r is None or r in clauses:
                    continue
                clauses.add(r)
                for l in r:
                    if abs(l) in aset:
                        occ[l].add(r)
            if len(clauses) > cap:
                raise BlowupGuard(f"clause count exceeded {cap} while eliminating {v}")
    return Formula.from_canonical(frozenset(clauses), f.num_vars)


# ---------------------------------------------------------------- truth table

def _dpll(clauses) -> bool:
    """Unit propagation plus branching on small clause lists."""
    clauses = [frozenset(c) for c in clauses]
    while True:
        if any(not c for c in clauses):
            return False
        unit = next((c for c in clauses if len(c) == 1), None)
        if unit is None:
            break
        (l,) = unit
        clauses = [c - {-l} for c in clauses if l not in c]
    if not clauses:
        return True
    l = min(clauses[0], key=abs)
    for choice in (l, -l):
        if _dpll([c - {-choice} for c in clauses if choice not in c]):
            return True
    return False


def _sat_2cnf(clauses) -> bool:
    """Unit propagation over the implication lists; the untouched residue is
    decided directly when Horn or dual-Horn, else by SCC."""
    imp = defaultdict(list)
    todo = []
    for c in clauses:
        if not c:
            return False
        if len(c) == 1:
            todo.append(c[0])
        else:
            a, b = c
            imp[-a].append(b)
            imp[-b].append(a)
    true = set()
    while todo:
        l = todo.pop()
        if l in true:
            continue
        if -l in true:
            return False
        true.add(l)
        todo.extend(imp[l])
    done = {abs(l) for l in true}
    rest = [c for c in clauses if len(c) == 2 and abs(c[0]) not in done and abs(c[1]) not in done]
    if all(c[0] < 0 or c[1] < 0 for c in rest) or all(c[0] > 0 or c[1] > 0 for c in rest):
        return True
    return solve_2sat(Formula.from_canonical(frozenset(rest))).satisfiable


def _sat_small(clauses) -> bool:
    if all(len(c) <= 2 for c in clauses):
        return _sat_2cnf(clauses)
    return _dpll(clauses)


def _assignments(nb):
    idx = np.arange(1 << nb, dtype=np.int64)
    return ((idx[:, None] >> np.arange(nb)) & 1).astype(bool)


def _lit_column(T, col, l):
    x = T[:, col[abs(l)]]
    return x if l > 0 else ~x


def check_encoding(orig: Formula, enc: Formula, base_vars) -> Verdict:
    """For every assignment of the base variables compare SAT(orig|t) and
    SAT(enc|t). Satisfiability of enc|t is decided once per distinct
    restricted formula."""
    base = sorted(set(base_vars))
    if len(base) > MAX_EXHAUSTIVE:
        raise DomainError(f"{len(base)} base variables exceed the exhaustive limit {MAX_EXHAUSTIVE}")
    col = {v: i for i, v in enumerate(base)}
    bset = set(base)
    for c in orig.clauses:
        for l in c:
            if abs(l) not in bset:
                raise DomainError(f"original formula mentions non-base variable {abs(l)}")
    T = _assignments(len(base))
    rows = T.shape[0]

    def clause_true(c):
        out = np.zeros(rows, dtype=bool)
        for l in c:
            out |= _lit_column(T, col, l)
        return out

    orig_ok = np.ones(rows, dtype=bool)
    for c in orig.clauses:
        orig_ok &= clause_true(c)

    enc_base_ok = np.ones(rows, dtype=bool)
    by_aux_part = defaultdict(lambda: np.zeros(rows, dtype=bool))
    for c in enc.clauses:
        bpart = tuple(l for l in c if abs(l) in bset)
        apart = tuple(l for l in c if abs(l) not in bset)
        if not apart:
            enc_base_ok &= clause_true(c)
        else:
            active = ~clause_true(bpart) if bpart else np.ones(rows, dtype=bool)
            by_aux_part[apart] |= active
    enc_ok = enc_base_ok.copy()
    if by_aux_part:
        parts = list(by_aux_part)
        M = np.stack([by_aux_part[p] for p in parts], axis=1)
        live = np.flatnonzero(enc_base_ok)
        if len(live):
            packed = np.packbits(M[live], axis=1)
            keys, inv = np.unique(packed, axis=0, return_inverse=True)
            inv = inv.reshape(-1)
            sat_of = np.zeros(len(keys), dtype=bool)
            for i, key in enumerate(keys):
                bits = np.unpackbits(key)[:len(parts)]
                sat_of[i] = _sat_small([parts[j] for j in np.flatnonzero(bits)])
            enc_ok[live] = sat_of[inv]

    bad = np.flatnonzero(orig_ok != enc_ok)
    if len(bad) == 0:
        return Verdict(True, truth_ok=True)
    i = int(bad[0])
    tau = {v: bool(T[i, col[v]]) for v in base}
    kind = ORIG_SAT_ENC_UNSAT if orig_ok[i] else ORIG_UNSAT_ENC_SAT
    return Verdict(False, tau, kind, truth_ok=False)


def audit(orig: Formula, enc: Formula, aux, reference: Formula | None = None) -> Verdict:
    """DP recovery (exact clause-set equality with ``reference``, default
    ``orig``) plus the exhaustive check when there are at most 20 base
    variables."""
    aux = frozenset(aux)
    target = orig if reference is None else reference
    rec = eliminate_auxiliaries(enc, aux)
    extra = rec.clauses - target.clauses
    missing = target.clauses - rec.clauses
    dp_ok = not extra and not missing
    base = orig.variables() | (enc.variables() - aux)
    truth = None
    if len(base) <= MAX_EXHAUSTIVE:
        truth = check_encoding(orig, enc, base)
    ok = dp_ok and (truth is None or truth.ok)
    if not dp_ok:
        return Verdict(False, None if truth is None else truth.counterexample, DP_MISMATCH,
                       frozenset(extra), frozenset(missing), False,
                       None if truth is None else truth.ok)
    if truth is not None and not truth.ok:
        return Verdict(False, truth.counterexample, truth.detail, dp_ok=True, truth_ok=False)
    return Verdict(ok, dp_ok=True, truth_ok=None if truth is None else True)

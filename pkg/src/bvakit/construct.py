"""Explicit encoders: Nechiporuk-style block/part constructions, the general
four-way split, at-most-one ladder and product encodings, and the best-of
wrapper that runs simplification and construction end to end.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cnf_core import Formula, binary_array, require_width
from .diagram import NEG, POS, Diagram, PolarizedDiagram, polarized_topo_order
from .errors import DomainError, MixedEdgesError
from .simplify import reassemble, simplify_to_simple
from .sprn import Prn


@dataclass(frozen=True)
class NechiporukParams:
    n: int
    q: int
    r: int


@dataclass
class ReencodeReport:
    method: str
    input_clauses: int
    output_clauses: int
    aux_added: int
    wall_ms: float
    candidate_clauses: int | None = None
    params: NechiporukParams | None = None
    # aux-free formula that eliminating the output's aux recovers exactly
    reference: Formula | None = field(default=None, repr=False)


# ---------------------------------------------------------------- parameters

def _clamp(x, n):
    return max(1, min(int(x), max(n, 1)))


def nechiporuk_params(n: int, variant: str = "simple") -> NechiporukParams:
    """Block size q and part size r from the asymptotic formulas, clamped."""
    base = 3.0 if variant == "simple" else 2.0
    if n < 2:
        return NechiporukParams(n, 1, 1)
    L = math.log(n, base)
    q = n / (L * L)
    r = L - 3 * math.log(L, base) if L > 1 else 1
    return NechiporukParams(n, _clamp(math.floor(q + 1e-9), n), _clamp(math.floor(r + 1e-9), n))


def predict_edges(n: int, p_neg: float, p_pos: float, q: int, r: int) -> float:
    """Expected output size of the construction on a random diagram where a
    forward vertex pair carries a NEG edge with probability p_neg and a POS
    edge with probability p_pos."""
    p0 = max(0.0, 1.0 - p_neg - p_pos)
    nparts = -(-n // r)
    e = np.arange(nparts, dtype=float) * r
    total = nparts * r * (r - 1) / 2 * (p_neg + p_pos)
    nb_sum = float((e / q).sum())
    pair_uses = 0.0
    for a in range(r + 1):
        for b in range(r + 1 - a):
            if a + b == 0:
                continue
            P = (p_neg ** a) * (p_pos ** b) * (p0 ** (r - a - b))
            if P <= 0:
                continue
            mult = math.comb(r, a) * math.comb(r - a, b)
            total += mult * (a + b) * float((1 - (1 - P) ** e).sum())
            podd = (1 - (1 - 2 * P) ** q) / 2
            total += mult * nb_sum * (q * P / 2 + podd / 2)
            pair_uses += mult * nb_sum * (q * P / 2 - podd / 2)
    pairs = q * (q - 1) / 2
    if pairs > 0:
        nblocks = max(n / q, 1.0)
        distinct = pairs * (1 - math.exp(-(pair_uses / nblocks) / pairs))
        total += 2 * nblocks * distinct
    return total


def tuned_params(n: int, m_neg: int, m_pos: int = 0) -> NechiporukParams:
    """Parameters minimizing :func:`predict_edges` for the observed density."""
    if n < 4:
        return NechiporukParams(n, 1, 1)
    pairs = n * (n - 1) / 2
    pn, pp = m_neg / pairs, m_pos / pairs
    rmax = max(1, min(14, int(math.log2(n))))
    qs = sorted({max(1, min(n, round(1.2 ** k))) for k in range(0, 60)})
    best = None
    for r in range(1, rmax + 1):
        for q in qs:
            c = predict_edges(n, pn, pp, q, r)
            if best is None or c < best[0] - 1e-9:
                best = (c, q, r)
    return NechiporukParams(n, best[1], best[2])


def _resolve_params(params, n, m_neg, m_pos, variant):
    if params is None or params == "tuned":
        return tuned_params(n, m_neg, m_pos)
    if params == "formula":
        return nechiporuk_params(n, variant)
    if isinstance(params, NechiporukParams):
        return NechiporukParams(n, _clamp(params.q, n), _clamp(params.r, n))
    q, r = params
    return NechiporukParams(n, _clamp(q, n), _clamp(r, n))


# ---------------------------------------------------------------- engine

@dataclass
class _EdgeArrays:
    tails: np.ndarray
    heads: np.ndarray
    pols: np.ndarray   # NEG/POS for base heads, 0 for aux heads
    num_aux: int

    def __len__(self):
        return len(self.tails)


def _engine(order, tails, heads, pols, q, r, first_aux) -> _EdgeArrays:
    """Block/part construction over vertices listed in ``order``.

    Every edge must go forward in ``order``. Within a part, edges are copied.
    Across parts, each earlier vertex u gets a signature on the later part
    (which vertices it hits, with which polarity); one aux hub per realized
    (part, signature) fans out to the part, and the members sharing a
    signature are paired inside their block through shared pair vertices.
    """
    n = len(order)
    tails = np.asarray(tails, dtype=np.int64)
    heads = np.asarray(heads, dtype=np.int64)
    pols = np.asarray(pols, dtype=np.int64)
    if n == 0 or len(tails) == 0:
        return _EdgeArrays(tails, heads, pols, 0)
    order_arr = np.asarray(order, dtype=np.int64)
    pos_of = np.full(int(order_arr.max()) + 1, -1, dtype=np.int64)
    pos_of[order_arr] = np.arange(n)
    pu, pv = pos_of[tails], pos_of[heads]
    if np.any(pu < 0) or np.any(pv < 0):
        raise ValueError("edge endpoint missing from order")
    if np.any(pu >= pv):
        raise ValueError("edge runs against the vertex order")
    nparts = -(-n // r)
    within = (pu // r) == (pv // r)
    out_t = [tails[within]]
    out_h = [heads[within]]
    out_p = [pols[within]]

    cu, cv, cp = pu[~within], pv[~within], pols[~within]
    if len(cu):
        k = cv % r
        code = np.where(cp < 0, np.left_shift(1, k), np.left_shift(1, k + r)).astype(np.int64)
        key = cu * nparts + cv // r
        srt = np.argsort(key, kind="stable")
        key_s = key[srt]
        starts = np.flatnonzero(np.r_[True, key_s[1:] != key_s[:-1]])
        sig = np.add.reduceat(code[srt], starts)
        ukey = key_s[starts]
        upos = ukey // nparts
        upart = ukey % nparts
        uid = order_arr[upos]
        ublock = upos // q
        g = np.lexsort((uid, ublock, sig, upart))
        upart, sig, ublock, uid = upart[g], sig[g], ublock[g], uid[g]
        m = len(uid)
        newgrp = np.r_[True, (upart[1:] != upart[:-1]) | (sig[1:] != sig[:-1]) | (ublock[1:] != ublock[:-1])]
        newy = np.r_[True, (upart[1:] != upart[:-1]) | (sig[1:] != sig[:-1])]
        yidx = np.cumsum(newy) - 1
        ny = int(yidx[-1]) + 1
        gstart = np.maximum.accumulate(np.where(newgrp, np.arange(m), 0))
        rank = np.arange(m) - gstart
        gend = np.r_[np.flatnonzero(newgrp)[1:], m]
        gsize_at = np.repeat(gend - np.flatnonzero(newgrp), gend - np.flatnonzero(newgrp))
        first = (rank % 2 == 0) & (rank + 1 < gsize_at)
        leftover = (rank % 2 == 0) & (rank + 1 == gsize_at)

        yid = first_aux + yidx
        ia = np.flatnonzero(first)
        a, b = uid[ia], uid[ia + 1]
        span = int(order_arr.max()) + 1
        pcode = a * span + b
        uniq, fidx, inv = np.unique(pcode, return_index=True, return_inverse=True)
        rank_first = np.empty(len(uniq), dtype=np.int64)
        rank_first[np.argsort(fidx, kind="stable")] = np.arange(len(uniq))
        zid = first_aux + ny + rank_first[inv]
        nz = len(uniq)
        za = uniq // span
        zb = uniq % span
        zids = first_aux + ny + rank_first
        zero = lambda x: np.zeros(len(x), dtype=np.int64)
        out_t += [za, zb, zid, uid[leftover]]
        out_h += [zids, zids, yid[ia], yid[leftover]]
        out_p += [zero(za), zero(zb), zero(zid), zero(uid[leftover])]

        ysel = np.flatnonzero(newy)
        ysig, ypart, yids = sig[ysel], upart[ysel], first_aux + yidx[ysel]
        for kk in range(r):
            vpos = ypart * r + kk
            ok = vpos < n
            for shift, p in ((kk, NEG), (kk + r, POS)):
                hit = ok & (((ysig >> shift) & 1) == 1)
                out_t.append(yids[hit])
                out_h.append(order_arr[vpos[hit]])
                out_p.append(np.full(int(hit.sum()), p, dtype=np.int64))
        num_aux = ny + nz
    else:
        num_aux = 0
    return _EdgeArrays(np.concatenate(out_t), np.concatenate(out_h),
                       np.concatenate(out_p), num_aux)


def _arrays_to_prn(ea: _EdgeArrays, base, first_aux) -> Prn:
    aux = range(first_aux, first_aux + ea.num_aux)
    pl = [None if p == 0 else p for p in ea.pols.tolist()]
    edges = dict(zip(zip(ea.tails.tolist(), ea.heads.tolist()), pl))
    return Prn(base, aux, edges, check=False)


def _arrays_to_clauses(ea: _EdgeArrays, flip_upto: int = 0):
    """Clause literals for each edge; base ids <= flip_upto get negated."""
    a = -ea.tails
    b = np.where(ea.pols < 0, -ea.heads, ea.heads)
    if flip_upto:
        a = np.where(np.abs(a) <= flip_upto, -a, a)
        b = np.where(np.abs(b) <= flip_upto, -b, b)
    sw = np.abs(a) > np.abs(b)
    return np.where(sw, b, a), np.where(sw, a, b)


def _clauses_to_formula(la, lb, num_vars) -> Formula:
    return Formula.from_canonical(frozenset(zip(la.tolist(), lb.tolist())), num_vars)


# ---------------------------------------------------------------- public constructors

def _polarized_arrays(g: PolarizedDiagram):
    items = list(g.polarity.items())
    t = np.fromiter((e[0][0] for e in items), dtype=np.int64, count=len(items))
    h = np.fromiter((e[0][1] for e in items), dtype=np.int64, count=len(items))
    p = np.fromiter((e[1] for e in items), dtype=np.int64, count=len(items))
    return t, h, p


def nechiporuk_simple(g: PolarizedDiagram, params=None, first_aux: int | None = None) -> Prn:
    """SPRN realizing a polarized diagram with three-valued signatures.

    ``params``: None/"tuned" picks q, r from a cost model, "formula" uses
    :func:`nechiporuk_params`, or pass a NechiporukParams / (q, r) tuple.
    """
    order = polarized_topo_order(g)
    t, h, p = _polarized_arrays(g)
    n = len(order)
    prm = _resolve_params(params, n, int((p < 0).sum()), int((p > 0).sum()), "simple")
    if first_aux is None:
        first_aux = max(g.vertices, default=0) + 1
    ea = _engine(order, t, h, p, prm.q, prm.r, first_aux)
    return _arrays_to_prn(ea, g.vertices, first_aux)


def nechiporuk_monotone(g: Diagram, params=None, first_aux: int | None = None) -> Prn:
    """SPRN realizing an all-undirected diagram (every walk sign NEG)."""
    if g.directed:
        raise MixedEdgesError(f"{len(g.directed)} directed edges in a monotone diagram")
    order = sorted(g.vertices)
    und = sorted(g.undirected)
    t = np.array([e[0] for e in und], dtype=np.int64)
    h = np.array([e[1] for e in und], dtype=np.int64)
    p = np.full(len(und), NEG, dtype=np.int64)
    prm = _resolve_params(params, len(order), len(und), 0, "monotone")
    if first_aux is None:
        first_aux = max(g.vertices, default=0) + 1
    ea = _engine(order, t, h, p, prm.q, prm.r, first_aux)
    return _arrays_to_prn(ea, g.vertices, first_aux)


def monotone_reencode(f: Formula, params=None, first_aux: int | None = None):
    """Fast path for an all-negative 2-CNF: returns (formula, aux, params)."""
    arr = binary_array(f)
    if len(arr) and not np.all(arr < 0):
        raise MixedEdgesError("formula has a clause that is not all-negative")
    t, h = -arr[:, 0], -arr[:, 1]
    verts = np.unique(np.concatenate([t, h]))
    prm = _resolve_params(params, len(verts), len(arr), 0, "monotone")
    if first_aux is None:
        first_aux = f.num_vars + 1
    ea = _engine(verts, t, h, np.full(len(t), NEG, dtype=np.int64), prm.q, prm.r, first_aux)
    la, lb = _arrays_to_clauses(ea)
    out = _clauses_to_formula(la, lb, max(f.num_vars, first_aux + ea.num_aux - 1))
    return out, frozenset(range(first_aux, first_aux + ea.num_aux)), prm


def reencode_general(f: Formula, params=None):
    """Split a 2-CNF formula by polarity pattern and reencode each part.

    Parts whose construction is not smaller than the part are kept as is.
    Returns ``(formula, aux)``.
    """
    require_width(f, 2, exact=True)
    n = f.num_vars
    arr = binary_array(f)
    a, b = arr[:, 0], arr[:, 1]
    # canonical clauses have |a| < |b|
    parts = [
        ((a < 0) & (b < 0), NEG, False),
        ((a > 0) & (b > 0), NEG, True),
        ((a < 0) & (b > 0), POS, False),
        ((a > 0) & (b < 0), POS, True),
    ]
    out = set()
    aux = set()
    next_aux = n + 1
    for mask, pol, flip in parts:
        if not mask.any():
            continue
        t, h = np.abs(a[mask]), np.abs(b[mask])
        part_clauses = list(zip(a[mask].tolist(), b[mask].tolist()))
        verts = np.unique(np.concatenate([t, h]))
        prm = _resolve_params(params, len(verts), len(t) if pol == NEG else 0,
                              len(t) if pol == POS else 0, "monotone")
        ea = _engine(verts, t, h, np.full(len(t), pol, dtype=np.int64), prm.q, prm.r, next_aux)
        if len(ea) < len(part_clauses):
            la, lb = _arrays_to_clauses(ea, n if flip else 0)
            out.update(zip(la.tolist(), lb.tolist()))
            aux.update(range(next_aux, next_aux + ea.num_aux))
            next_aux += ea.num_aux
        else:
            out.update(part_clauses)
    return Formula.from_canonical(frozenset(out), max(n, next_aux - 1)), frozenset(aux)


# ---------------------------------------------------------------- best-of pipeline

def _core_arrays(core: Formula):
    arr = binary_array(core)
    a, b = arr[:, 0], arr[:, 1]
    und = (a < 0) & (b < 0)
    # Horn clauses (-u v w): edge u -> w
    t = np.where(und, -a, np.where(a < 0, -a, -b))
    h = np.where(und, -b, np.where(a < 0, b, a))
    return t, h, und


def _min_id_topo(verts, t, h):
    import heapq
    succ = {}
    indeg = dict.fromkeys(verts, 0)
    for u, v in zip(t.tolist(), h.tolist()):
        succ.setdefault(u, []).append(v)
        indeg[v] += 1
    heap = [v for v, k in indeg.items() if k == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in succ.get(u, ()):
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(order) != len(verts):
        raise ValueError("directed part of the core is cyclic")
    return order


def construct_core(core: Formula, params=None, first_aux: int | None = None):
    """Polarize a simple core along its topological order and run the
    three-valued construction. Returns ``(formula, aux, params)``."""
    if first_aux is None:
        first_aux = core.num_vars + 1
    if not core.clauses:
        return core, frozenset(), None
    t, h, und = _core_arrays(core)
    verts = sorted(set(np.unique(np.concatenate([t, h])).tolist()))
    if und.all():
        order = verts
    else:
        order = _min_id_topo(verts, t[~und], h[~und])
    pos = np.empty(max(verts) + 1, dtype=np.int64)
    pos[np.asarray(order)] = np.arange(len(order))
    back = und & (pos[t] > pos[h])
    t, h = np.where(back, h, t), np.where(back, t, h)
    p = np.where(und, NEG, POS)
    prm = _resolve_params(params, len(order), int(und.sum()), int((~und).sum()), "simple")
    ea = _engine(order, t, h, p, prm.q, prm.r, first_aux)
    la, lb = _arrays_to_clauses(ea)
    out = _clauses_to_formula(la, lb, max(core.num_vars, first_aux + ea.num_aux - 1))
    return out, frozenset(range(first_aux, first_aux + ea.num_aux)), prm


def auto_reencode(f: Formula, params=None):
    """Simplify, construct on the core, reassemble, keep the smaller of that
    and the input. Returns ``(formula, aux, report)``."""
    t0 = time.perf_counter()
    require_width(f, 2, exact=True)
    s = simplify_to_simple(f)
    if s.unsat:
        out, aux = reassemble(s.core, s, frozenset())
        ms = (time.perf_counter() - t0) * 1000
        return out, aux, ReencodeReport("unsat", len(f), len(out), 0, ms, len(out), None, out)
    enc, enc_aux, prm = construct_core(s.core, params, f.num_vars + 1)
    cand, cand_aux = reassemble(enc, s, enc_aux)
    if len(cand) < len(f):
        ref, _ = reassemble(s.core, s, frozenset())
        out, aux, method = cand, cand_aux, "nechiporuk"
    else:
        out, aux, method, ref = f, frozenset(), "passthrough", f
    ms = (time.perf_counter() - t0) * 1000
    return out, aux, ReencodeReport(method, len(f), len(out), len(aux), ms, len(cand), prm, ref)


# ---------------------------------------------------------------- at-most-one

def amo_direct(n: int, first: int = 1) -> Formula:
    xs = range(first, first + n)
    return Formula.from_canonical(
        frozenset((-i, -j) for i in xs for j in xs if i < j), first + n - 1 if n else 0)


def amo_ladder(n: int) -> Prn:
    """3n-6 edge SPRN realizing the polarized complete graph on x1..xn."""
    if n < 3:
        raise DomainError(f"ladder needs n >= 3, got {n}")
    base = range(1, n + 1)
    e = {}
    if n <= 4:
        for i in base:
            for j in base:
                if i < j:
                    e[(i, j)] = NEG
        return Prn(base, (), e)
    k = (n - 3) // 2
    ys = [n + 1 + i for i in range(k)]
    groups = [[1, 2, 3]]
    nxt = 4
    for _ in range(k - 1):
        groups.append([nxt, nxt + 1])
        nxt += 2
    groups.append(list(range(nxt, n + 1)))   # 3 members if n even, 2 if odd
    for gi, grp in enumerate(groups):
        for a in grp:
            for b in grp:
                if a < b:
                    e[(a, b)] = NEG
        if gi > 0:
            for x in grp:
                e[(ys[gi - 1], x)] = NEG
        if gi < k:
            for x in grp:
                e[(x, ys[gi])] = None
            if gi > 0:
                e[(ys[gi - 1], ys[gi])] = None
    return Prn(base, ys, e)


def amo_product(n: int):
    """Grid encoding with row and column selectors and direct sub-constraints.
    Returns ``(formula, aux)``."""
    if n < 2:
        raise DomainError(f"product encoding needs n >= 2, got {n}")
    if n == 2:
        return amo_direct(2), frozenset()
    rows = math.isqrt(n)
    if rows * rows < n:
        rows += 1
    cols = -(-n // rows)
    nrows = -(-n // cols)
    rsel = [n + 1 + i for i in range(nrows)]
    csel = [n + 1 + nrows + j for j in range(cols)]
    out = set()
    for k in range(n):
        x = k + 1
        out.add((-x, rsel[k // cols]))
        out.add((-x, csel[k % cols]))
    for sel in (rsel, csel):
        for i in range(len(sel)):
            for j in range(i + 1, len(sel)):
                out.add((-sel[i], -sel[j]))
    return Formula.from_canonical(frozenset(out), n + nrows + cols), frozenset(rsel + csel)

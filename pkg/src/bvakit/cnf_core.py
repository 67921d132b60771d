"""Clauses, formulas, DIMACS I/O, restriction, unit propagation, 2-SAT and
Davis-Putnam variable elimination.

Literals are nonzero signed ints (DIMACS convention): ``v`` is the positive
literal of variable ``v`` and ``-v`` its complement. A clause is a tuple of
literals sorted by variable id with no repeated or complementary literals.
A :class:`Formula` is a frozenset of such clauses plus a variable count.
"""
from __future__ import annotations

import io
import itertools
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import Conflict, ParseError, TautologyError, WidthError

Clause = tuple


def var(lit: int) -> int:
    return lit if lit > 0 else -lit


def make_clause(lits: Iterable[int]) -> tuple:
    """Canonical clause: deduplicated, sorted by variable, tautologies rejected."""
    s = set(lits)
    for l in s:
        if l == 0:
            raise ValueError("0 is not a literal")
        if -l in s:
            raise TautologyError(sorted(s, key=abs))
    return tuple(sorted(s, key=abs))


class Formula:
    """Immutable set of clauses.

    ``num_vars`` is at least the largest variable mentioned and may be larger
    (DIMACS headers can declare unused variables). Equality and hashing look
    at the clause set only.
    """

    __slots__ = ("clauses", "num_vars", "_memo")

    def __init__(self, clauses: Iterable[Iterable[int]] = (), num_vars: int = 0):
        cs = frozenset(make_clause(c) for c in clauses)
        top = max(map(abs, itertools.chain.from_iterable(cs)), default=0)
        object.__setattr__(self, "clauses", cs)
        object.__setattr__(self, "num_vars", max(int(num_vars), top))
        object.__setattr__(self, "_memo", {})

    @classmethod
    def from_canonical(cls, clauses, num_vars: int | None = None) -> "Formula":
        """Wrap clauses that are already canonical tuples (no validation)."""
        f = cls.__new__(cls)
        cs = clauses if isinstance(clauses, frozenset) else frozenset(clauses)
        if num_vars is None:
            num_vars = max(map(abs, itertools.chain.from_iterable(cs)), default=0)
        object.__setattr__(f, "clauses", cs)
        object.__setattr__(f, "num_vars", int(num_vars))
        object.__setattr__(f, "_memo", {})
        return f

    def _cached(self, key, make):
        # clauses never change, so derived data can be kept
        if key not in self._memo:
            self._memo[key] = make()
        return self._memo[key]

    def width_range(self) -> tuple:
        """(min, max) clause width; (0, 0) for the empty formula."""
        def make():
            ws = set(map(len, self.clauses))
            return (min(ws), max(ws)) if ws else (0, 0)
        return self._cached("widths", make)

    def __setattr__(self, name, value):
        raise AttributeError("Formula is immutable")

    def __len__(self):
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)

    def __contains__(self, clause):
        try:
            return make_clause(clause) in self.clauses
        except (TautologyError, ValueError):
            return False

    def __eq__(self, other):
        if not isinstance(other, Formula):
            return NotImplemented
        return self.clauses == other.clauses

    def __hash__(self):
        return hash(self.clauses)

    def __repr__(self):
        body = sorted(self.clauses)
        shown = ", ".join(str(list(c)) for c in body[:6])
        more = ", ..." if len(body) > 6 else ""
        return f"Formula(num_vars={self.num_vars}, [{shown}{more}])"

    def __or__(self, other: "Formula") -> "Formula":
        return Formula.from_canonical(self.clauses | other.clauses,
                                      max(self.num_vars, other.num_vars))

    def variables(self) -> frozenset:
        return self._cached("vars", lambda: frozenset(
            map(abs, itertools.chain.from_iterable(self.clauses))))

    def sorted_clauses(self) -> list:
        return sorted(self.clauses)

    def max_width(self) -> int:
        return self.width_range()[1]

    def is_2cnf(self) -> bool:
        return not self.clauses or self.width_range() == (2, 2)

    def evaluate(self, tau: Mapping[int, bool]) -> bool:
        """Truth value under a total assignment of the formula's variables."""
        return all(any(tau[abs(l)] == (l > 0) for l in c) for c in self.clauses)


def require_width(f: Formula, limit: int = 2, exact: bool = False):
    lo, hi = f.width_range()
    if hi <= limit and (not exact or not f.clauses or lo == limit):
        return
    for c in f.clauses:
        if len(c) > limit or (exact and len(c) != limit):
            raise WidthError(c, limit)


def binary_array(f: Formula) -> np.ndarray:
    """(m, 2) int64 array of a formula whose clauses all have width 2."""
    def make():
        m = len(f.clauses)
        if m == 0:
            a = np.zeros((0, 2), dtype=np.int64)
        else:
            a = np.fromiter(itertools.chain.from_iterable(f.clauses),
                            dtype=np.int64, count=2 * m).reshape(m, 2)
        a.flags.writeable = False
        return a
    return f._cached("array", make)


# ---------------------------------------------------------------- DIMACS

_AUX_RE = re.compile(r"^c\s+aux\b(.*)$")


def parse_dimacs(data) -> tuple[Formula, frozenset]:
    """Parse DIMACS CNF (bytes or str). Returns ``(formula, aux_ids)``."""
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("ascii", errors="strict")
    header = None
    aux: set[int] = set()
    clauses = []
    cur: list[int] = []
    for lineno, line in enumerate(io.StringIO(data), 1):
        s = line.strip()
        if not s or s == "%":
            continue
        if s[0] == "c":
            m = _AUX_RE.match(s)
            if m:
                try:
                    aux.update(int(t) for t in m.group(1).split())
                except ValueError:
                    raise ParseError(f"line {lineno}: bad aux declaration")
            continue
        if s[0] == "p":
            parts = s.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"line {lineno}: malformed header {s!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError(f"line {lineno}: malformed header {s!r}")
            if header[0] < 0 or header[1] < 0:
                raise ParseError(f"line {lineno}: negative header field")
            continue
        if header is None:
            raise ParseError(f"line {lineno}: clause before header")
        nv = header[0]
        for tok in s.split():
            try:
                x = int(tok)
            except ValueError:
                raise ParseError(f"line {lineno}: bad token {tok!r}")
            if x == 0:
                clauses.append(cur)
                cur = []
            elif abs(x) > nv:
                raise ParseError(f"line {lineno}: literal {x} out of range 1..{nv}")
            else:
                cur.append(x)
    if header is None:
        raise ParseError("missing 'p cnf' header")
    if cur:
        raise ParseError("unterminated clause at end of input")
    if len(clauses) != header[1]:
        raise ParseError(f"header declares {header[1]} clauses, found {len(clauses)}")
    for a in aux:
        if a < 1 or a > header[0]:
            raise ParseError(f"aux id {a} out of range 1..{header[0]}")
    return Formula(clauses, header[0]), frozenset(aux)


def emit_dimacs(f: Formula, aux: Iterable[int] = ()) -> bytes:
    aux = sorted(set(aux))
    nv = max([f.num_vars] + aux)
    out = [f"p cnf {nv} {len(f.clauses)}"]
    for i in range(0, len(aux), 32):
        out.append("c aux " + " ".join(map(str, aux[i:i + 32])))
    out.extend(" ".join(map(str, c + (0,))) for c in sorted(f.clauses))
    return ("\n".join(out) + "\n").encode("ascii")


# ---------------------------------------------------------------- restriction

def restrict(f: Formula, tau: Mapping[int, bool]) -> Formula:
    """F|tau: drop satisfied clauses, delete falsified literals."""
    out = set()
    for c in f.clauses:
        keep = []
        for l in c:
            val = tau.get(abs(l))
            if val is None:
                keep.append(l)
            elif val == (l > 0):
                break
        else:
            out.add(tuple(keep))
    return Formula.from_canonical(frozenset(out), f.num_vars)


def unit_propagate(f: Formula) -> tuple[Formula, frozenset]:
    """Propagate unit clauses to fixpoint.

    Returns ``(residual, forced)``; raises :class:`Conflict` carrying the trail
    if the empty clause is derived.
    """
    clauses = list(f.clauses)
    if any(len(c) == 0 for c in clauses):
        raise Conflict([])
    occ = defaultdict(list)
    for i, c in enumerate(clauses):
        for l in c:
            occ[l].append(i)
    remaining = [len(c) for c in clauses]
    satisfied = [False] * len(clauses)
    assign: dict[int, bool] = {}
    trail: list[int] = []
    queue = [c[0] for c in clauses if len(c) == 1]
    qi = 0
    while qi < len(queue):
        l = queue[qi]
        qi += 1
        v = abs(l)
        cur = assign.get(v)
        if cur is not None:
            if cur != (l > 0):
                raise Conflict(trail + [l])
            continue
        assign[v] = l > 0
        trail.append(l)
        for i in occ[l]:
            satisfied[i] = True
        for i in occ[-l]:
            if satisfied[i]:
                continue
            remaining[i] -= 1
            if remaining[i] == 0:
                raise Conflict(trail)
            if remaining[i] == 1:
                for x in clauses[i]:
                    if abs(x) not in assign:
                        queue.append(x)
                        break
    return restrict(f, assign), frozenset(trail)


# ---------------------------------------------------------------- 2-SAT

def _node(l: int) -> int:
    return 2 * (l - 1) if l > 0 else 2 * (-l - 1) + 1


def _lit(node: int) -> int:
    v = node // 2 + 1
    return -v if node & 1 else v


@dataclass(frozen=True)
class TwoSatResult:
    """Outcome of :func:`solve_2sat`.

    ``classes`` partitions every literal of variables 1..num_vars into
    strongly connected components of the implication graph; ``component``
    maps a literal to the index of its class.
    """
    satisfiable: bool
    model: dict | None
    classes: tuple
    component: dict = field(repr=False)

    def __bool__(self):
        return self.satisfiable

    def equivalent(self, a: int, b: int) -> bool:
        return self.component[a] == self.component[b]


def _tarjan(num_nodes, adj):
    index = [-1] * num_nodes
    low = [0] * num_nodes
    onstack = [False] * num_nodes
    comp = [-1] * num_nodes
    stack = []
    counter = 0
    ncomp = 0
    for s in range(num_nodes):
        if index[s] != -1:
            continue
        index[s] = low[s] = counter
        counter += 1
        stack.append(s)
        onstack[s] = True
        work = [[s, 0]]
        while work:
            top = work[-1]
            v = top[0]
            nb = adj[v]
            if top[1] < len(nb):
                w = nb[top[1]]
                top[1] += 1
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack[w] = True
                    work.append([w, 0])
                elif onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            else:
                work.pop()
                if low[v] == index[v]:
                    while True:
                        x = stack.pop()
                        onstack[x] = False
                        comp[x] = ncomp
                        if x == v:
                            break
                    ncomp += 1
                if work:
                    u = work[-1][0]
                    if low[v] < low[u]:
                        low[u] = low[v]
    return comp


def _scc_python(n, clauses):
    adj = [[] for _ in range(2 * n)]
    for c in sorted(clauses):
        if len(c) == 1:
            a = c[0]
            adj[_node(-a)].append(_node(a))
        elif len(c) == 2:
            a, b = c
            adj[_node(-a)].append(_node(b))
            adj[_node(-b)].append(_node(a))
    return _tarjan(2 * n, adj)


def _scc_numpy(n, f):
    """SCC labels via scipy; labels come out in completion (sink-first) order."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    arr = binary_array(f)
    a, b = arr[:, 0], arr[:, 1]
    allneg = bool(np.all(arr < 0))
    if allneg or bool(np.all(arr > 0)):
        # every implication joins a positive and a negative literal, so all
        # components are single nodes; the sink side completes first
        idx = np.arange(n)
        labels = np.empty(2 * n, dtype=np.int64)
        labels[1::2], labels[0::2] = (idx, n + idx) if allneg else (n + idx, idx)
        return labels, arr
    na =np.where(a > 0, 2 * (a - 1), 2 * (-a - 1) + 1)
    nb = np.where(b > 0, 2 * (b - 1), 2 * (-b - 1) + 1)
    src = np.concatenate([na ^ 1, nb ^ 1])
    dst = np.concatenate([nb, na])
    g = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(2 * n, 2 * n))
    _, labels = connected_components(g, directed=True, connection="strong")
    return labels, arr


_NUMPY_THRESHOLD = 20000


def solve_2sat(f: Formula) -> TwoSatResult:
    """Decide a formula of width <= 2 and report literal SCC classes.

    The model is all-false when every clause has a negative literal;
    otherwise each variable is true iff its positive literal's component is
    completed before its negative one in Tarjan order.
    """
    require_width(f, 2)
    n = f.num_vars
    has_empty = () in f.clauses
    arr = None
    if len(f.clauses) >= _NUMPY_THRESHOLD and f.is_2cnf():
        labels, arr = _scc_numpy(n, f)
        comp = labels.tolist()
    else:
        comp = _scc_python(n, f.clauses)

    groups = defaultdict(list)
    for node in range(2 * n):
        groups[comp[node]].append(_lit(node))
    classes = tuple(sorted((frozenset(g) for g in groups.values()),
                           key=lambda c: min(abs(x) * 2 + (x < 0) for x in c)))
    component = {}
    for i, cls in enumerate(classes):
        for l in cls:
            component[l] = i

    unsat = has_empty or any(comp[2 * i] == comp[2 * i + 1] for i in range(n))
    if unsat:
        return TwoSatResult(False, None, classes, component)

    if arr is not None:
        horn = bool(np.all((arr[:, 0] < 0) | (arr[:, 1] < 0)))
    else:
        horn = all(any(l < 0 for l in c) for c in f.clauses)
    if horn:
        model = {v: False for v in range(1, n + 1)}
    else:
        model = {v: comp[2 * (v - 1)] < comp[2 * (v - 1) + 1] for v in range(1, n + 1)}
        if arr is not None and not _check_model(arr, model, n):
            comp = _scc_python(n, f.clauses)
            model = {v: comp[2 * (v - 1)] < comp[2 * (v - 1) + 1] for v in range(1, n + 1)}
    return TwoSatResult(True, model, classes, component)


def _check_model(arr, model, n):
    vals = np.zeros(n + 1, dtype=bool)
    for v, b in model.items():
        vals[v] = b
    lit_true = lambda col: np.where(col > 0, vals[np.abs(col)], ~vals[np.abs(col)])
    return bool(np.all(lit_true(arr[:, 0]) | lit_true(arr[:, 1])))


# ---------------------------------------------------------------- DP elimination

def resolve(c: tuple, d: tuple, v: int):
    """Resolvent of c (containing v) and d (containing -v); None if tautological."""
    lits = set(c)
    lits.discard(v)
    for l in d:
        if l == -v:
            continue
        if -l in lits:
            return None
        lits.add(l)
    return tuple(sorted(lits, key=abs))


def eliminate_variable(f: Formula, v: int) -> Formula:
    pos, neg, rest = [], [], set()
    for c in f.clauses:
        if v in c:
            pos.append(c)
        elif -v in c:
            neg.append(c)
        else:
            rest.add(c)
    for c in pos:
        for d in neg:
            r = resolve(c, d, v)
            if r is not None:
                rest.add(r)
    return Formula.from_canonical(frozenset(rest), f.num_vars)

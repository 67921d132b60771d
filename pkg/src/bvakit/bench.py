"""Independent-set benchmark instances and a small harness comparing
reencoders on their all-negative binary fragment.

Randomness: numpy's PCG64 seeded from ``SeedSequence(seed, spawn_key=(trial,))``
so every trial owns a stream that does not depend on how many trials run.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import re
import subprocess
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .cnf_core import Formula, emit_dimacs
from .construct import monotone_reencode, nechiporuk_monotone
from .diagram import diagram_unchecked
from .errors import AuditFailure, DomainError, SolverError
from .heuristic import improve_prn, run_heuristic
from .sprn import formula_of
from .verify import audit

METHODS = ("direct", "nechiporuk", "heuristic", "nechiporuk+heuristic")
REGIMES = ("sat", "unsat", "fixed")
# above this many Sinz aux variables the compact counter is used instead
SINZ_AUX_LIMIT = 400_000


@dataclass(frozen=True)
class InstanceSpec:
    n: int
    p: float
    regime: str = "sat"
    seed: int = 0
    k: int | None = None  # only for the fixed regime

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p}")
        if self.regime not in REGIMES:
            raise DomainError(f"unknown regime {self.regime!r}")
        if self.regime == "fixed" and (self.k is None or not 0 <= self.k <= self.n):
            raise DomainError("fixed regime needs 0 <= k <= n")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must fit in 64 bits")


def k_for(n: int, regime: str, k: int | None = None) -> int:
    if regime == "sat":
        return 1 + math.floor(1.2 * math.log2(n))
    if regime == "unsat":
        return min(n, math.floor(30 * math.log2(n)))
    if regime == "fixed":
        return k
    raise DomainError(f"unknown regime {regime!r}")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def gnp_edges(n: int, p: float, rng: np.random.Generator):
    """Edges of G(n, p) on vertices 1..n as two arrays (u < v)."""
    iu, iv = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return iu[keep] + 1, iv[keep] + 1


# ---------------------------------------------------------------- counters

def _sinz_atmost(lits, bound, next_aux):
    """Sinz sequential counter for sum(lits) <= bound."""
    m = len(lits)
    out = []
    if bound >= m:
        return out, []
    if bound == 0:
        return [(-l,) for l in lits], []
    s = [[next_aux + i * bound + j for j in range(bound)] for i in range(m - 1)]
    aux = [v for row in s for v in row]
    out.append((-lits[0], s[0][0]))
    for j in range(1, bound):
        out.append((-s[0][j],))
    for i in range(1, m - 1):
        li = lits[i]
        out.append((-li, s[i][0]))
        out.append((-s[i - 1][0], s[i][0]))
        for j in range(1, bound):
            out.append((-li, -s[i - 1][j - 1], s[i][j]))
            out.append((-s[i - 1][j], s[i][j]))
        out.append((-li, -s[i - 1][bound - 1]))
    out.append((-lits[m - 1], -s[m - 2][bound - 1]))
    return out, aux


def _compact_atleast(xs, k, next_aux):
    """r[i][j] = at least j+1 of xs[0..i] are true; only the implications
    from r downwards are needed, plus the unit r[m-1][k-1]."""
    m = len(xs)
    ids = {}
    for i in range(m):
        for j in range(min(i + 1, k)):
            if j >= k - (m - i):  # reachable for the final requirement
                ids[(i, j)] = next_aux + len(ids)
    out = []
    for (i, j), r in ids.items():
        prev_same = ids.get((i - 1, j)) if i > 0 else None
        prev_less = ids.get((i - 1, j - 1)) if j > 0 else None
        # r -> prev_same or x_i
        c = [-r, xs[i]]
        if prev_same is not None:
            c.append(prev_same)
        out.append(tuple(c))
        # r -> prev_same or prev_less (prev_less is true when j == 0)
        if j > 0:
            c = [-r]
            if prev_same is not None:
                c.append(prev_same)
            if prev_less is not None:
                c.append(prev_less)
            out.append(tuple(c))
    out.append((ids[(m - 1, k - 1)],))
    return out, sorted(ids.values())


def seq_counter_atleast(xs, k: int, first_aux: int, compact: bool = False):
    """Clauses for sum(xs) >= k. Default: Sinz at-most-(m-k) over the
    negated variables. Returns ``(clauses, aux)``."""
    xs = list(xs)
    m = len(xs)
    if not 0 <= k <= m:
        raise DomainError(f"need 0 <= k <= {m}, got {k}")
    if k == 0:
        return [], []
    if k == m:
        return [(x,) for x in xs], []
    if compact:
        return _compact_atleast(xs, k, first_aux)
    return _sinz_atmost([-x for x in xs], m - k, first_aux)


def _counter_kind(m, k, counter):
    if counter == "auto":
        return "compact" if (m - 1) * (m - k) > SINZ_AUX_LIMIT else "sinz"
    if counter not in ("sinz", "compact"):
        raise DomainError(f"unknown counter {counter!r}")
    return counter


# ---------------------------------------------------------------- instances

@dataclass(frozen=True)
class Instance:
    formula: Formula
    base: frozenset
    fragment: Formula   # the edge clauses
    counter_aux: frozenset
    k: int
    counter: str


def gen_indepset(spec: InstanceSpec, trial: int = 0, counter: str = "auto") -> Instance:
    """Independent set of size >= k on G(n, p): one all-negative clause per
    edge plus a sequential counter."""
    rng = trial_rng(spec.seed, trial)
    u, v = gnp_edges(spec.n, spec.p, rng)
    fragment = Formula.from_canonical(frozenset(zip((-u).tolist(), (-v).tolist())), spec.n)
    k = k_for(spec.n, spec.regime, spec.k)
    kind = _counter_kind(spec.n, k, counter)
    cl, aux = seq_counter_atleast(range(1, spec.n + 1), k, spec.n + 1, kind == "compact")
    nv = max([spec.n] + aux)
    f = Formula(list(fragment.clauses) + cl, nv)
    return Instance(f, frozenset(range(1, spec.n + 1)), fragment, frozenset(aux), k, kind)


def split_binary_fragment(f: Formula):
    """(all-negative binary clauses, everything else)."""
    frag, rest = set(), set()
    for c in f.clauses:
        if len(c) == 2 and c[0] < 0 and c[1] < 0:
            frag.add(c)
        else:
            rest.add(c)
    return (Formula.from_canonical(frozenset(frag), f.num_vars),
            Formula.from_canonical(frozenset(rest), f.num_vars))


# ---------------------------------------------------------------- reencoders

def reencode_fragment(fragment: Formula, method: str, first_aux: int, seed: int = 0):
    """Returns (encoded fragment, aux ids)."""
    if method == "direct" or not fragment.clauses:
        return fragment, frozenset()
    if method == "nechiporuk":
        out, aux, _ = monotone_reencode(fragment, first_aux=first_aux)
        return out, aux
    if method == "heuristic":
        prn, _ = run_heuristic(fragment, seed=seed, first_aux=first_aux)
        return formula_of(prn), frozenset(prn.aux)
    if method == "nechiporuk+heuristic":
        prn = nechiporuk_monotone(diagram_unchecked(fragment), first_aux=first_aux)
        prn = improve_prn(prn, seed=seed)
        return formula_of(prn), frozenset(prn.aux)
    raise DomainError(f"unknown method {method!r}")


_STATUS = re.compile(rb"^s\s+(SATISFIABLE|UNSATISFIABLE|UNKNOWN)\s*$", re.M)


def run_solver(path: str, solver: str, timeout: float = 300.0):
    """Run ``solver path``; returns (millis, 'SAT' | 'UNSAT' | 'UNKNOWN')."""
    t0 = time.perf_counter()
    try:
        proc = subprocess.run([solver, path], capture_output=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        return timeout * 1000.0, "TIMEOUT"
    except OSError as e:
        raise SolverError(f"cannot run {solver}: {e}") from e
    ms = (time.perf_counter() - t0) * 1000
    # 10 / 20 are the usual SAT-competition exit codes
    if proc.returncode not in (0, 10, 20):
        raise SolverError(f"{solver} exited with {proc.returncode}")
    m = _STATUS.search(proc.stdout)
    if m is None:
        raise SolverError(f"no status line in output of {solver}")
    word = m.group(1).decode()
    return ms, {"SATISFIABLE": "SAT", "UNSATISFIABLE": "UNSAT"}.get(word, word)


# ---------------------------------------------------------------- harness

@dataclass
class BenchRow:
    n: int
    p: float
    regime: str
    seed: int
    trial: int
    method: str
    k: int
    counter: str
    vars: int
    clauses: int
    fragment_in: int
    fragment_out: int
    aux_added: int
    reencode_ms: float
    solve_ms: float | None = None
    sat_result: str | None = None

    @property
    def ratio(self):
        return self.fragment_out / self.fragment_in if self.fragment_in else 1.0


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)

    def summary(self) -> list:
        """Means per (n, p, regime, seed, method), sorted by key."""
        groups = {}
        for r in self.rows:
            groups.setdefault((r.n, r.p, r.regime, r.seed, r.method), []).append(r)
        out = []
        for key in sorted(groups):
            rs = groups[key]
            solved = [r.solve_ms for r in rs if r.solve_ms is not None]
            s = {
                "n": key[0], "p": key[1], "regime": key[2], "seed": key[3], "method": key[4],
                "trials": len(rs),
                "vars": float(np.mean([r.vars for r in rs])),
                "clauses": float(np.mean([r.clauses for r in rs])),
                "fragment_in": float(np.mean([r.fragment_in for r in rs])),
                "fragment_out": float(np.mean([r.fragment_out for r in rs])),
                "ratio": float(np.mean([r.ratio for r in rs])),
                "reencode_ms": float(np.mean([r.reencode_ms for r in rs])),
            }
            if solved:
                s["solve_ms"] = float(np.mean(solved))
                s["sat_results"] = sorted({r.sat_result for r in rs})
            out.append(s)
        return out

    def to_json(self) -> str:
        rows = []
        for r in self.rows:
            d = asdict(r)
            for k in ("solve_ms", "sat_result"):
                if d[k] is None:
                    del d[k]
            rows.append(d)
        return json.dumps({"rows": rows, "summary": self.summary()}, indent=2)

    def to_csv(self) -> str:
        names = [f for f in BenchRow.__dataclass_fields__]
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(names + ["ratio"])
        for r in self.rows:
            w.writerow([("" if getattr(r, f) is None else getattr(r, f)) for f in names]
                       + [f"{r.ratio:.6f}"])
        return buf.getvalue()


def splice(rest: Formula, enc: Formula, enc_aux, reserved_vars: int) -> Formula:
    """Put an encoded fragment back next to the untouched clauses; the
    fragment's aux ids must sit above every id of the original instance."""
    bad = [a for a in enc_aux if a <= reserved_vars]
    if bad:
        raise DomainError(f"aux ids {sorted(bad)[:5]} collide with the instance")
    return Formula.from_canonical(rest.clauses | enc.clauses, max(rest.num_vars, enc.num_vars))


def _run_one(spec: InstanceSpec, trial: int, methods, solver, timeout, counter, heuristic_seed):
    inst = gen_indepset(spec, trial, counter)
    frag, rest = split_binary_fragment(inst.formula)
    rows = []
    for method in methods:
        t0 = time.perf_counter()
        enc, aux = reencode_fragment(frag, method, inst.formula.num_vars + 1, heuristic_seed)
        ms = (time.perf_counter() - t0) * 1000
        if aux:
            v = audit(frag, enc, aux)
            if not v.ok:
                raise AuditFailure(v, f"n={spec.n} trial={trial} method={method}")
        full = splice(rest, enc, aux, inst.formula.num_vars)
        row = BenchRow(spec.n, spec.p, spec.regime, spec.seed, trial, method, inst.k, inst.counter,
                       full.num_vars, len(full), len(frag), len(enc), len(aux), ms)
        if solver:
            fd, path = tempfile.mkstemp(suffix=".cnf")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(emit_dimacs(full, inst.counter_aux | aux))
                row.solve_ms, row.sat_result = run_solver(path, solver, timeout)
            finally:
                os.unlink(path)
        rows.append(row)
    return rows


def run_bench(specs, methods=("nechiporuk",), trials: int = 5, solver: str | None = None,
              timeout: float = 300.0, workers: int = 1, counter: str = "auto",
              heuristic_seed: int = 0) -> BenchReport:
    for m in methods:
        if m not in METHODS:
            raise DomainError(f"unknown method {m!r}")
    jobs = [(s, t) for s in specs for t in range(trials)]
    args = (tuple(methods), solver, timeout, counter, heuristic_seed)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_one, *zip(*[(s, t) + args for s, t in jobs])))
    else:
        results = [_run_one(s, t, *args) for s, t in jobs]
    rows = [r for rs in results for r in rs]
    rows.sort(key=lambda r: (r.n, r.p, r.regime, r.seed, r.method, r.trial))
    return BenchReport(rows)


def fragment_ratio(n: int, p: float = 0.5, seed: int = 0, trial: int = 0, params=None):
    """Compression ratio of the monotone construction on a fresh G(n, p)
    edge fragment, without building the counter. Returns (ratio, millis)."""
    u, v = gnp_edges(n, p, trial_rng(seed, trial))
    frag = Formula.from_canonical(frozenset(zip((-u).tolist(), (-v).tolist())), n)
    t0 = time.perf_counter()
    out, _, _ = monotone_reencode(frag, params)
    ms = (time.perf_counter() - t0) * 1000
    return len(out) / max(1, len(frag)), ms


def fragment_stats(f: Formula) -> dict:
    widths = {}
    for c in f.clauses:
        widths[len(c)] = widths.get(len(c), 0) + 1
    frag, rest = split_binary_fragment(f)
    mixed = sum(1 for c in f.clauses if len(c) == 2 and (c[0] < 0) != (c[1] < 0))
    return {
        "vars": f.num_vars,
        "clauses": len(f),
        "widths": {str(k): widths[k] for k in sorted(widths)},
        "negative_binary_fragment": len(frag),
        "rest": len(rest),
        "binary_mixed": mixed,
    }

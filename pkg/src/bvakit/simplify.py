"""Reduce an arbitrary 2-CNF formula to a simple core and lift encodings back.

A 2-CNF formula is simple when it implies no literal equivalences, every
clause has a negative literal, and no two clauses share a variable pair.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .cnf_core import Formula, binary_array, require_width, solve_2sat, unit_propagate

EQUIVALENT_LITERALS = "EquivalentLiterals"
POSITIVE_CLAUSE = "PositiveClause"
DUPLICATE_VAR_PAIR = "DuplicateVarPair"


@dataclass(frozen=True)
class SimplicityViolation:
    kind: str
    witness: tuple

    def __str__(self):
        return f"{self.kind}: {self.witness}"


@dataclass(frozen=True)
class SimplificationResult:
    core: Formula
    unsat: bool
    equiv: dict = field(default_factory=dict)
    forced: frozenset = frozenset()
    renamed: frozenset = frozenset()
    original_vars: int = 0

    def rep(self, lit: int) -> int:
        return self.equiv.get(lit, lit)

    def is_identity(self) -> bool:
        return not (self.unsat or self.equiv or self.forced or self.renamed)

    def to_json(self) -> str:
        return json.dumps({
            "equiv": [[l, r] for l, r in sorted(self.equiv.items(), key=lambda kv: (abs(kv[0]), kv[0]))],
            "forced": sorted(self.forced, key=lambda l: (abs(l), l)),
            "renamed": sorted(self.renamed),
            "unsat": self.unsat,
        }, indent=1)


def _pair_key(c):
    return (abs(c[0]), abs(c[1]))


def is_simple(f: Formula):
    """None when ``f`` is simple, otherwise a :class:`SimplicityViolation`."""
    require_width(f, 2, exact=True)
    res = solve_2sat(f)
    used = f.variables()
    for cls in res.classes:
        if len(cls) > 1 and any(abs(l) in used for l in cls):
            a, b = sorted(cls, key=lambda l: (abs(l), l))[:2]
            return SimplicityViolation(EQUIVALENT_LITERALS, (a, b))
    for c in sorted(f.clauses):
        if c[0] > 0 and c[1] > 0:
            return SimplicityViolation(POSITIVE_CLAUSE, (c,))
    seen = {}
    for c in sorted(f.clauses):
        k = _pair_key(c)
        if k in seen:
            return SimplicityViolation(DUPLICATE_VAR_PAIR, (seen[k], c))
        seen[k] = c
    return None


def _unsat_result(n):
    return SimplificationResult(Formula.from_canonical(frozenset([()]), n), True,
                                original_vars=n)


def _has_duplicate_pairs(f: Formula) -> bool:
    if len(f.clauses) < 20000:
        return len({_pair_key(c) for c in f.clauses}) != len(f.clauses)
    a = np.abs(binary_array(f))
    keys = a[:, 0] * (f.num_vars + 1) + a[:, 1]
    return len(np.unique(keys)) != len(keys)


def simplify_to_simple(f: Formula) -> SimplificationResult:
    """Equivalent-literal substitution, weak failed-literal rule, unit
    propagation, then Horn renaming from a 2-SAT model."""
    require_width(f, 2, exact=True)
    n = f.num_vars
    res = solve_2sat(f)
    if not res.satisfiable:
        return _unsat_result(n)

    # representative: literal of lowest variable id in the class
    equiv = {}
    big = [cls for cls in res.classes if len(cls) > 1]
    used = f.variables() if big else frozenset()
    for cls in big:
        if not any(abs(l) in used for l in cls):
            continue
        rep = min(cls, key=abs)
        for l in cls:
            if l != rep:
                equiv[l] = rep

    units = set()
    if equiv:
        sub = set()
        for a, b in f.clauses:
            a, b = equiv.get(a, a), equiv.get(b, b)
            if a == -b:
                continue
            if a == b:
                units.add(a)
            else:
                sub.add((a, b) if abs(a) < abs(b) else (b, a))
        star = Formula.from_canonical(frozenset(sub), n)
    else:
        star = f

    # weak failed-literal rule: (l v x) and (l v -x) entail l
    if _has_duplicate_pairs(star):
        by_pair = defaultdict(list)
        for c in star.clauses:
            by_pair[_pair_key(c)].append(c)
        for cs in by_pair.values():
            if len(cs) < 2:
                continue
            lits = defaultdict(int)
            for c in cs:
                for l in c:
                    lits[l] += 1
            for l, k in lits.items():
                if k >= 2:
                    units.add(l)

    forced = frozenset()
    core = star
    if units:
        withunits = Formula.from_canonical(star.clauses | {(u,) for u in units}, n)
        core, forced = unit_propagate(withunits)

    renamed = frozenset()
    # a Horn core already has the all-false model, so nothing to rename
    if core.clauses and not _is_horn(core):
        model = solve_2sat(core).model
        cv = core.variables()
        renamed = frozenset(v for v in cv if model[v])
        if renamed:
            core = Formula.from_canonical(
                frozenset(_flip_clause(c, renamed) for c in core.clauses), n)
    return SimplificationResult(core, False, equiv, forced, renamed, n)


def _is_horn(f: Formula) -> bool:
    a = binary_array(f)
    return bool(np.all((a[:, 0] < 0) | (a[:, 1] < 0)))


def _flip_clause(c, flip):
    return tuple(-l if abs(l) in flip else l for l in c)


def anchor_for(lit: int) -> int:
    """Lowest variable id distinct from the literal's own variable."""
    return 1 if abs(lit) != 1 else 2


def reassemble(core_encoding: Formula, s: SimplificationResult, core_aux=frozenset()):
    """Lift an encoding of ``s.core`` to an encoding of the original formula.

    Returns ``(formula, aux)``.
    """
    n = max(core_encoding.num_vars, s.original_vars)
    if s.unsat:
        return Formula.from_canonical(frozenset([()]), n), frozenset()
    core_aux = frozenset(core_aux)
    if s.is_identity():
        return core_encoding, core_aux
    if s.renamed & core_aux:
        raise ValueError("auxiliary ids collide with renamed base variables")
    if s.renamed:
        out = {_flip_clause(c, s.renamed) for c in core_encoding.clauses}
    else:
        out = set(core_encoding.clauses)
    for l, h in s.equiv.items():
        out.add(_canon2(-l, h))
        out.add(_canon2(-h, l))
    for l in s.forced:
        x = anchor_for(l)
        out.add(_canon2(l, x))
        out.add(_canon2(l, -x))
    return Formula.from_canonical(frozenset(out), n), core_aux


def _canon2(a, b):
    return (a, b) if abs(a) < abs(b) else (b, a)

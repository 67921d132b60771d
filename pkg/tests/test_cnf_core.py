import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bvakit import (Formula, eliminate_variable, emit_dimacs, parse_dimacs, restrict, solve_2sat,
                    unit_propagate)
from bvakit.cnf_core import binary_array, make_clause, require_width
from bvakit.errors import Conflict, ParseError, TautologyError, WidthError
from helpers import brute_sat, two_cnf


def test_make_clause_sorts_and_dedups():
    assert make_clause([3, -1, 3]) == (-1, 3)
    with pytest.raises(TautologyError):
        make_clause([2, -2])


def test_formula_set_semantics():
    f = Formula([(1, -2), (-2, 1), (1, -2)])
    assert len(f) == 1
    assert f.num_vars == 2
    assert Formula([(1, 2)]) == Formula([(2, 1)], 5)


def test_parse_single_clause():
    f, aux = parse_dimacs(b"p cnf 2 1\n1 -2 0")
    assert f.clauses == {(1, -2)}
    assert aux == frozenset()


def test_parse_aux_annotation():
    f, aux = parse_dimacs(b"p cnf 3 2\nc aux 3\n-1 3 0\n-3 2 0")
    assert len(f) == 2
    assert aux == {3}


def test_parse_tautology_rejected():
    with pytest.raises(TautologyError):
        parse_dimacs(b"p cnf 1 1\n1 -1 0")


@pytest.mark.parametrize("text", [
    b"1 2 0",
    b"p cnf x 1\n1 0",
    b"p cnf 2 1\n1 3 0",
    b"p cnf 2 1\n1 2",
    b"p cnf 2 2\n1 2 0",
    b"p dnf 2 1\n1 2 0",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_dimacs(text)


def test_emit_lines():
    out = emit_dimacs(Formula([(-1, -2)]), {5}).decode()
    assert "-1 -2 0" in out.splitlines()
    assert "c aux 5" in out.splitlines()


@given(two_cnf(), st.data())
def test_dimacs_round_trip(f, data):
    aux = data.draw(st.frozensets(st.integers(1, f.num_vars)))
    g, a = parse_dimacs(emit_dimacs(f, aux))
    assert g == f and g.num_vars == f.num_vars and a == aux
    assert emit_dimacs(g, a) == emit_dimacs(f, aux)


def test_restrict_examples():
    f = Formula([(1, 2)])
    assert restrict(f, {1: False}).clauses == {(2,)}
    assert restrict(f, {1: True}).clauses == frozenset()
    assert restrict(Formula([(-1, -2)]), {1: True, 2: True}).clauses == {()}


@given(two_cnf(), st.data())
def test_restrict_composition(f, data):
    vs = sorted(f.variables())
    t1 = {v: data.draw(st.booleans()) for v in vs if data.draw(st.booleans())}
    rest = [v for v in vs if v not in t1]
    t2 = {v: data.draw(st.booleans()) for v in rest if data.draw(st.booleans())}
    assert restrict(restrict(f, t1), t2) == restrict(f, {**t1, **t2})
    assert not (restrict(f, t1).variables() & set(t1))


def test_unit_propagate_examples():
    res, forced = unit_propagate(Formula([(1,), (-1, 2)]))
    assert res.clauses == frozenset() and forced == {1, 2}
    with pytest.raises(Conflict):
        unit_propagate(Formula([(1,), (-1,)]))
    f = Formula([(-1, 2)])
    assert unit_propagate(f) == (f, frozenset())


def test_solve_2sat_examples():
    full = Formula([(1, 2), (-1, 2), (1, -2), (-1, -2)])
    assert not solve_2sat(full).satisfiable
    eq = solve_2sat(Formula([(-1, 2), (-2, 1)]))
    assert eq.satisfiable and eq.equivalent(1, 2) and eq.equivalent(-1, -2)
    assert not eq.equivalent(1, -2)
    r = solve_2sat(Formula([(-1, -2)]))
    assert r.satisfiable and r.model == {1: False, 2: False}
    with pytest.raises(WidthError):
        solve_2sat(Formula([(1, 2, 3)]))


@given(two_cnf(max_vars=10, max_clauses=30))
def test_solve_2sat_matches_truth_table(f):
    r = solve_2sat(f)
    assert r.satisfiable == brute_sat(f.clauses)
    if r.satisfiable:
        assert f.evaluate(r.model)


@given(two_cnf(max_vars=7, max_clauses=14), st.data())
def test_scc_equivalence_sound(f, data):
    r = solve_2sat(f)
    if not r.satisfiable:
        return
    lits = [l for v in sorted(f.variables()) for l in (v, -v)]
    a = data.draw(st.sampled_from(lits))
    b = data.draw(st.sampled_from(lits))
    if r.equivalent(a, b):
        assert not brute_sat(list(f.clauses) + [(a,), (-b,)], f.variables())
        assert not brute_sat(list(f.clauses) + [(-a,), (b,)], f.variables())
    elif a != b and not any(brute_sat(list(f.clauses) + [(-l,)], f.variables()) is False
                            for l in (a, -a, b, -b)):
        # with no entailed unit on a or b, separate classes have a separating model
        assert (brute_sat(list(f.clauses) + [(a,), (-b,)], f.variables())
                or brute_sat(list(f.clauses) + [(-a,), (b,)], f.variables()))


def test_numpy_scc_path_agrees():
    rng = random.Random(4)
    n = 3000
    cl = set()
    while len(cl) < 25000:
        a, b = rng.sample(range(1, n + 1), 2)
        cl.add(make_clause((-a, rng.choice((b, -b)))))
    f = Formula.from_canonical(frozenset(cl), n)
    from bvakit.cnf_core import _scc_numpy, _scc_python
    c1, _ = _scc_numpy(n, f)
    c2 = _scc_python(n, sorted(f.clauses))
    # same partition, possibly different labels
    def part(comp):
        groups = {}
        for i, c in enumerate(comp):
            groups.setdefault(int(c), []).append(i)
        return {tuple(g) for g in groups.values()}
    assert part(c1) == part(c2)
    r = solve_2sat(f)
    if r.satisfiable:
        assert f.evaluate(r.model)


def test_eliminate_variable_hub():
    f = Formula([(-1, 7), (-2, 7), (-3, 7), (-7, 4), (-7, 5), (-7, 6)])
    g = eliminate_variable(f, 7)
    assert g == Formula([(-i, j) for i in (1, 2, 3) for j in (4, 5, 6)])
    assert eliminate_variable(Formula([(1, 2), (-2, -1)]), 2).clauses == frozenset()
    assert eliminate_variable(Formula([(3,)]), 3).clauses == frozenset()


@given(two_cnf(max_vars=8, max_clauses=18), st.data())
def test_eliminate_variable_preserves_sat(f, data):
    v = data.draw(st.sampled_from(sorted(f.variables())))
    g = eliminate_variable(f, v)
    assert brute_sat(f.clauses) == brute_sat(g.clauses)
    assert v not in g.variables()


def test_width_helpers():
    f = Formula([(1, 2), (3,)])
    with pytest.raises(WidthError):
        require_width(f, 2, exact=True)
    require_width(f, 2)
    arr = binary_array(Formula([(-1, 2), (-3, -4)]))
    assert sorted(map(tuple, arr.tolist())) == [(-3, -4), (-1, 2)]


def test_evaluate_exhaustive_small():
    f = Formula([(1, -2), (2, 3)])
    for bits in itertools.product((False, True), repeat=3):
        tau = dict(zip((1, 2, 3), bits))
        assert f.evaluate(tau) == ((bits[0] or not bits[1]) and (bits[1] or bits[2]))

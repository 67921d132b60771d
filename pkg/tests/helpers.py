"""Brute-force oracles and random generators shared by the tests."""
import itertools
import random

from hypothesis import strategies as st

from bvakit import NEG, POS, Formula, PolarizedDiagram

# a simple 20-clause formula on x1..x8
TWENTY = Formula([
    (-1, -3), (-1, 5), (-1, 6), (-1, 7), (-1, 8), (-2, -3), (-2, 5),
    (-2, 4), (-2, 6), (-2, 7), (-2, 8), (-3, -5), (-3, 4), (-3, 7),
    (-4, 5), (-4, 6), (-4, 7), (-6, 7), (-6, -8), (-7, 8),
])

# a small formula mixing all-negative clauses and implications
FIVE = Formula([(1, -2), (-1, -3), (-1, -4), (3, -4), (-2, 3)])


def brute_sat(clauses, variables=None):
    clauses = [tuple(c) for c in clauses]
    vs = sorted(variables if variables is not None else {abs(l) for c in clauses for l in c})
    for bits in itertools.product((False, True), repeat=len(vs)):
        tau = dict(zip(vs, bits))
        if all(any(tau[abs(l)] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def brute_models(f: Formula, vs):
    out = set()
    for bits in itertools.product((False, True), repeat=len(vs)):
        tau = dict(zip(vs, bits))
        if f.evaluate(tau):
            out.add(bits)
    return out


def brute_encodes(orig: Formula, enc: Formula, base):
    """Projection of enc's models onto base equals orig's models."""
    base = sorted(base)
    allv = sorted(set(base) | enc.variables())
    extra = [v for v in allv if v not in set(base)]
    want = brute_models(orig, base)
    got = set()
    for bits in itertools.product((False, True), repeat=len(base)):
        tau = dict(zip(base, bits))
        for ebits in itertools.product((False, True), repeat=len(extra)):
            tau.update(zip(extra, ebits))
            if enc.evaluate(tau):
                got.add(bits)
                break
    return want == got


def random_2cnf(rng, n, m):
    cl = set()
    for _ in range(m):
        a, b = rng.sample(range(1, n + 1), 2)
        cl.add((a * rng.choice((1, -1)), b * rng.choice((1, -1))))
    return Formula(cl, n)


def random_simple(rng, n, p=None, mixed=True):
    """Random simple 2-CNF: a hidden order, each forward pair gets nothing,
    an all-negative clause or a Horn implication along the order."""
    order = list(range(1, n + 1))
    rng.shuffle(order)
    p = rng.uniform(0.2, 0.9) if p is None else p
    cl = set()
    for i in range(n):
        for j in range(i + 1, n):
            x = rng.random()
            if x < p:
                if mixed and x < p / 2:
                    cl.add((-order[i], order[j]))
                else:
                    cl.add((-order[i], -order[j]))
    return Formula(cl, n)


def random_polarized(rng, n, p=None):
    order = list(range(1, n + 1))
    rng.shuffle(order)
    p = rng.uniform(0.2, 0.9) if p is None else p
    pol = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                pol[(order[i], order[j])] = rng.choice((NEG, POS))
    return PolarizedDiagram(frozenset(order), pol)


def random_coherent(rng, r):
    """A random coherent biclique (X, Y) of a PRN, or None if it has no edges."""
    em = r.edge_map()
    if not em:
        return None
    x0, _ = rng.choice(sorted(em))
    outs = r.succ(x0)
    Y = rng.sample(outs, rng.randint(1, len(outs)))
    cands = [x for x in sorted(r.vertices())
             if x not in Y and x != x0
             and all((x, y) in em and em[(x, y)] == em[(x0, y)] for y in Y)]
    X = [x0] + rng.sample(cands, rng.randint(0, len(cands)))
    return X, Y


def gnp_monotone(n, p, seed):
    rng = random.Random(seed)
    return Formula([(-i, -j) for i in range(1, n + 1) for j in range(i + 1, n + 1)
                    if rng.random() < p], n)


@st.composite
def two_cnf(draw, max_vars=8, max_clauses=20):
    n = draw(st.integers(2, max_vars))
    lit = st.integers(1, n).flatmap(lambda v: st.sampled_from((v, -v)))
    pairs = draw(st.lists(st.tuples(lit, lit).filter(lambda t: abs(t[0]) != abs(t[1])),
                          min_size=1, max_size=max_clauses))
    return Formula(pairs, n)


@st.composite
def simple_formulas(draw, max_vars=9):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    n = draw(st.integers(2, max_vars))
    return random_simple(random.Random(seed), n)


# acceptance lines, printed in the terminal summary by conftest
ACCEPTANCE = []


def report(num, ok, detail):
    line = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append((num, line))
    print(line)
    return ok

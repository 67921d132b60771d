"""Acceptance suite. Every test prints one PASS/FAIL line and then asserts.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""
import math
import random
import time

import numpy as np

from bvakit import (NEG, Diagram, Formula, PolarizedDiagram, amo_direct, amo_ladder, amo_product,
                    apply_bva_step, auto_reencode, check_encoding, check_realizes, check_strict,
                    eliminate_auxiliaries, formula_of, is_simple, nechiporuk_monotone,
                    nechiporuk_simple, prn_of, reassemble, reduce_biclique, reencode_general,
                    run_heuristic, simplify_to_simple)
from bvakit.bench import fragment_ratio, gnp_edges, trial_rng
from bvakit.diagram import diagram_of, formula_of_polarized
from helpers import (TWENTY, random_2cnf, random_coherent, random_polarized, random_simple,
                     report)


def complete_order(n):
    return PolarizedDiagram(frozenset(range(1, n + 1)),
                            {(i, j): NEG for i in range(1, n + 1) for j in range(i + 1, n + 1)})


def test_c01_ladder_exact():
    t0 = time.perf_counter()
    ladders = {n: amo_ladder(n) for n in range(3, 501)}
    counts_ok = all(len(formula_of(r)) == 3 * n - 6 for n, r in ladders.items())
    build = time.perf_counter() - t0
    t1 = time.perf_counter()
    checks_ok = all(check_strict(r) is None and check_realizes(r, complete_order(n)) is None
                    for n, r in ladders.items())
    checks = time.perf_counter() - t1
    ok = counts_ok and checks_ok and build < 1.0
    report(1, ok, f"3n-6 for n=3..500: {counts_ok}; strict+realizes: {checks_ok}; "
                  f"construction {build:.2f}s (<1s); checks {checks:.1f}s untimed")
    assert ok


def test_c02_heuristic_amo():
    t0 = time.perf_counter()
    bad = [(n, s) for n in range(3, 65) for s in range(5)
           if run_heuristic(amo_direct(n), seed=s)[0].num_edges() != 3 * n - 6]
    dt = time.perf_counter() - t0
    ok = not bad and dt < 10
    report(2, ok, f"3n-6 for n=3..64 x 5 seeds, mismatches {bad[:3]}; {dt:.2f}s (<10s)")
    assert ok


def test_c03_fixtures():
    t0 = time.perf_counter()
    grid = Formula([(i, j) for i in (1, 2, 3) for j in (4, 5, 6)])
    g = apply_bva_step(grid, [1, 2, 3], [4, 5, 6])
    f1 = apply_bva_step(TWENTY, [-1, -2], [-3, 5, 6, 7, 8])
    f2 = apply_bva_step(f1, [-4, -9], [5, 6, 7])
    back = eliminate_auxiliaries(f2, {9, 10})
    dt = time.perf_counter() - t0
    sizes = (len(grid), len(g), len(TWENTY), len(f1), len(f2))
    ok = sizes == (9, 6, 20, 17, 16) and back == TWENTY and dt < 1
    report(3, ok, f"sizes {sizes}, DP recovers 20 clauses: {back == TWENTY}; {dt:.3f}s (<1s)")
    assert ok


def _gnp_diagram(rng, n):
    p = rng.uniform(0.2, 0.9)
    und = frozenset((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if rng.random() < p)
    return Diagram(frozenset(range(1, n + 1)), und, frozenset())


def test_c04_dp_recovery():
    rng = random.Random(4)
    t0 = time.perf_counter()
    fails = {}
    shrunk = {}

    def run(name, make):
        bad = hit = 0
        for _ in range(200):
            src, enc, aux = make()
            bad += eliminate_auxiliaries(enc, aux) != src
            hit += bool(aux)
        fails[name], shrunk[name] = bad, hit

    def ladder():
        r = amo_ladder(rng.randint(3, 64))
        return amo_direct(len(r.base)), formula_of(r), r.aux

    def simple():
        g = random_polarized(rng, rng.randint(2, 64))
        r = nechiporuk_simple(g)
        return formula_of_polarized(g), formula_of(r), r.aux

    def monotone():
        d = _gnp_diagram(rng, rng.randint(2, 64))
        r = nechiporuk_monotone(d)
        return Formula.from_canonical(frozenset((-u, -v) for u, v in d.undirected), max(d.vertices)), \
            formula_of(r), r.aux

    def general():
        n = rng.randint(2, 64)
        if rng.random() < 0.5:
            f = random_2cnf(rng, n, rng.randint(1, n * n))
        else:
            # each sign pattern gets its own density
            dens = {(sa, sb): rng.random() for sa in (1, -1) for sb in (1, -1)}
            f = Formula([(sa * i, sb * j) for i in range(1, n + 1) for j in range(i + 1, n + 1)
                         for (sa, sb), p in dens.items() if rng.random() < p], n)
        g, aux = reencode_general(f)
        return f, g, aux

    def heuristic():
        f = random_simple(rng, rng.randint(2, 64))
        r, _ = run_heuristic(f, seed=rng.randint(0, 9))
        return f, formula_of(r), r.aux

    for name, make in [("ladder", ladder), ("nechiporuk_simple", simple),
                       ("nechiporuk_monotone", monotone), ("reencode_general", general),
                       ("run_heuristic", heuristic)]:
        run(name, make)
    dt = time.perf_counter() - t0
    ok = not any(fails.values()) and dt < 60
    report(4, ok, f"mismatches {fails}; inputs with aux {shrunk}; {dt:.1f}s (<60s)")
    assert ok


def _corpus_500():
    """Random 2-CNF formulas on at most 14 variables, roughly a third dense
    enough to be unsatisfiable."""
    rng = random.Random(5)
    out = []
    for i in range(500):
        n = rng.randint(2, 14)
        if i % 5 == 4:
            out.append(random_simple(rng, n, p=rng.uniform(0.6, 1.0), mixed=rng.random() < 0.5))
        else:
            out.append(random_2cnf(rng, n, rng.randint(1, 4 * n)))
    return out


def test_c05_encoding_oracle():
    t0 = time.perf_counter()
    amo_bad = []
    for n in range(3, 13):
        target = amo_direct(n)
        base = range(1, n + 1)
        if not check_encoding(target, formula_of(amo_ladder(n)), base).ok:
            amo_bad.append(("ladder", n))
        prod, _ = amo_product(n)
        if not check_encoding(target, prod, base).ok:
            amo_bad.append(("product", n))
    bad = unsat = reencoded = 0
    for f in _corpus_500():
        out, aux, rep = auto_reencode(f)
        unsat += rep.method == "unsat"
        reencoded += bool(aux)
        bad += not check_encoding(f, out, f.variables() | (out.variables() - aux)).ok
    dt = time.perf_counter() - t0
    ok = not amo_bad and not bad and unsat > 0 and dt < 120
    report(5, ok, f"AMO 3..12 failures {amo_bad}; auto 500 formulas: {bad} failures, "
                  f"{unsat} unsat, {reencoded} with aux; {dt:.1f}s (<120s)")
    assert ok


def test_c06_simplification():
    t0 = time.perf_counter()
    bad_simple = bad_enc = bad_size = unsat = 0
    for f in _corpus_500():
        s = simplify_to_simple(f)
        n = f.num_vars
        if s.unsat:
            unsat += 1
            bad_simple += s.core.clauses != frozenset([()])
        else:
            bad_simple += is_simple(s.core) is not None
        out, _ = reassemble(s.core, s)
        bad_enc += not check_encoding(f, out, f.variables() | out.variables()).ok
        bad_size += len(out) - len(s.core) > 4 * n + 2 * len(s.forced)
    dt = time.perf_counter() - t0
    ok = not (bad_simple or bad_enc or bad_size) and dt < 60
    report(6, ok, f"not simple {bad_simple}, not encoding {bad_enc}, overhead over bound "
                  f"{bad_size}, unsat {unsat}/500; {dt:.1f}s (<60s)")
    assert ok


def test_c07_characterization():
    rng = random.Random(7)
    t0 = time.perf_counter()
    steps = bad = 0
    for _ in range(200):
        g = random_polarized(rng, rng.randint(2, 10))
        r = prn_of(g)
        for _ in range(rng.randint(1, 8)):
            b = random_coherent(rng, r)
            if b is None:
                break
            X, Y = b
            C = [(-x,) for x in X]
            D = [(-y if r.pol(X[0], y) == NEG else y,) for y in Y]
            expected = apply_bva_step(formula_of(r), C, D, fresh=r.max_id() + 1)
            r = reduce_biclique(r, X, Y)
            steps += 1
            bad += not (formula_of(r) == expected and check_strict(r) is None
                        and check_realizes(r, g) is None)
    dt = time.perf_counter() - t0
    ok = not bad and steps > 200 and dt < 30
    report(7, ok, f"{steps} reduction steps over 200 sequences, {bad} failing; {dt:.1f}s (<30s)")
    assert ok


def test_c08_indepset_fragment_ratio():
    r600 = [fragment_ratio(600, 0.5, seed)[0] for seed in range(5)]
    r1200 = [fragment_ratio(1200, 0.5, seed)[0] for seed in range(5)]
    _, ms3000 = fragment_ratio(3000, 0.5, 0)
    m600, m1200 = float(np.mean(r600)), float(np.mean(r1200))
    ok = 0.40 <= m600 <= 0.60 and m1200 <= m600 and ms3000 < 10000
    report(8, ok, f"mean ratio n=600 {m600:.3f} in [0.40,0.60], n=1200 {m1200:.3f} <= n=600; "
                  f"n=3000 reencode {ms3000 / 1000:.2f}s (<10s)")
    assert ok


def test_c09_asymptotic_trend():
    vals = []
    for n in (256, 512, 1024):
        sizes = []
        for seed in range(3):
            u, v = gnp_edges(n, 0.5, trial_rng(seed, 0))
            d = Diagram(frozenset(range(1, n + 1)), frozenset(zip(u.tolist(), v.tolist())), frozenset())
            sizes.append(nechiporuk_monotone(d).num_edges())
        vals.append(float(np.mean(sizes)) * math.log2(n) / n ** 2)
    ok = vals[0] >= vals[1] >= vals[2]
    report(9, ok, "size*lg(n)/n^2 at n=256,512,1024: " + ", ".join(f"{x:.4f}" for x in vals))
    assert ok


def test_c10_complexity_envelope():
    ns = (500, 1000, 2000, 4000)

    def dense(n):
        u, v = gnp_edges(n, 0.5, trial_rng(10, 0))
        return Formula.from_canonical(frozenset(zip((-u).tolist(), (-v).tolist())), n)

    auto_reencode(dense(300))  # warm up lazy imports
    times = []
    for n in ns:
        best = math.inf
        for _ in range(2):
            # fresh object each time so no cached arrays carry over
            f = dense(n)
            t0 = time.perf_counter()
            out, aux, rep = auto_reencode(f)
            best = min(best, time.perf_counter() - t0)
            assert len(out) < len(f)
            del f, out
        times.append(best)
    slope = float(np.polyfit(np.log(ns), np.log(times), 1)[0])
    ok = slope <= 2.3
    report(10, ok, f"log-log slope {slope:.2f} (<=2.3); times " +
           ", ".join(f"{n}:{t:.2f}s" for n, t in zip(ns, times)))
    assert ok

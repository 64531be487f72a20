"""Acceptance criteria 1-10, each with its runtime budget.

Every check prints one ``CRITERION n: PASS|FAIL`` line (collected in the
pytest summary).  Run ``python3 tests/test_acceptance.py`` to print the lines
without pytest.
"""

from __future__ import annotations

import math
import random
import time

import pytest
from gmpy2 import mpq

from monodimer import corpus, trees
from monodimer.decay import approx_z, derive_params, log_error
from monodimer.exact import ComplexExact, ZeroPartitionFunction, z_deletion, z_enumerate, z_exact, zero_free_check
from monodimer.gadgets.bootstrap import build_vertex_gadget_fast
from monodimer.gadgets.cover import iterate_cover_maps, make_cover_system
from monodimer.gadgets.perfect import build_minus_one_tree, build_quarter_edge_gadget, quarter_base, quarter_star
from monodimer.graph import check_profile, path_graph, random_graph
from monodimer.metric import ConformalDensity, contraction_sweep, segment_length
from monodimer.reduction import (GAMMA0, ReductionState, binary_search_ratio, build_reduction_instance,
                                 path_partition_values)
from monodimer.saw import godsil_check

ORACLE_GAMMAS = [mpq(1), mpq(-1, 3), mpq(5, 7), ComplexExact(0, 1), ComplexExact(mpq(-1, 2), 2)]
GODSIL_GAMMAS = [mpq(1, 2), mpq(2), ComplexExact(0, 1), ComplexExact(-1, 1), mpq(-1, 20)]
FPTAS_GAMMAS = [ComplexExact(0, 1), ComplexExact(1, 1), ComplexExact(mpq(-1, 2), 1), ComplexExact(mpq(1, 4)),
                ComplexExact(3)]
# (gamma, Delta) configurations of the contraction sweep
SWEEP_CONFIGS = [(g, d) for g in (1j, 1 + 1j, -2 + 1j, 0.25, 5.0) for d in (3, 4)]


def criterion_1():
    graphs = corpus.small_graphs(8) + corpus.random_graphs(100, 12, seed=1)
    bad = sum(z_deletion(g, gm) != z_enumerate(g, gm) for g in graphs for gm in ORACLE_GAMMAS)
    return bad == 0, f"{len(graphs)} graphs x {len(ORACLE_GAMMAS)} gammas, {bad} mismatches"


def criterion_2():
    graphs = corpus.small_graphs(7)
    checked = nonzero = skipped = 0
    for g in graphs:
        for v in range(g.vertex_count):
            for gm in GODSIL_GAMMAS:
                try:
                    r = godsil_check(g, v, gm)
                except ZeroPartitionFunction:
                    skipped += 1
                    continue
                checked += 1
                nonzero += r != 0
    return nonzero == 0, f"{checked} residuals checked, {nonzero} nonzero, {skipped} skipped (Z = 0)"


def _zero_free_samples(delta: int, rng: random.Random) -> list:
    end = mpq(-1, 4 * (delta - 1))
    reals = [end + (3 - end) * mpq(k, 9) for k in range(10)]
    cplx = []
    while len(cplx) < 10:
        im = mpq(rng.randint(-40, 40), 10)
        if im:
            cplx.append(ComplexExact(mpq(rng.randint(-60, 30), 10), im))
    return [ComplexExact(x) for x in reals] + cplx


def criterion_3():
    rng = random.Random(3)
    graphs = 0
    zeros = negatives = 0
    for delta in (3, 4):
        samples = _zero_free_samples(delta, rng)
        for _ in range(25):
            g = random_graph(rng.randint(6, 14), 0.4, rng, max_degree=delta)
            graphs += 1
            for gm in samples:
                verdict = zero_free_check(g, gm)
                if verdict.in_forbidden_ray:
                    raise AssertionError("sample landed on the excluded ray")
                zeros += not verdict.consistent
                if gm.im == 0:
                    negatives += not verdict.z.re > 0
    ok = zeros == 0 and negatives == 0
    return ok, f"{graphs} graphs x 20 samples, {zeros} zeros, {negatives} non-positive real values"


def criterion_4():
    rng = random.Random(4)
    worst = 0.0
    runs = 0
    for i in range(30):
        delta = 2 if i % 3 == 0 else 3
        g = random_graph(rng.randint(6, 14), 0.35, rng, max_degree=delta)
        family = (max(g.max_degree, 2), 1, 1)
        if not check_profile(g, family[0], 1, 1, max(g.vertex_count, 3)).passed:
            return False, f"graph {i} is outside the family {family}"
        for gm in FPTAS_GAMMAS:
            ze = z_exact(g, gm)
            for eps in (0.1, 0.01):
                r = approx_z(g, gm, eps, family)
                worst = max(worst, abs(log_error(r.z_hat, ze)) / eps)
                runs += 1
    return worst <= 1, f"{runs} runs, worst |log(Z_hat/Z)|/eps = {worst:.3g}"


def criterion_5():
    worst = 0.0
    for gm, delta in SWEEP_CONFIGS:
        params = derive_params(gm, (delta, 1, 1), 10, 0.1)
        worst = max(worst, contraction_sweep(params, 10_000, seed=delta))
    return worst <= 1 + 1e-9, f"{len(SWEEP_CONFIGS)} configs x 10^4 draws, max residual {worst:.6f}"


def criterion_6():
    x1, x2 = 0.5, 7.0
    length = segment_length(x1, x2, ConformalDensity.poincare(), 100_000)
    err = abs(length - math.log(x2 / x1))
    return err <= 1e-6, f"|quadrature - ln(x2/x1)| = {err:.2e}"


def criterion_7():
    for lam in (0, 1, mpq(-3, 7), mpq(22, 7)):
        g = build_minus_one_tree(lam)
        if g.achieved["ratio"] != lam or not g.verify():
            return False, f"tree for {lam} is not perfect"
    q = build_quarter_edge_gadget()
    base = trees.pair_values(quarter_base(), mpq(-1, 4), normalize=False)
    star = trees.pair_values(quarter_star(), mpq(-1, 4), normalize=False)
    if not (q.achieved == {"uv": -1, "u~v": 0, "~uv": 0} and q.verify()):
        return False, "quarter gadget certificate differs from (0, 0, -1)"
    if base[0] != 0 or base[1] == 0 or star != (mpq(1, 2), mpq(1, 4)):
        return False, f"intermediate values {base}, {star}"
    eps = mpq(1, 2 ** 20)
    sizes = []
    for lam in (5, -2, 1):
        g = build_vertex_gadget_fast(-1, 3, lam, eps)
        if not (g.error <= eps and g.max_degree <= 3 and g.verify(engine_limit=10 ** 6)):
            return False, f"vertex gadget for {lam} failed"
        sizes.append(g.vertex_count)
    return True, f"4 perfect trees, quarter gadget exact, vertex gadgets with {sizes} vertices verified"


def criterion_8():
    systems = [make_cover_system(g) for g in (-1, mpq(-1, 10), mpq(-7, 3))]
    for s in systems:
        if s.verify() != {"contraction": True, "covering": True, "robust": True}:
            return False, f"invariants fail at {s.gamma}"
    rng = random.Random(8)
    for i in range(100):
        s = systems[i % 3]
        lo, hi = s.interval
        y0 = lo + (hi - lo) * mpq(rng.randrange(10 ** 6), 10 ** 6)
        y = lo + (hi - lo) * mpq(rng.randrange(10 ** 6), 10 ** 6)
        eps = s.r / 10 ** rng.randint(1, 30)
        y_hat, _ = iterate_cover_maps(s, y0, y, eps)
        if abs(y_hat - y) > eps or not s.contains(y_hat):
            return False, f"trial {i} missed its target"
    return True, "3 systems verified exactly, 100/100 trials within eps"


def criterion_9():
    vals = path_partition_values(60)
    pattern = [1, 0, -1, -1, 0, 1]
    bad = [n for n in range(1, 61) if vals[n] != pattern[(n - 1) % 6]]
    bad += [n for n in range(1, 9) if z_enumerate(path_graph(n), -1) != vals[n]]
    return not bad, f"n <= 60 checked, mismatches at {bad}"


def criterion_10():
    rng = random.Random(10)
    done = 0
    while done < 20:
        g = random_graph(rng.randint(3, 10), 0.4, rng, max_degree=3)
        if not g.edge_count:
            continue
        e = g.sorted_edges[rng.randrange(g.edge_count)]
        truth = z_exact(g, GAMMA0) / z_exact(g.remove_edge(*e), GAMMA0)
        for kind, noise in (("sign_only", "none"), ("norm_factor_1_01", "squeeze"),
                            ("norm_factor_1_01", "alternating"), ("norm_factor_1_01", "random")):
            r = binary_search_ratio(g, e, kind, noise=noise, seed=done)
            r.state.check()     # target kept, width shrinks by >= 7/8 per round
            if r.ratio is None or ComplexExact(r.ratio) != truth:
                return False, f"graph {done} ({kind}, {noise}) reconstructed {r.ratio}, want {truth}"
        done += 1
    composed = 0
    for g in (path_graph(2), path_graph(3)):
        st = ReductionState.for_graph(g, (0, 1))
        for R in (st.r_goal, st.r_goal / 2, st.r_goal - 1, mpq(0)):
            inst = build_reduction_instance(g, (0, 1), R, mpq(1, 1000))
            if not inst.within_bound() or inst.f_direct != inst.f_value:
                return False, f"composed {g} at R={R}: deviation {inst.deviation}"
            composed += 1
    return True, f"20 graphs x 4 oracle variants exact, {composed} composed instances within eps'"


CRITERIA = [
    (1, criterion_1, 120), (2, criterion_2, 120), (3, criterion_3, 120), (4, criterion_4, 300),
    (5, criterion_5, 60), (6, criterion_6, 1), (7, criterion_7, 300), (8, criterion_8, 120),
    (9, criterion_9, 1), (10, criterion_10, 300),
]


def run_criterion(num, fn, budget):
    start = time.perf_counter()
    passed, detail = fn()
    seconds = time.perf_counter() - start
    within = seconds < budget
    status = "PASS" if passed and within else "FAIL"
    line = f"CRITERION {num}: {status} ({detail}; {seconds:.2f} s of {budget} s)"
    return passed, within, line


@pytest.mark.acceptance
@pytest.mark.parametrize("num,fn,budget", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, fn, budget, acceptance_log):
    passed, within, line = run_criterion(num, fn, budget)
    print(line)
    acceptance_log.append(line)
    assert passed, line
    assert within, line


if __name__ == "__main__":
    for crit in CRITERIA:
        print(run_criterion(*crit)[2], flush=True)

import cmath
import math
import random

import pytest
from gmpy2 import mpq

from monodimer.decay import (DomainViolation, ForbiddenActivity, approx_p, approx_z, derive_params,
                             log_error)
from monodimer.exact import ComplexExact, p_unmatched, z_exact
from monodimer.graph import Graph, check_profile, cycle_graph, path_graph, random_graph


def test_params_at_i():
    p = derive_params(1j, (3, 1, 1), 10, 0.1)
    assert p.gamma_hat == pytest.approx(2)
    assert p.Q.real == pytest.approx(math.sqrt(2) / 2)
    assert p.gamma_hat == pytest.approx(1 / p.Q.real ** 2, rel=1e-12)
    assert (p.D, p.p, p.q) == pytest.approx((3, 1.25, 5))
    # alpha = 3^{-1/5} (1 - 2/(1 + 5)); independent evaluation of the closed form
    assert p.alpha == pytest.approx(3 ** -0.2 * (2 / 3), rel=1e-14)
    assert p.rate == pytest.approx(2 / 3, rel=1e-14)
    assert 1 / p.p + 1 / p.q == pytest.approx(1)
    assert (1 / p.Q) ** 2 == pytest.approx(1j)


def test_params_positive_real():
    p = derive_params(1, (3, 1, 1), 10, 0.1)
    assert p.Q == pytest.approx(1) and p.gamma_hat == pytest.approx(1)


@pytest.mark.parametrize("gamma", [-1, -0.25, ComplexExact(-3), "-1/2 0"])
def test_negative_axis_rejected(gamma):
    with pytest.raises(ForbiddenActivity):
        derive_params(gamma, (3, 1, 1), 5, 0.1)
    with pytest.raises(ForbiddenActivity):
        approx_z(path_graph(3), gamma, 0.1, (3, 1, 1))


def test_bad_eps_rejected():
    with pytest.raises(ValueError):
        derive_params(1j, (3, 1, 1), 5, 1.0)


def test_depth_meets_both_conditions():
    for gamma in (1j, 1 + 1j, 3, 0.25, -0.5 + 1j):
        for n in (2, 10, 50):
            p = derive_params(gamma, (3, 1.5, 2), n, 0.05)
            spread = (abs(p.Q) + n / p.Q.real) ** 2
            target = p.Q.real * p.delta_per_vertex / (2 * spread)
            head = (p.M / p.L) * p.c_hat ** (1 / p.q)
            assert p.ell >= 1.5 * math.log(n)
            assert head * p.rate ** p.ell <= target
            if p.ell - 1 >= 1.5 * math.log(n):
                assert head * p.rate ** (p.ell - 1) > target


def test_single_vertex_and_edge():
    p = derive_params(1j, (3, 1, 1), 1, 0.01)
    assert approx_p(Graph(1), 0, 1j, p).value == pytest.approx(1)
    p = derive_params(1j, (3, 1, 1), 2, 0.01)
    est = approx_p(path_graph(2), 0, 1j, p).value
    assert abs(est / (1 / (1 + 1j)) - 1) <= p.delta_per_vertex / 2


def test_ratio_on_random_graph():
    g = random_graph(12, 0.4, random.Random(8), max_degree=3)
    gam = 0.5 + 0.5j
    p = derive_params(gam, (3, 1, 1), g.vertex_count, 0.1)
    exact = complex(p_unmatched(g, 0, ComplexExact(mpq(1, 2), mpq(1, 2))))
    assert abs(approx_p(g, 0, gam, p).value / exact - 1) <= p.delta_per_vertex / 2


def test_shallow_truncation_still_close():
    # depth 4 on a cycle of 12: the truncation bites, error shrinks with depth
    g = cycle_graph(12)
    p = derive_params(1j, (2, 1, 1), 12, 0.1)
    exact = complex(p_unmatched(g, 0, ComplexExact(0, 1)))
    errs = [abs(approx_p(g, 0, 1j, p, ell=d).value - exact) for d in (2, 4, 6, 8, 10)]
    assert errs[-1] < errs[0]
    assert errs[-1] < 1e-2


def test_approx_z_examples():
    assert approx_z(Graph(0), 1j, 0.1, (3, 1, 1)).z_hat == 1
    r = approx_z(path_graph(2), 1j, 0.01, (3, 1, 1))
    assert abs(cmath.log(r.z_hat / (1 + 1j))) <= 0.01
    g = cycle_graph(6)
    r = approx_z(g, 2, 0.05, (2, 1, 1))
    assert abs(log_error(r.z_hat, z_exact(g, 2))) <= 0.05
    rec = r.to_record()
    assert rec["ell"] == r.params.ell and len(rec["saw_nodes"]) == 6


def test_high_precision_mode_matches_float():
    g = random_graph(9, 0.4, random.Random(3), max_degree=3)
    a = approx_z(g, 1 + 1j, 0.05, (3, 1, 1)).z_hat
    b = approx_z(g, 1 + 1j, 0.05, (3, 1, 1), dps=40).z_hat
    assert abs(a - b) <= 1e-10 * abs(b)


def test_telescoping_identity_exact():
    """prod_j p_{v_j}(G with v_1..v_{j-1} removed) * Z_G = 1, exactly."""
    rng = random.Random(6)
    for _ in range(15):
        g = random_graph(rng.randint(1, 8), 0.45, rng)
        gam = ComplexExact(mpq(1, 3), 1)
        prod = ComplexExact(1)
        for j in range(g.vertex_count):
            rest = g.induced(range(j, g.vertex_count))[0]
            prod = prod * p_unmatched(rest, 0, gam)
        assert prod * z_exact(g, gam) == 1


def test_family_profiles_used_in_tests_hold():
    rng = random.Random(10)
    for _ in range(10):
        g = random_graph(14, 0.35, rng, max_degree=3)
        assert check_profile(g, 3, 1, 1, 14).passed
        h = random_graph(14, 0.3, rng, max_degree=2)
        assert check_profile(h, 2, 1, 1, 14).passed


def test_domain_check_catches_corruption():
    p = derive_params(1j, (3, 1, 1), 4, 0.1)
    bad = p.__class__(**{**p.__dict__, "Q": -p.Q})   # wrong branch of the square root
    with pytest.raises(DomainViolation):
        approx_p(path_graph(4), 0, 1j, bad)

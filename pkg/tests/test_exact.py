import random

import pytest
from gmpy2 import mpq

from monodimer import corpus
from monodimer.exact import (ComplexExact, ZeroPartitionFunction, match_summary, matching_polynomial,
                             p_unmatched, parse_complex, simplest_rational, to_rational,
                             z_conditioned, z_deletion, z_enumerate, z_exact, zero_free_check)
from monodimer.graph import Graph, complete_graph, cycle_graph, path_graph, star_graph


def test_to_rational_inputs():
    assert to_rational("-3/4") == mpq(-3, 4)
    assert to_rational("0.1") == mpq(1, 10)
    with pytest.raises(TypeError):
        to_rational(0.1)


def test_parse_complex_round_trip():
    z = parse_complex("-1/2 3/7")
    assert z == ComplexExact(mpq(-1, 2), mpq(3, 7))
    assert parse_complex(z.to_pair_text()) == z


def test_small_values():
    assert z_exact(Graph(0), 5) == 1
    assert z_exact(path_graph(2), ComplexExact(0, 1)) == ComplexExact(1, 1)
    # triangle: 1 + 3 gamma
    assert z_exact(complete_graph(3), ComplexExact(1, 2)) == ComplexExact(4, 6)
    # paths at -1 follow the period-six pattern
    assert [z_exact(path_graph(n), -1) for n in range(1, 7)] == [1, 0, -1, -1, 0, 1]


def test_matching_polynomial_counts():
    # K4 has 6 edges and 3 perfect matchings
    assert matching_polynomial(complete_graph(4)) == (1, 6, 3)
    assert matching_polynomial(cycle_graph(6)) == (1, 6, 9, 2)


def test_three_routes_agree():
    rng = random.Random(7)
    gammas = [mpq(2, 3), ComplexExact(-1, 1), mpq(-1, 5)]
    for g in corpus.random_graphs(15, 9, seed=3):
        for gam in gammas:
            a = z_exact(g, gam)
            assert a == z_deletion(g, gam) == z_enumerate(g, gam)


def test_conditioned_values_partition_z():
    g = cycle_graph(5)
    gam = mpq(3, 2)
    s = match_summary(g, gam, 0, 2)
    assert sum((s.pairwise[k] for k in s.pairwise), ComplexExact(0)) == s.z
    assert z_conditioned(g, gam, {0: "unmatched"}) == s.z_not_u


def test_p_unmatched_and_zero():
    assert p_unmatched(star_graph(2), 0, 1) == mpq(1, 3)
    with pytest.raises(ZeroPartitionFunction):
        p_unmatched(path_graph(2), 0, -1)


def test_zero_free_check_flags_ray():
    v = zero_free_check(star_graph(3), mpq(-1, 3))   # 1 + 3 gamma = 0 on the ray
    assert v.in_forbidden_ray and v.consistent and not v.z
    v = zero_free_check(star_graph(3), ComplexExact(-1, 1))
    assert not v.in_forbidden_ray and v.z


def brute_simplest(lo, hi):
    q = 1
    while True:
        cands = [mpq(p, q) for p in range(int(lo * q) - 2, int(hi * q) + 3) if lo <= mpq(p, q) <= hi]
        if cands:
            return min(cands, key=abs)
        q += 1


def test_simplest_rational_against_brute_force():
    rng = random.Random(11)
    for _ in range(300):
        a = mpq(rng.randint(-500, 500), rng.randint(1, 60))
        b = a + mpq(rng.randint(0, 50), rng.randint(1, 200))
        assert simplest_rational(a, b) == brute_simplest(a, b)

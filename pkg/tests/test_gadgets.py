import random

import pytest
from gmpy2 import mpq

from monodimer import trees
from monodimer.exact import match_summary, z_exact
from monodimer.graph import ary_tree, complete_graph, path_graph, star_graph
from monodimer.gadgets.bootstrap import (build_edge_gadget, build_vertex_gadget,
                                         build_vertex_gadget_fast, edge_chain_polynomials,
                                         square_root_choice)
from monodimer.gadgets.cover import (CoverError, covers, iterate_cover_maps, make_cover_system)
from monodimer.gadgets.exceptional import (DenseSearchFailure, build_exceptional_edge_minus_one,
                                           build_vertex_gadget_dense, dense_value, first_zero_height,
                                           is_exceptional, substitute_edges, substitution_constant,
                                           tree_ratio_sequence)
from monodimer.gadgets.gadget import EDGE, VERTEX, Gadget, GadgetError
from monodimer.gadgets.perfect import (build_minus_one_tree, build_quarter_edge_gadget,
                                       quarter_base, quarter_star)
from monodimer.gadgets.poly import (Polynomial, poly_perturbation_radius, ratio_perturbation_radius,
                                    sweep_deviation)


# -- perturbation radii ---------------------------------------------------------

def test_square_radius():
    (x,) = Polynomial.variables(1)
    r = poly_perturbation_radius(x * x, [1], 1)
    assert 0 < r <= mpq(1, 4)
    assert sweep_deviation(x * x, [1], r) <= 1


def test_constant_polynomial_radius():
    r = poly_perturbation_radius(Polynomial.constant(5), [], 1)
    assert r > 0


def test_product_radius():
    x, y = Polynomial.variables(2)
    r = poly_perturbation_radius(x * y, [2, 3], mpq(1, 10))
    assert sweep_deviation(x * y, [2, 3], r) <= mpq(1, 10)


def test_zero_coordinate_rejected():
    (x,) = Polynomial.variables(1)
    with pytest.raises(ValueError):
        poly_perturbation_radius(x * x, [0], 1)


def test_ratio_radius():
    (x,) = Polynomial.variables(1)
    one = Polynomial.constant(1, 1)
    r = ratio_perturbation_radius(one, x, [1], mpq(1, 2))
    assert sweep_deviation(one, [1], r, Q=x) <= mpq(1, 2)
    with pytest.raises(ZeroDivisionError):
        ratio_perturbation_radius(one, x - 1, [1], mpq(1, 2))


def test_edge_chain_radius_sweep():
    gamma = mpq(-1)
    P1, P2, P3, Q = edge_chain_polynomials(gamma)
    point = [mpq(1, 3), mpq(-3), mpq(1, 3)]
    r = ratio_perturbation_radius(P2, Q, point, mpq(1, 100))
    assert sweep_deviation(P2, point, r, Q=Q) <= mpq(1, 100)


# -- tree sequences and exceptional activities -------------------------------------

def test_tree_ratio_sequence_minus_one():
    seq = tree_ratio_sequence(-1, 3, 4)
    assert [v for _, v in seq] == [1, -1, mpq(1, 3), 3, mpq(-1, 5)]
    # cross-check the first heights on the literal binary trees
    for n in range(1, 4):
        g = ary_tree(2, n)
        assert z_exact(g.remove_vertices([0]), -1) / z_exact(g, -1) == seq[n][1]


def test_exceptional_membership():
    assert is_exceptional(mpq(-1, 2), 3)
    assert is_exceptional(mpq(-1, 4), 3)
    assert not is_exceptional(-1, 3)
    assert first_zero_height(mpq(-1, 2), 3) is not None
    assert first_zero_height(-1, 3) is None
    with pytest.raises(ValueError):
        is_exceptional(mpq(-1, 100), 3)   # inside the zero-free range


def test_exceptional_zero_is_real():
    n = first_zero_height(mpq(-1, 2), 3)
    assert z_exact(ary_tree(2, n), mpq(-1, 2)) == 0


def test_dense_gadget():
    g = build_vertex_gadget_dense(-1, 3, 3, mpq(1, 10))
    assert abs(g.achieved["ratio"] - 3) <= mpq(1, 10)
    assert g.verify()
    v0 = dense_value(mpq(-1, 3), 3, 0)
    g0 = build_vertex_gadget_dense(mpq(-1, 3), 3, v0, 0)
    assert g0.info["height"] == 0 and g0.vertex_count == 2
    with pytest.raises(ValueError):
        build_vertex_gadget_dense(mpq(-1, 2), 3, 0, mpq(1, 10))
    with pytest.raises(DenseSearchFailure):
        build_vertex_gadget_dense(-1, 3, mpq(7, 3), mpq(1, 10**30), iter_cap=50)


# -- perfect constructions ---------------------------------------------------------

@pytest.mark.parametrize("lam", [0, 1, mpq(-3, 7), mpq(22, 7), mpq(5), mpq(-2)])
def test_minus_one_trees_are_perfect(lam):
    g = build_minus_one_tree(lam)
    assert g.achieved["ratio"] == lam and g.accuracy == 0
    assert g.max_degree <= 3
    assert g.verify()


def test_minus_one_small_cases():
    assert build_minus_one_tree(0).graph == path_graph(3)
    assert build_minus_one_tree(1).graph == path_graph(4)
    assert build_minus_one_tree(0).certificate == {"z_not_u": 0, "z": -1}


def test_quarter_gadget():
    q = build_quarter_edge_gadget()
    assert q.achieved == {"uv": -1, "u~v": 0, "~uv": 0}
    assert q.verify()
    a, b = trees.pair_values(quarter_base(), mpq(-1, 4), normalize=False)
    assert a == 0 and b != 0
    assert trees.pair_values(quarter_star(), mpq(-1, 4), normalize=False) == (mpq(1, 2), mpq(1, 4))


@pytest.mark.parametrize("gamma", [mpq(-1, 2), mpq(-1, 4)])
def test_exceptional_edge_gadget(gamma):
    g = build_exceptional_edge_minus_one(gamma, 3)
    assert g.achieved == {"uv": -1, "u~v": 0, "~uv": 0}
    assert g.max_degree <= 3
    assert g.verify(engine_limit=20_000)


def test_exceptional_edge_rejects_generic():
    with pytest.raises(ValueError):
        build_exceptional_edge_minus_one(-1, 3)


@pytest.mark.parametrize("h", [path_graph(2), path_graph(3), star_graph(2)])
def test_substitution_scales_every_condition(h):
    e = build_exceptional_edge_minus_one(mpq(-1, 2), 3)
    big, _ = substitute_edges(h, e)
    c = substitution_constant(h, e)
    assert z_exact(big, mpq(-1, 2)) == c * z_exact(h, -1)
    s_big = match_summary(big, mpq(-1, 2), 0, h.vertex_count - 1)
    s_h = match_summary(h, -1, 0, h.vertex_count - 1)
    for k in s_h.pairwise:
        assert s_big.pairwise[k] == c * s_h.pairwise[k]


def test_substitution_empty_graph():
    e = build_quarter_edge_gadget()
    h = complete_graph(1)
    assert substitute_edges(h, e)[0] == h and substitution_constant(h, e) == 1


# -- cover systems -------------------------------------------------------------

def test_cover_system_minus_one():
    s = make_cover_system(-1)
    assert (s.x0, s.lam, s.slope0) == (mpq(1, 2), mpq(-3, 2), mpq(1, 4))
    assert s.checks == {"contraction": True, "covering": True, "robust": True}


@pytest.mark.parametrize("gamma", [mpq(-1, 10), mpq(-7, 3), mpq(-1, 4)])
def test_cover_system_verifies(gamma):
    s = make_cover_system(gamma)
    assert s.contraction < 1 and s.robust_contraction < 1


def test_cover_rejects_positive():
    with pytest.raises(ValueError):
        make_cover_system(1)


def test_covers_sweep():
    assert covers([(0, 1), (mpq(1, 2), 2)], 0, 2)
    assert not covers([(0, 1), (mpq(3, 2), 2)], 0, 2)


def test_broken_grid_is_caught():
    s = make_cover_system(-1)
    s.lambdas = [l + 100 for l in s.lambdas]
    with pytest.raises(CoverError):
        s.verify()


def test_iterate_cover_maps():
    s = make_cover_system(-1)
    y, w = iterate_cover_maps(s, s.x0, s.x0, s.r)
    assert w == [] and y == s.x0
    eps = s.r / 10**6
    yh, word = iterate_cover_maps(s, s.x0, s.x0 + s.r / 2, eps)
    assert abs(yh - (s.x0 + s.r / 2)) <= eps and 0 < len(word) < 40
    rng = random.Random(1)
    lo, hi = s.interval
    for _ in range(30):
        y0 = lo + (hi - lo) * mpq(rng.randrange(1000), 999)
        y = lo + (hi - lo) * mpq(rng.randrange(1000), 999)
        e = s.r / 2 ** rng.randint(1, 60)
        yh, _ = iterate_cover_maps(s, y0, y, e)
        assert abs(yh - y) <= e and s.contains(yh)


# -- bootstrap and edge gadgets -------------------------------------------------------

@pytest.mark.parametrize("lam", [5, -2, 1, mpq(1, 2)])
def test_fast_gadget_moderate_accuracy(lam):
    eps = mpq(1, 2**8)
    g = build_vertex_gadget_fast(-1, 3, lam, eps)
    assert abs(g.achieved["ratio"] - lam) <= eps
    assert g.max_degree <= 3
    assert g.verify()


def test_fast_gadget_generic_gamma():
    g = build_vertex_gadget_fast(mpq(-7, 3), 3, 5, mpq(1, 2**20))
    assert abs(g.achieved["ratio"] - 5) <= mpq(1, 2**20)
    assert g.info["auxiliary"] == "dense"


@pytest.mark.slow
def test_fast_gadget_exceptional_gamma():
    g = build_vertex_gadget_fast(mpq(-1, 2), 3, 0, mpq(1, 10))
    assert abs(g.achieved["ratio"]) <= mpq(1, 10)
    assert g.info["auxiliary"] == "exceptional"


def test_vertex_method_dispatch():
    assert build_vertex_gadget(-1, 3, mpq(2, 5), 0).info["construction"] != "bootstrap"
    with pytest.raises(ValueError):
        build_vertex_gadget(-1, 3, 1, 0, method="nope")


def test_square_root_choice():
    s = square_root_choice(mpq(1, 10), mpq(1, 10**6))
    assert s > 0 and abs(s * s - mpq(1, 10)) <= mpq(1, 10**6)
    assert square_root_choice(0, mpq(1, 100)) > 0


@pytest.mark.parametrize("gp,eps", [(mpq(-1, 10), mpq(1, 100)), (0, mpq(1, 100)), (mpq(-3, 7), mpq(1, 50))])
def test_edge_gadget_minus_one(gp, eps):
    g = build_edge_gadget(-1, 3, gp, eps)
    assert abs(g.achieved["uv"] - gp) <= eps
    assert abs(g.achieved["u~v"]) <= eps and abs(g.achieved["~uv"]) <= eps
    assert g.terminal_distance() % 2 == 0 and g.terminal_distance() >= 2
    assert g.verify(engine_limit=20_000)


def test_edge_gadget_generic_gamma():
    g = build_edge_gadget(mpq(-7, 3), 3, mpq(-1, 10), mpq(1, 100))
    assert abs(g.achieved["uv"] + mpq(1, 10)) <= mpq(1, 100)
    with pytest.raises(ValueError):
        build_edge_gadget(-1, 3, mpq(1, 10), mpq(1, 100))


# -- records ------------------------------------------------------------------

def test_gadget_json_round_trip():
    for g in (build_minus_one_tree(mpq(-3, 7)), build_quarter_edge_gadget()):
        back = Gadget.from_json(g.to_json())
        assert back.same_as(g) and back.verify()


def test_tampered_certificate_detected():
    g = build_minus_one_tree(mpq(22, 7))
    g.achieved = {"ratio": mpq(3)}
    with pytest.raises(GadgetError):
        g.verify()


def test_accuracy_enforced():
    tree = build_minus_one_tree(2).tree
    with pytest.raises(GadgetError):
        Gadget.from_tree(tree, VERTEX, -1, 3, mpq(1, 2))
    assert Gadget.from_tree(tree, VERTEX, -1, 3, 1).error == 1

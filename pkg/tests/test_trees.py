import random

from gmpy2 import mpq

from monodimer import trees
from monodimer.exact import match_summary, p_unmatched, z_exact
from monodimer.graph import random_graph
from monodimer.trees import LEAF, Node


def random_tree_graph(n, rng):
    from monodimer.graph import Graph
    return Graph(n, [(rng.randrange(i), i) for i in range(1, n)])


def test_shared_subtrees_count_every_copy():
    leafy = Node([LEAF, LEAF])
    root = Node([leafy, leafy, leafy])
    assert trees.node_count(root) == 10
    assert trees.distinct_nodes(root) == 3
    assert trees.height(root) == 2


def test_pair_values_match_engine():
    rng = random.Random(3)
    for _ in range(20):
        g = random_tree_graph(rng.randint(1, 15), rng)
        root = trees.from_graph(g, 0)
        gam = mpq(rng.randint(-5, 5) or 1, rng.randint(1, 4))
        a, b = trees.pair_values(root, gam, normalize=False)
        assert b == z_exact(g, gam).re
        assert a == z_exact(g.remove_vertices([0]), gam).re


def test_materialize_round_trip():
    rng = random.Random(4)
    g = random_tree_graph(12, rng)
    root = trees.from_graph(g, 0, {7: "v"})
    h, marks = trees.materialize(root)
    assert h.vertex_count == 12 and h.is_forest()
    assert trees.mark_depth(root, "v") == len(trees.mark_paths(root)["v"]) - 1


def test_conditioned_table_matches_summary():
    rng = random.Random(5)
    for _ in range(10):
        g = random_tree_graph(10, rng)
        root = trees.from_graph(g, 0, {9: "v"})
        gam = mpq(-2, 3)
        tab = trees.conditioned_table(root, gam, ["v"], normalize=False)
        s = match_summary(g, gam, 0, 9)
        assert trees.condition_sum(tab, root=True, v=True) == s.pairwise["uv"].re
        assert trees.condition_sum(tab, root=False, v=False) == s.pairwise["~u~v"].re

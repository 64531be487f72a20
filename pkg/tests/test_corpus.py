from collections import Counter

from monodimer import corpus


def test_counts_per_order():
    sizes = Counter(g.vertex_count for g in corpus.small_graphs(8))
    # numbers of graphs up to isomorphism on 0..8 vertices
    assert [sizes[n] for n in range(9)] == [1, 1, 2, 4, 11, 34, 156, 1044, 12346]


def test_random_graphs_reproducible():
    a = corpus.random_graphs(5, 10, seed=9, max_degree=3)
    b = corpus.random_graphs(5, 10, seed=9, max_degree=3)
    assert a == b and all(g.max_degree <= 3 for g in a)


def test_networkx_round_trip():
    g = corpus.small_graphs(5)[-1]
    assert corpus.from_networkx(corpus.to_networkx(g)) == g

"""Graph corpora for the oracle tests.

All graphs on at most eight vertices up to isomorphism are stored as graph6
lines in ``data/graphs_le8.g6``.  The file is produced by
:func:`generate_up_to_iso`: the networkx atlas supplies every graph on up to
seven vertices, and eight-vertex graphs are obtained by adding one vertex to
each seven-vertex graph in every possible way and discarding isomorphic
duplicates.
"""

from __future__ import annotations

import random
from functools import lru_cache
from importlib import resources

import networkx as nx

from .graph import Graph, random_graph

# Number of unlabelled graphs on n vertices, n = 0..8.
KNOWN_COUNTS = (1, 1, 2, 4, 11, 34, 156, 1044, 12346)


def from_networkx(h: nx.Graph) -> Graph:
    nodes = sorted(h.nodes())
    idx = {v: i for i, v in enumerate(nodes)}
    return Graph(len(nodes), [(idx[u], idx[v]) for u, v in h.edges()])


def to_networkx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.vertex_count))
    h.add_edges_from(g.edges)
    return h


def _invariant(h: nx.Graph) -> tuple:
    deg = dict(h.degree())
    tri = nx.triangles(h)
    return tuple(sorted((deg[v], tri[v], tuple(sorted(deg[w] for w in h[v]))) for v in h))


def generate_up_to_iso(max_n: int = 8) -> list[nx.Graph]:
    atlas = [h for h in nx.graph_atlas_g() if h.number_of_nodes() <= min(max_n, 7)]
    out = list(atlas)
    if max_n < 8:
        return out
    buckets: dict[tuple, list[nx.Graph]] = {}
    for base in (h for h in atlas if h.number_of_nodes() == 7):
        for subset in range(1 << 7):
            h = base.copy()
            h.add_node(7)
            h.add_edges_from((7, i) for i in range(7) if (subset >> i) & 1)
            bucket = buckets.setdefault(_invariant(h), [])
            if not any(nx.is_isomorphic(h, rep) for rep in bucket):
                bucket.append(h)
    for bucket in buckets.values():
        out.extend(bucket)
    return out


def write_corpus(path) -> None:
    with open(path, "wb") as fh:
        for h in generate_up_to_iso(8):
            fh.write(nx.to_graph6_bytes(h, header=False))


@lru_cache(maxsize=1)
def _stored() -> tuple[Graph, ...]:
    blob = resources.files("monodimer").joinpath("data/graphs_le8.g6").read_bytes()
    return tuple(from_networkx(nx.from_graph6_bytes(line))
                 for line in blob.splitlines() if line.strip())


def small_graphs(max_n: int = 8) -> list[Graph]:
    """Every graph on at most ``max_n`` <= 8 vertices, one per isomorphism class."""
    if max_n > 8:
        raise ValueError("the stored corpus stops at eight vertices")
    return [g for g in _stored() if g.vertex_count <= max_n]


def random_graphs(count: int, n: int, seed: int, p: float = 0.35,
                  max_degree: int | None = None) -> list[Graph]:
    rng = random.Random(seed)
    return [random_graph(n, p, rng, max_degree) for _ in range(count)]

"""Immutable undirected simple graphs, path counting and growth profiles.

Vertices are the integers ``0..n-1``.  Every derived graph (vertex or edge
deletion, relabelling) is a new value; nothing mutates in place.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence


class GraphFormatError(ValueError):
    """Raised for malformed edge-list text; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _norm_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on vertices ``0..vertex_count-1``.

    Parameters
    ----------
    vertex_count : int
        Number of vertices.
    edges : iterable of pairs
        Unordered vertex pairs.  Self-loops, repeated edges and out-of-range
        endpoints raise ``ValueError``.
    labels : mapping, optional
        Free-form text attached to vertices (not used by any algorithm).
    """

    vertex_count: int
    edges: frozenset = field(default_factory=frozenset)
    labels: Mapping[int, str] | None = None

    def __init__(self, vertex_count: int, edges: Iterable[Sequence[int]] = (),
                 labels: Mapping[int, str] | None = None):
        n = int(vertex_count)
        if n < 0:
            raise ValueError("vertex_count must be non-negative")
        seen: set[tuple[int, int]] = set()
        for e in edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            key = _norm_edge(u, v)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "vertex_count", n)
        object.__setattr__(self, "edges", frozenset(seen))
        object.__setattr__(self, "labels", dict(labels) if labels else None)

    # -- basic structure -------------------------------------------------
    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        """Neighbourhood of each vertex as a bitmask."""
        return tuple(sum(1 << w for w in a) for a in self.adjacency)

    @cached_property
    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        self._check_vertex(v)
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    @cached_property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self.edges

    def _check_vertex(self, v: int) -> None:
        if not (0 <= v < self.vertex_count):
            raise IndexError(f"vertex {v} out of range 0..{self.vertex_count - 1}")

    # -- derived graphs --------------------------------------------------
    def induced(self, keep: Iterable[int]) -> tuple["Graph", dict[int, int]]:
        """Subgraph induced by ``keep``, renumbered in increasing order.

        Returns the new graph and the map old id -> new id.
        """
        kept = sorted(set(keep))
        for v in kept:
            self._check_vertex(v)
        relabel = {v: i for i, v in enumerate(kept)}
        edges = [(relabel[u], relabel[v]) for u, v in self.edges
                 if u in relabel and v in relabel]
        return Graph(len(kept), edges), relabel

    def remove_vertices(self, vs: Iterable[int]) -> "Graph":
        drop = set(vs)
        return self.induced(v for v in range(self.vertex_count) if v not in drop)[0]

    def remove_edge(self, u: int, v: int) -> "Graph":
        key = _norm_edge(u, v)
        if key not in self.edges:
            raise KeyError(f"edge {key} not in graph")
        return Graph(self.vertex_count, self.edges - {key}, self.labels)

    def disjoint_union(self, other: "Graph") -> "Graph":
        off = self.vertex_count
        return Graph(off + other.vertex_count,
                     list(self.edges) + [(u + off, v + off) for u, v in other.edges])

    # -- properties ------------------------------------------------------
    def bipartition(self) -> list[int] | None:
        """A proper 2-colouring as a list of 0/1, or None if the graph has an odd cycle."""
        color = [-1] * self.vertex_count
        for s in range(self.vertex_count):
            if color[s] >= 0:
                continue
            color[s] = 0
            stack = [s]
            while stack:
                x = stack.pop()
                for y in self.adjacency[x]:
                    if color[y] < 0:
                        color[y] = 1 - color[x]
                        stack.append(y)
                    elif color[y] == color[x]:
                        return None
        return color

    def is_forest(self) -> bool:
        comps = len(self.components())
        return self.edge_count == self.vertex_count - comps

    def components(self) -> list[list[int]]:
        seen = [False] * self.vertex_count
        out = []
        for s in range(self.vertex_count):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [], [s]
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in self.adjacency[x]:
                    if not seen[y]:
                        seen[y] = True
                        stack.append(y)
            out.append(sorted(comp))
        return out

    # -- text format -----------------------------------------------------
    def to_text(self) -> str:
        lines = [f"{self.vertex_count} {self.edge_count}"]
        lines += [f"{u} {v}" for u, v in self.sorted_edges]
        return "\n".join(lines) + "\n"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.vertex_count == other.vertex_count and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.vertex_count, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.vertex_count}, m={self.edge_count})"


def parse_graph(text: str) -> Graph:
    """Parse the edge-list format: header ``n m`` then ``m`` lines ``u v``.

    Everything after ``#`` on a line is ignored, as are blank lines.  Edges
    must be written with ``u < v``.
    """
    header: tuple[int, int] | None = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected two integers, got {line!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"expected two integers, got {line!r}", lineno) from None
        if header is None:
            if a < 0 or b < 0:
                raise GraphFormatError("vertex and edge counts must be non-negative", lineno)
            header = (a, b)
            continue
        n = header[0]
        if a == b:
            raise GraphFormatError(f"self-loop at vertex {a}", lineno)
        if not (0 <= a < n and 0 <= b < n):
            raise GraphFormatError(f"endpoint out of range 0..{n - 1} in {line!r}", lineno)
        if a > b:
            raise GraphFormatError(f"edge must be written as 'u v' with u < v, got {line!r}", lineno)
        if (a, b) in seen:
            raise GraphFormatError(f"duplicate edge {a} {b}", lineno)
        seen.add((a, b))
        edges.append((a, b))
    if header is None:
        raise GraphFormatError("missing header line 'n m'")
    if len(edges) != header[1]:
        raise GraphFormatError(f"header declares {header[1]} edges but {len(edges)} were given")
    return Graph(header[0], edges)


# -- standard families ---------------------------------------------------

def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> Graph:
    """Centre 0 joined to ``leaves`` leaves."""
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def ary_tree(arity: int, height: int) -> Graph:
    """Complete ``arity``-ary tree of the given height, root 0, breadth-first ids."""
    edges = []
    level = [0]
    nxt = 1
    for _ in range(height):
        new_level = []
        for p in level:
            for _ in range(arity):
                edges.append((p, nxt))
                new_level.append(nxt)
                nxt += 1
        level = new_level
    return Graph(nxt, edges)


def random_graph(n: int, p: float, rng: random.Random, max_degree: int | None = None) -> Graph:
    """Erdos-Renyi style sample; with ``max_degree`` set, edges that would
    exceed the cap are skipped (pairs visited in random order)."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rng.shuffle(pairs)
    deg = [0] * n
    edges = []
    for u, v in pairs:
        if rng.random() >= p:
            continue
        if max_degree is not None and (deg[u] >= max_degree or deg[v] >= max_degree):
            continue
        deg[u] += 1
        deg[v] += 1
        edges.append((u, v))
    return Graph(n, edges)


# -- path counting ---------------------------------------------------------

def count_paths(g: Graph, v: int, k: int) -> int:
    """Number of ``k``-edge simple paths starting at ``v``.

    Paths are directed traversals: the start is fixed at ``v`` and two
    different vertex sequences always count separately.
    """
    g._check_vertex(v)
    if k < 0:
        raise ValueError("k must be non-negative")
    if k >= g.vertex_count:
        return 0
    return _path_counts(g, v, k)[k]


def _path_counts(g: Graph, v: int, k_max: int) -> list[int]:
    """counts[k] = N_G(v, k) for k = 0..k_max, by depth-first enumeration."""
    counts = [0] * (k_max + 1)
    masks = g.masks

    def walk(x: int, used: int, depth: int) -> None:
        counts[depth] += 1
        if depth == k_max:
            return
        free = masks[x] & ~used
        while free:
            low = free & -free
            y = low.bit_length() - 1
            walk(y, used | low, depth + 1)
            free ^= low

    walk(v, 1 << v, 0)
    return counts


@dataclass(frozen=True)
class ProfileReport:
    """Result of checking sum_{k<=l} N_G(v,k) <= c * delta**l."""

    delta: float
    a: float
    c: float
    checked_lengths: list[tuple[int, int, float]]
    passed: bool
    first_failure: tuple[int, int] | None = None

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def profile_threshold(vertex_count: int, a: float) -> int:
    """Smallest length checked: ceil(a * ln |V|) (natural logarithm)."""
    if vertex_count <= 1:
        return 0
    return math.ceil(a * math.log(vertex_count))


def check_profile(g: Graph, delta: float, a: float, c: float, l_max: int) -> ProfileReport:
    """Check the growth bound for every vertex and every length from
    ``ceil(a ln |V|)`` to ``l_max``.

    The logarithm is natural.  Lengths below 1 are skipped since the sum is
    empty there.
    """
    if delta <= 1 or a <= 0 or c <= 0:
        raise ValueError("need delta > 1, a > 0, c > 0")
    lo = profile_threshold(g.vertex_count, a)
    if l_max < lo:
        raise ValueError(f"l_max={l_max} is below the threshold ceil(a ln|V|)={lo}")
    start = max(lo, 1)
    rows: list[tuple[int, int, float]] = []
    if l_max < start or g.vertex_count == 0:
        return ProfileReport(delta, a, c, rows, True)
    per_vertex = []
    for v in range(g.vertex_count):
        counts = _path_counts(g, v, min(l_max, g.vertex_count - 1))
        counts += [0] * (l_max + 1 - len(counts))
        prefix, acc = [], 0
        for k in range(l_max + 1):
            acc += counts[k] if k >= 1 else 0
            prefix.append(acc)
        per_vertex.append(prefix)
    failure = None
    for ell in range(start, l_max + 1):
        bound = c * delta ** ell
        worst_v = max(range(g.vertex_count), key=lambda v: per_vertex[v][ell])
        worst = per_vertex[worst_v][ell]
        rows.append((ell, worst, bound))
        if failure is None and worst > bound:
            failure = (worst_v, ell)
    return ProfileReport(delta, a, c, rows, failure is None, failure)

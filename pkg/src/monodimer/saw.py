"""Self-avoiding-walk trees and the tree recurrence for unmatched ratios.

The tree rooted at ``v`` has one node per self-avoiding walk starting at
``v``; a node's children extend its walk by one unvisited neighbour.  For
the matching polynomial no boundary conditions are needed at walks that
would close a cycle: they simply stop.  The unmatched ratio of ``v`` in the
graph equals that of the root in this tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .exact import ComplexExact, ZeroPartitionFunction, as_scalar, p_unmatched
from .graph import Graph


class SawCapExceeded(RuntimeError):
    """Raised when the tree outgrows ``node_cap``; ``depth`` is the last complete level."""

    def __init__(self, node_cap: int, depth: int):
        super().__init__(f"self-avoiding-walk tree exceeds {node_cap} nodes "
                         f"(complete through depth {depth})")
        self.node_cap = node_cap
        self.depth = depth


class VanishingDenominator(ZeroDivisionError):
    def __init__(self, node: int):
        super().__init__(f"denominator 1 + gamma * sum vanishes at tree node {node}")
        self.node = node


@dataclass(frozen=True)
class SawNode:
    id: int
    parent: int | None
    depth: int
    source_vertex: int


@dataclass
class SawTree:
    """Nodes are stored in breadth-first order, so ``nodes[i].id == i`` and
    every parent precedes its children."""

    nodes: list[SawNode]
    root: int = 0
    cut_leaves: set[int] = field(default_factory=set)
    children: list[list[int]] = field(default_factory=list)
    depth_cap: int | None = None

    def __len__(self) -> int:
        return len(self.nodes)

    def level_sizes(self) -> list[int]:
        sizes: list[int] = []
        for nd in self.nodes:
            if nd.depth == len(sizes):
                sizes.append(0)
            sizes[nd.depth] += 1
        return sizes

    def to_graph(self) -> Graph:
        """The tree as a plain graph with node ids as vertices."""
        return Graph(len(self.nodes), [(nd.parent, nd.id) for nd in self.nodes[1:]])


def build_saw_tree(g: Graph, v: int, depth_cap: int | None = None,
                   node_cap: int = 1_000_000) -> SawTree:
    """Breadth-first self-avoiding-walk tree of ``g`` from ``v``.

    ``depth_cap=None`` builds the full tree.  Nodes at depth ``depth_cap``
    are recorded as cut leaves (whether or not their walk could continue).
    """
    g._check_vertex(v)
    if depth_cap is not None and depth_cap < 0:
        raise ValueError("depth_cap must be non-negative")
    if node_cap < 1:
        raise ValueError("node_cap must be positive")
    masks = g.masks
    adj = g.adjacency
    nodes = [SawNode(0, None, 0, v)]
    children: list[list[int]] = [[]]
    frontier = [(0, 1 << v)]
    cut: set[int] = set()
    depth = 0
    while frontier:
        if depth_cap is not None and depth == depth_cap:
            cut.update(i for i, _ in frontier)
            break
        nxt = []
        for i, used in frontier:
            x = nodes[i].source_vertex
            if not masks[x] & ~used:
                continue
            for y in adj[x]:
                if used >> y & 1:
                    continue
                j = len(nodes)
                if j >= node_cap:
                    raise SawCapExceeded(node_cap, depth)
                nodes.append(SawNode(j, i, depth + 1, y))
                children.append([])
                children[i].append(j)
                nxt.append((j, used | 1 << y))
        frontier = nxt
        depth += 1
    return SawTree(nodes, 0, cut, children, depth_cap)


def _unit(arithmetic: str, gamma):
    if arithmetic == "exact":
        return as_scalar(gamma), as_scalar(1)
    if arithmetic == "float":
        return complex(gamma), 1.0
    raise ValueError(f"unknown arithmetic {arithmetic!r}")


def eval_tree_ratio(t: SawTree, gamma, leaf_value=1, arithmetic: str = "exact"):
    """Bottom-up x = 1/(1 + gamma * sum of children), leaves (genuine or cut)
    taking ``leaf_value``.

    ``arithmetic`` is ``"exact"`` (rationals / ComplexExact) or ``"float"``
    (Python complex, summing children in id order).
    """
    gam, one = _unit(arithmetic, gamma)
    leaf = as_scalar(leaf_value) if arithmetic == "exact" else complex(leaf_value)
    vals: list = [None] * len(t.nodes)
    for nd in reversed(t.nodes):
        kids = t.children[nd.id]
        if not kids or nd.id in t.cut_leaves:
            vals[nd.id] = leaf
            continue
        s = vals[kids[0]]
        for k in kids[1:]:
            s = s + vals[k]
        den = one + gam * s
        if den == 0:
            raise VanishingDenominator(nd.id)
        vals[nd.id] = one / den
    out = vals[t.root]
    if arithmetic == "exact" and isinstance(out, ComplexExact):
        return out
    return ComplexExact.coerce(out) if arithmetic == "exact" else out


def walk_counts(g: Graph, v: int, k_max: int) -> list[int]:
    """Number of self-avoiding walks from ``v`` with k edges, k = 0..k_max,
    read off the tree's level sizes."""
    sizes = build_saw_tree(g, v, k_max).level_sizes()
    return sizes + [0] * (k_max + 1 - len(sizes))


def godsil_check(g: Graph, v: int, gamma, node_cap: int = 200_000):
    """Exact p_v(G) - p_root(T) with T the full self-avoiding-walk tree.

    Both sides go through the exact engine; the tree side is also evaluated
    by the recurrence and the two tree routes must agree.
    """
    t = build_saw_tree(g, v, None, node_cap)
    gam = as_scalar(gamma)
    lhs = p_unmatched(g, v, gam)
    tree_graph = t.to_graph()
    rhs = p_unmatched(tree_graph, 0, gam)
    try:
        rec = eval_tree_ratio(t, gam, 1, "exact")
    except VanishingDenominator:
        rec = None
    if rec is not None and rec != rhs:
        raise AssertionError("tree recurrence disagrees with exact engine on the tree")
    return lhs - rhs


def godsil_residuals(graphs: Sequence[Graph], gammas: Sequence) -> list:
    """Residuals over every (graph, vertex, gamma); zero partition functions are skipped."""
    out = []
    for g in graphs:
        for v in range(g.vertex_count):
            for gam in gammas:
                try:
                    out.append(godsil_check(g, v, gam))
                except ZeroPartitionFunction:
                    continue
    return out

"""Rooted trees with shared subtrees, and exact partition functions on them.

Gadget trees are often far too large to write down vertex by vertex (a
complete binary tree of height 60, say), but they are built from a handful
of repeated pieces.  A :class:`Node` lists its children; the same child
object may appear many times, so the structure is a DAG whose unfolding is
the tree.  All traversals here are iterative and memoised on node identity,
so cost is proportional to the number of distinct nodes.

Marks tag individual vertices (gadget terminals).  A marked node must be
reachable along exactly one root path.
"""

from __future__ import annotations

from typing import Callable, Iterable

from gmpy2 import mpq

from .graph import Graph


class Node:
    """A tree vertex: tuple of child nodes plus an optional text mark."""

    __slots__ = ("children", "mark")

    def __init__(self, children: Iterable["Node"] = (), mark: str | None = None):
        self.children = tuple(children)
        self.mark = mark

    def __repr__(self) -> str:
        m = f", mark={self.mark!r}" if self.mark else ""
        return f"Node(<{len(self.children)} children>{m})"


LEAF = Node()


def postorder(root: Node) -> list[Node]:
    """Distinct nodes, children before parents."""
    out: list[Node] = []
    done: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            out.append(node)
            continue
        if id(node) in done:
            continue
        done.add(id(node))
        stack.append((node, True))
        for c in node.children:
            if id(c) not in done:
                stack.append((c, False))
    return out


def node_count(root: Node) -> int:
    """Vertices of the unfolded tree (may be astronomically large)."""
    size: dict[int, int] = {}
    for x in postorder(root):
        size[id(x)] = 1 + sum(size[id(c)] for c in x.children)
    return size[id(root)]


def distinct_nodes(root: Node) -> int:
    return len(postorder(root))


def height(root: Node) -> int:
    h: dict[int, int] = {}
    for x in postorder(root):
        h[id(x)] = 1 + max((h[id(c)] for c in x.children), default=-1)
    return h[id(root)]


def max_degree(root: Node) -> int:
    """Max vertex degree; every non-root vertex has its parent as an extra neighbour."""
    best = len(root.children)
    for x in postorder(root):
        if x is not root:
            best = max(best, len(x.children) + 1)
    return best


def _contains(root: Node, marks: set[str]) -> dict[int, bool]:
    has: dict[int, bool] = {}
    for x in postorder(root):
        has[id(x)] = (x.mark in marks) or any(has[id(c)] for c in x.children)
    return has


def mark_paths(root: Node) -> dict[str, list[Node]]:
    """Root-to-node path for every mark; errors if a mark is reachable twice."""
    marks = {x.mark for x in postorder(root) if x.mark}
    if not marks:
        return {}
    has = _contains(root, marks)
    paths: dict[str, list[Node]] = {}
    stack: list[tuple[Node, tuple]] = [(root, ())]
    # Only descend into subtrees containing a mark, which are few.
    while stack:
        x, trail = stack.pop()
        path = trail + (x,)
        if x.mark:
            if x.mark in paths:
                raise ValueError(f"mark {x.mark!r} occurs more than once")
            paths[x.mark] = list(path)
        for c in x.children:
            if has[id(c)]:
                stack.append((c, path))
    return paths


def mark_depth(root: Node, mark: str) -> int:
    return len(mark_paths(root)[mark]) - 1


def materialize(root: Node, limit: int = 200_000) -> tuple[Graph, dict[str, int]]:
    """Write the tree out as a :class:`Graph` in preorder (root gets id 0).

    Returns the graph and the vertex id of every mark.
    """
    total = node_count(root)
    if total > limit:
        raise ValueError(f"tree has {total} vertices, above the materialisation limit {limit}")
    edges: list[tuple[int, int]] = []
    marks: dict[str, int] = {}
    nxt = 0
    stack: list[tuple[Node, int]] = [(root, -1)]
    while stack:
        x, parent = stack.pop()
        me = nxt
        nxt += 1
        if parent >= 0:
            edges.append((parent, me))
        if x.mark:
            if x.mark in marks:
                raise ValueError(f"mark {x.mark!r} occurs more than once")
            marks[x.mark] = me
        for c in reversed(x.children):
            stack.append((c, me))
    return Graph(nxt, edges), marks


def from_graph(g: Graph, root: int, marks: dict[int, str] | None = None) -> Node:
    """Root a tree (connected forest component) at ``root``; no sharing is introduced."""
    if not g.is_forest():
        raise ValueError("graph is not a forest")
    marks = marks or {}
    parent = {root: -1}
    order = [root]
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        for y in g.adjacency[x]:
            if y not in parent:
                parent[y] = x
                order.append(y)
    built: dict[int, Node] = {}
    for x in reversed(order):
        kids = [built[y] for y in g.adjacency[x] if parent.get(y) == x]
        built[x] = Node(kids, marks.get(x))
    return built[root]


def graft(root: Node, mark: str, replacement: Node) -> Node:
    """Copy of ``root`` with the node carrying ``mark`` replaced by ``replacement``.

    Only the nodes on the path to the mark are copied.
    """
    path = mark_paths(root).get(mark)
    if path is None:
        raise KeyError(f"mark {mark!r} not found")
    new = replacement
    for depth in range(len(path) - 2, -1, -1):
        x, old = path[depth], path[depth + 1]
        kids = tuple(new if c is old else c for c in x.children)
        new = Node(kids, x.mark)
    return new


def relabel_marks(root: Node, fn: Callable[[str], str | None]) -> Node:
    """Copy with marks renamed (``fn`` may return None to drop a mark)."""
    marks = {x.mark for x in postorder(root) if x.mark}
    if not marks:
        return root
    has = _contains(root, marks)
    memo: dict[int, Node] = {}
    for x in postorder(root):
        if not has[id(x)]:
            memo[id(x)] = x
            continue
        memo[id(x)] = Node((memo[id(c)] for c in x.children), fn(x.mark) if x.mark else None)
    return memo[id(root)]


# ---------------------------------------------------------------------------
# exact partition functions on shared trees
# ---------------------------------------------------------------------------

def _normalize_pair(a, b):
    if b:
        return a / b, b / b
    if a:
        return a / a, b
    return a, b


def pair_values(root: Node, gamma, normalize: bool = True):
    """(Z_{T, root unmatched}, Z_T) for the unfolded tree.

    With ``normalize`` the pair is rescaled at every node by a nonzero
    constant; ratios and zero patterns are exact, absolute scale is lost.
    Without it the true values are returned (only sensible for modest trees).
    """
    one = gamma / gamma if gamma else mpq(1)
    vals: dict[int, tuple] = {}
    for x in postorder(root):
        A, B = one, 0 * one
        for c in x.children:
            ca, cb = vals[id(c)]
            B = B * cb + A * ca
            A = A * cb
        pair = (A, A + gamma * B)
        vals[id(x)] = _normalize_pair(*pair) if normalize else pair
    return vals[id(root)]


def root_ratio(root: Node, gamma):
    """Z_{T,not root}/Z_T exactly; ZeroDivisionError if Z_T = 0."""
    a, b = pair_values(root, gamma)
    if not b:
        raise ZeroDivisionError("partition function of the tree vanishes")
    return a / b


def conditioned_table(root: Node, gamma, track: Iterable[str], normalize: bool = True) -> dict:
    """Partition function split by the matched status of the root and of every
    tracked mark.

    Returns ``{(root_matched, frozenset(matched tracked marks)): value}``.  With
    ``normalize`` the whole table is scaled by one common nonzero constant.
    """
    track = set(track)
    has = _contains(root, track)
    one = gamma / gamma if gamma else mpq(1)
    zero = 0 * one
    pairs: dict[int, tuple] = {}
    tables: dict[int, dict] = {}
    for x in postorder(root):
        if not has[id(x)]:
            A, B = one, zero
            for c in x.children:
                ca, cb = pairs[id(c)]
                B = B * cb + A * ca
                A = A * cb
            pair = (A, A + gamma * B)
            pairs[id(x)] = _normalize_pair(*pair) if normalize else pair
            continue
        cur: dict = {(False, frozenset()): one}
        for c in x.children:
            if has[id(c)]:
                ctab = tables[id(c)]
            else:
                ca, cb = pairs[id(c)]
                ctab = {(False, frozenset()): ca, (True, frozenset()): cb - ca}
            cmark = c.mark if c.mark in track else None
            new: dict = {}
            for (rm, S), val in cur.items():
                for (cm, T), cval in ctab.items():
                    prod = val * cval
                    if not prod:
                        continue
                    T1 = T | {cmark} if (cmark and cm) else T
                    k1 = (rm, S | T1)
                    new[k1] = new.get(k1, zero) + prod
                    if not rm and not cm:
                        T2 = T | {cmark} if cmark else T
                        k2 = (True, S | T2)
                        new[k2] = new.get(k2, zero) + gamma * prod
            cur = new
        if normalize:
            ref = next((cur[k] for k in sorted(cur, key=_key_order) if cur[k]), None)
            if ref is not None:
                cur = {k: v / ref for k, v in cur.items()}
        tables[id(x)] = cur
    if not has[id(root)]:
        a, b = pairs[id(root)]
        out = {(False, frozenset()): a, (True, frozenset()): b - a}
    else:
        out = tables[id(root)]
    if root.mark in track:
        out = {(rm, S | {root.mark}) if rm else (rm, S): v for (rm, S), v in out.items()}
    return out


def _key_order(k):
    return (k[0], sorted(k[1]))


def condition_sum(table: dict, root: bool | None = None, **marks: bool):
    """Sum the entries of a :func:`conditioned_table` matching the given statuses.

    ``root=True`` keeps matchings covering the root; ``v=False`` keeps those
    leaving mark ``v`` uncovered; unspecified vertices are summed over.
    """
    total = None
    for (rm, S), val in table.items():
        if root is not None and rm != root:
            continue
        if any((m in S) != want for m, want in marks.items()):
            continue
        total = val if total is None else total + val
    return total if total is not None else mpq(0)

"""Complete (D-1)-ary trees, the exceptional activities where they vanish,
and edge substitution.

For the (D-1)-ary tree T_n of height n the root ratio r_n = Z_{not root}/Z
obeys r_0 = 1, r_n = 1/(1 + (D-1) gamma r_{n-1}).  Below the threshold
-1/(4(D-1)) this sequence is dense in the reals unless gamma is one of the
exceptional values -1/(4(D-1) cos^2 theta) with theta a rational multiple of
pi; there some T_n has partition function exactly 0.  Since gamma is
rational, cos^2 theta is rational, and Niven's theorem leaves only
cos^2 theta in {1/4, 1/2, 3/4}.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

from gmpy2 import mpq, mpz

from ..exact import to_rational, z_exact
from ..graph import Graph
from .. import trees
from ..trees import LEAF, Node
from .gadget import EDGE, VERTEX, Gadget, GadgetError
from .perfect import (build_quarter_edge_gadget, chain_edge_tree, minus_one_vertex_tree)

NIVEN_SQUARES = (mpq(1, 4), mpq(1, 2), mpq(3, 4))


def threshold(delta: int):
    return mpq(-1, 4 * (delta - 1))


def _check_range(gamma, delta: int):
    if delta < 3:
        raise ValueError("maximum degree must be at least 3")
    if not gamma < threshold(delta):
        raise ValueError(f"activity {gamma} is not below -1/(4(D-1)) = {threshold(delta)}")


def tree_ratio_sequence(gamma, delta: int, n_max: int) -> list[tuple[bool, object]]:
    """[(Z_{T_n} != 0, r_n) for n = 0..n_max].

    The list stops at the first n with Z_{T_n} = 0, recorded as (False, None);
    every larger tree then also has Z = 0.
    """
    gamma = to_rational(gamma)
    _check_range(gamma, delta)
    out: list[tuple[bool, object]] = [(True, mpq(1))]
    k = (delta - 1) * gamma
    # Integer numerator/denominator iteration avoids a gcd per step.
    num, den = mpz(1), mpz(1)
    kp, kq = mpz(k.numerator), mpz(k.denominator)
    for _ in range(n_max):
        new_den = kq * den + kp * num
        if new_den == 0:
            out.append((False, None))
            break
        num, den = kq * den, new_den
        out.append((True, mpq(num, den)))
    return out


def is_exceptional(gamma, delta: int) -> bool:
    """Whether gamma is in the exceptional set for maximum degree ``delta``."""
    gamma = to_rational(gamma)
    _check_range(gamma, delta)
    s = -1 / (4 * (delta - 1) * gamma)
    return s in NIVEN_SQUARES


def exceptional_degrees(gamma, d_max: int = 64) -> list[int]:
    """All D in 3..d_max for which gamma is exceptional."""
    gamma = to_rational(gamma)
    return [d for d in range(3, d_max + 1) if gamma < threshold(d) and is_exceptional(gamma, d)]


def first_zero_height(gamma, delta: int, n_max: int = 1000) -> int | None:
    seq = tree_ratio_sequence(gamma, delta, n_max)
    return len(seq) - 1 if not seq[-1][0] else None


def complete_tree(arity: int, height: int) -> Node:
    node = LEAF
    for _ in range(height):
        node = Node([node] * arity)
    return node


# ---------------------------------------------------------------------------
# dense search
# ---------------------------------------------------------------------------

@dataclass
class DenseSearchFailure(GadgetError):
    best_n: int
    best_error: object

    def __str__(self):
        return f"no height within the cap; best n={self.best_n} with error {float(self.best_error):.3g}"


def dense_tree(delta: int, n: int) -> Node:
    """T_n with a pendant terminal attached to its root."""
    return Node([complete_tree(delta - 1, n)], "u")


def ratio_at(gamma, delta: int, n: int) -> tuple:
    """(num, den) with r_n = num/den, unreduced, via a 2x2 integer matrix power.

    den = 0 means Z_{T_n} = 0.
    """
    k = (delta - 1) * to_rational(gamma)
    kp, kq = mpz(k.numerator), mpz(k.denominator)
    # (num, den) -> (kq den, kp num + kq den)
    m = ((mpz(0), kq), (kp, kq))
    acc = ((mpz(1), mpz(0)), (mpz(0), mpz(1)))

    def mul(a, b):
        return ((a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
                (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]))

    while n:
        if n & 1:
            acc = mul(m, acc)
        m = mul(m, m)
        n >>= 1
    return acc[0][0] + acc[0][1], acc[1][0] + acc[1][1]


def dense_value(gamma, delta: int, n: int):
    """Exact ratio 1/(1 + gamma r_n) of T_n under a pendant terminal, or None at a pole."""
    gamma = to_rational(gamma)
    num, den = ratio_at(gamma, delta, n)
    if den == 0:
        return None
    p, q = mpz(gamma.numerator), mpz(gamma.denominator)
    bot = q * den + p * num
    return None if bot == 0 else mpq(q * den, bot)


def _float_stream(gamma, delta: int):
    """Float approximations of 1/(1 + gamma r_n), n = 0, 1, ...  (inf at poles)."""
    g = float(gamma)
    k = (delta - 1) * g
    r = 1.0
    n = 0
    while True:
        d = 1 + g * r
        yield n, (1 / d if d != 0 else math.inf)
        d = 1 + k * r
        r = 1 / d if d != 0 else math.inf
        if math.isinf(r):
            r = 1e300
        n += 1


# Float guidance only proposes heights; every accepted height is confirmed exactly.
_FLOAT_SLACK = 1e-7


def dense_search(gamma, delta: int, targets, eps, iter_cap: int = 100_000) -> dict:
    """For each target lambda, the first height n <= iter_cap with
    |1/(1+gamma r_n) - lambda| <= eps, confirmed in exact arithmetic.

    One float pass serves every target.  Returns {target: n}; targets not met
    within the cap are missing.
    """
    gamma = to_rational(gamma)
    eps = to_rational(eps)
    pending = sorted({to_rational(t) for t in targets})
    fl = [float(t) for t in pending]
    tol = float(eps)
    found: dict = {}
    for n, v in _float_stream(gamma, delta):
        if n > iter_cap or not pending:
            break
        if math.isinf(v):
            continue
        width = tol + _FLOAT_SLACK * (1 + abs(v))
        lo, hi = bisect_left(fl, v - width), bisect_right(fl, v + width)
        if lo == hi:
            continue
        exact = dense_value(gamma, delta, n)
        if exact is None:
            continue
        hits = [i for i in range(lo, hi) if abs(exact - pending[i]) <= eps]
        for i in hits:
            found[pending[i]] = n
        for i in reversed(hits):
            del pending[i], fl[i]
    return found


def build_vertex_gadget_dense(gamma, delta: int, lam, eps, iter_cap: int = 100_000) -> Gadget:
    """Pendant-rooted (D-1)-ary tree implementing ``lam`` within ``eps``.

    Only for non-exceptional gamma.  Raises :class:`DenseSearchFailure`
    (carrying the best height seen, judged in floats) when the cap is exhausted.
    """
    gamma, lam, eps = to_rational(gamma), to_rational(lam), to_rational(eps)
    if is_exceptional(gamma, delta):
        raise ValueError(f"activity {gamma} is exceptional for D={delta}; use the exceptional pipeline")
    hit = dense_search(gamma, delta, [lam], eps, iter_cap)
    if lam in hit:
        n = hit[lam]
        return Gadget.from_tree(dense_tree(delta, n), VERTEX, gamma, lam, eps,
                                info={"construction": "dense", "height": n})
    best_n, best_err = -1, math.inf
    target = float(lam)
    for n, v in _float_stream(gamma, delta):
        if n > iter_cap:
            break
        if abs(v - target) < best_err:
            best_n, best_err = n, abs(v - target)
    exact = dense_value(gamma, delta, best_n) if best_n >= 0 else None
    raise DenseSearchFailure(best_n, abs(exact - lam) if exact is not None else best_err)


# ---------------------------------------------------------------------------
# edge substitution
# ---------------------------------------------------------------------------

def _require_perfect_edge(edge_gadget: Gadget):
    if edge_gadget.kind != EDGE:
        raise ValueError("substitution needs an edge gadget")
    if edge_gadget.accuracy != 0 or edge_gadget.error != 0:
        raise ValueError("only perfect edge gadgets preserve the partition function exactly")


def substitute_tree(root: Node, edge_gadget: Gadget) -> Node:
    """Replace every edge of a shared tree by a copy of the edge gadget.

    The parent endpoint takes the role of terminal u, the child that of v.
    Shared subtrees stay shared.  Marks on the original tree are kept.
    """
    _require_perfect_edge(edge_gadget)
    e = edge_gadget.tree
    memo: dict[int, Node] = {}
    for x in trees.postorder(root):
        kids = [trees.graft(e, "v", memo[id(c)]).children[0] for c in x.children]
        memo[id(x)] = Node(kids, x.mark)
    return memo[id(root)]


def substitute_edges(h: Graph, edge_gadget: Gadget) -> tuple[Graph, dict[int, int]]:
    """Replace every edge (a, b), a < b, of ``h`` by a fresh copy of the gadget
    with u identified with a and v with b.

    Vertices of ``h`` keep their ids; the second value maps nothing else and
    is the identity on V(h) (returned for symmetry with tree helpers).
    """
    _require_perfect_edge(edge_gadget)
    g, marks = trees.materialize(edge_gadget.tree)
    u, v = 0, marks["v"]
    n = h.vertex_count
    edges: list[tuple[int, int]] = []
    for a, b in h.sorted_edges:
        ids = {}
        for x in range(g.vertex_count):
            if x == u:
                ids[x] = a
            elif x == v:
                ids[x] = b
            else:
                ids[x] = n
                n += 1
        edges.extend((ids[x], ids[y]) for x, y in g.sorted_edges)
    return Graph(n, edges), {i: i for i in range(h.vertex_count)}


def substitution_constant(h: Graph, edge_gadget: Gadget):
    """C = Z_{gadget, not u, not v}^{|E(h)|} (true scale; needs an exact certificate)."""
    if edge_gadget.scale != "exact":
        raise ValueError("constant needs an exact-scale certificate")
    return edge_gadget.certificate["~u~v"] ** h.edge_count


# ---------------------------------------------------------------------------
# exceptional activities: a perfect -1 edge gadget
# ---------------------------------------------------------------------------

def _leaves(g: Graph, alive: set[int]) -> list[int]:
    return [x for x in sorted(alive) if sum(1 for y in g.adjacency[x] if y in alive) == 1]


def _deg(g: Graph, alive: set[int], x: int) -> int:
    return sum(1 for y in g.adjacency[x] if y in alive)


def _sub(g: Graph, alive: set[int]) -> tuple[Graph, dict[int, int]]:
    return g.induced(sorted(alive))


def strip_zero_tree(g: Graph, gamma) -> tuple[str, Graph, int]:
    """Shrink a tree with Z = 0 until a leaf-stripping step leaves Z != 0.

    Returns (case, T*, p): case "pendant" when T* = T minus one leaf whose
    parent p then has degree one, "cherry" when T* = T minus two leaves that
    share the parent p.  In both cases Z_{T*} != 0.
    """
    if z_exact(g, gamma):
        raise ValueError("tree does not have vanishing partition function")
    alive = set(range(g.vertex_count))
    while True:
        if len(alive) <= 2:
            raise GadgetError("reached a tree with at most two vertices; activity must be -1")
        step = None
        leaves = _leaves(g, alive)
        by_parent: dict[int, list[int]] = {}
        for l in leaves:
            p = next(y for y in g.adjacency[l] if y in alive)
            by_parent.setdefault(p, []).append(l)
        for p in sorted(by_parent):
            if len(by_parent[p]) >= 2:
                step = ("cherry", p, by_parent[p][:2])
                break
        if step is None:
            for p in sorted(by_parent):
                if _deg(g, alive, p) == 2:
                    step = ("pendant", p, by_parent[p][:1])
                    break
        if step is None:
            raise GadgetError("no stripping candidate found")
        case, p, removed = step
        rest = alive - set(removed)
        sub, relabel = _sub(g, rest)
        if z_exact(sub, gamma):
            return case, sub, relabel[p]
        alive = rest


def build_exceptional_edge_minus_one(gamma, delta: int) -> Gadget:
    """Perfect -1 edge gadget (a tree of maximum degree <= delta) for exceptional gamma."""
    gamma = to_rational(gamma)
    if not is_exceptional(gamma, delta):
        raise ValueError(f"activity {gamma} is not exceptional for D={delta}")
    n0 = first_zero_height(gamma, delta)
    zero_tree, _ = trees.materialize(complete_tree(delta - 1, n0))
    case, tstar, p = strip_zero_tree(zero_tree, gamma)
    h = trees.from_graph(tstar, p)
    if case == "pendant":
        tree = chain_edge_tree(h, LEAF, h)
        base = Gadget.from_tree(tree, EDGE, gamma, -1, 0,
                                info={"construction": "exceptional_pendant", "zero_height": n0})
        return base
    h2 = Node([h])  # y2 hangs above p
    tree = chain_edge_tree(h, h2, h)
    quarter = Gadget.from_tree(tree, EDGE, gamma, mpq(-1, 4), 0,
                               info={"construction": "exceptional_cherry", "zero_height": n0})
    return compose_quarter(quarter)


def compose_quarter(quarter_at_gamma: Gadget) -> Gadget:
    """Turn a perfect -1/4 edge gadget at gamma into a perfect -1 edge gadget.

    The quarter construction implements -1 when its own edges carry activity
    -1/4; replacing each of those edges by the given gadget realises that.
    """
    if quarter_at_gamma.target != mpq(-1, 4):
        raise ValueError("expected a gadget implementing -1/4")
    outer = build_quarter_edge_gadget()
    tree = substitute_tree(outer.tree, quarter_at_gamma)
    info = dict(quarter_at_gamma.info)
    info["composed_with"] = "quarter_chain"
    return Gadget.from_tree(tree, EDGE, quarter_at_gamma.gamma, -1, 0, info=info)


def substituted_vertex_tree(lam, edge_minus_one: Gadget) -> Node:
    """Activity -1 tree for ``lam`` with every edge replaced by a -1 edge gadget."""
    return substitute_tree(minus_one_vertex_tree(lam), edge_minus_one)


def build_exceptional_vertex_gadget(gamma, delta: int, lam, edge_minus_one: Gadget | None = None) -> Gadget:
    """Perfect vertex gadget for any rational ``lam`` at an exceptional gamma."""
    gamma, lam = to_rational(gamma), to_rational(lam)
    edge_minus_one = edge_minus_one or build_exceptional_edge_minus_one(gamma, delta)
    tree = substituted_vertex_tree(lam, edge_minus_one)
    return Gadget.from_tree(tree, VERTEX, gamma, lam, 0, info={"construction": "exceptional_substituted"})

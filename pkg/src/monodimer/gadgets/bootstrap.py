"""Vertex and edge gadgets of arbitrary precision.

The construction chains copies of a few auxiliary vertex gadgets, whose
activities sit on a fine grid, along a path whose shape is read off a
backward orbit of a covering family of contractions.  The auxiliary gadgets
come from the perfect trees at activity -1, from edge substitution at the
exceptional activities, or from the dense tree sequence otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from gmpy2 import isqrt, mpq, mpz

from ..exact import simplest_rational, to_rational
from ..trees import Node
from .cover import CoverSystem, centered_ratio_radius, iterate_cover_maps, make_cover_system
from .exceptional import (build_exceptional_edge_minus_one,
                          build_exceptional_vertex_gadget, dense_search, dense_tree,
                          is_exceptional, threshold)
from .gadget import EDGE, VERTEX, Gadget, GadgetError
from .perfect import build_minus_one_tree, chain_edge_tree, minus_one_word
from .poly import Polynomial, ratio_perturbation_radius

# Perfect trees whose move word exceeds this length are not worth building;
# the bootstrap handles such activities with far fewer vertices.
PERFECT_WORD_BUDGET = 4000


def _check_inputs(gamma, delta: int, eps):
    if delta < 3:
        raise ValueError("maximum degree must be at least 3")
    if not gamma < threshold(delta):
        raise ValueError(f"activity {gamma} is not below -1/(4(D-1)) = {threshold(delta)}")
    if eps <= 0:
        raise ValueError("accuracy must be positive")


def _terminal(g: Gadget) -> Node:
    """The terminal of a vertex gadget as a plain subtree root (mark dropped)."""
    return Node(g.tree.children)


# ---------------------------------------------------------------------------
# auxiliary gadgets
# ---------------------------------------------------------------------------

def perfect_family(gamma, delta: int) -> str | None:
    """'minus_one' or 'exceptional' when every rational activity is implementable
    exactly at gamma, else None."""
    if gamma == -1:
        return "minus_one"
    if is_exceptional(gamma, delta):
        return "exceptional"
    return None


@lru_cache(maxsize=32)
def _exceptional_edge(gamma, delta: int) -> Gadget:
    return build_exceptional_edge_minus_one(gamma, delta)


def perfect_vertex_gadget(gamma, delta: int, lam, eps=0) -> Gadget:
    """Zero-error tree for the simplest rational within ``eps`` of ``lam``.

    Returned with target ``lam`` and accuracy ``eps``; only for gamma = -1 or
    exceptional gamma.
    """
    gamma, lam, eps = to_rational(gamma), to_rational(lam), to_rational(eps)
    family = perfect_family(gamma, delta)
    if family is None:
        raise ValueError(f"no perfect construction at activity {gamma} for D={delta}")
    val = simplest_rational(lam - eps, lam + eps)
    if family == "minus_one":
        base = build_minus_one_tree(val)
    else:
        base = build_exceptional_vertex_gadget(gamma, delta, val, _exceptional_edge(gamma, delta))
    return Gadget.from_tree(base.tree, VERTEX, gamma, lam, eps, info=dict(base.info, realized=str(val)))


def perfect_word_length(lam) -> int:
    """Number of tree moves the perfect construction needs for ``lam``."""
    lam = to_rational(lam)
    if lam in (0, 1):
        return 0
    return len(minus_one_word((lam - 1) / lam))


class AuxiliarySource:
    """Vertex gadgets for the constantly many auxiliary activities at (gamma, D)."""

    def __init__(self, gamma, delta: int, iter_cap: int = 100_000):
        self.gamma, self.delta, self.iter_cap = to_rational(gamma), delta, iter_cap
        self.family = perfect_family(self.gamma, delta) or "dense"

    def gadgets(self, targets, tol) -> list[Gadget]:
        """One gadget per target, each within ``tol``."""
        tol = to_rational(tol)
        targets = [to_rational(t) for t in targets]
        if self.family != "dense":
            return [perfect_vertex_gadget(self.gamma, self.delta, t, tol) for t in targets]
        hits = dense_search(self.gamma, self.delta, targets, tol, self.iter_cap)
        missing = [t for t in targets if t not in hits]
        if missing:
            raise GadgetError(f"{len(missing)} of {len(targets)} auxiliary activities not reached "
                              f"within {self.iter_cap} tree heights at activity {self.gamma}")
        return [Gadget.from_tree(dense_tree(self.delta, hits[t]), VERTEX, self.gamma, t, tol,
                                 info={"construction": "dense", "height": hits[t]})
                for t in targets]


@dataclass
class BootstrapContext:
    """Everything the bootstrap precomputes for one (gamma, D)."""

    gamma: object
    delta: int
    cover: CoverSystem
    dprime: object
    source: AuxiliarySource
    g0: Gadget          # implements lambda0* = -1/gamma - 1 - x0
    h0: Gadget          # implements x0
    _aux: dict = field(default_factory=dict)

    def aux(self, j: int) -> Gadget:
        """Auxiliary gadget for grid point j, built on first use (the dense
        family builds the whole grid at once since one scan serves all)."""
        if j not in self._aux:
            stars = self.cover.lambdas_star
            if self.source.family == "dense":
                for i, g in enumerate(self.source.gadgets(stars, self.dprime)):
                    self._aux[i] = g
            else:
                self._aux[j] = self.source.gadgets([stars[j]], self.dprime)[0]
        return self._aux[j]

    def aux_lambda(self, j: int):
        return self.aux(j).achieved["ratio"]

    @property
    def lambda0(self):
        return self.g0.achieved["ratio"]

    @property
    def y0(self):
        return self.h0.achieved["ratio"]

    @property
    def realized(self) -> int:
        return len(self._aux)


@lru_cache(maxsize=32)
def bootstrap_context(gamma, delta: int, *, iter_cap: int = 100_000) -> BootstrapContext:
    gamma = to_rational(gamma)
    source = AuxiliarySource(gamma, delta, iter_cap)
    # dense trees get tall fast as the grid tightens, so that family takes the
    # widest cover system that still passes the exact checks
    cover = make_cover_system(gamma, widen=source.family == "dense")
    dprime = min(cover.delta, cover.r / 2)
    lam0_star = -1 / gamma - 1 - cover.x0
    g0, h0 = source.gadgets([lam0_star, cover.x0], dprime)
    return BootstrapContext(gamma, delta, cover, dprime, source, g0, h0)


# ---------------------------------------------------------------------------
# the bootstrap
# ---------------------------------------------------------------------------

def _pendant_ratio_radius(gamma, base, y, eps):
    """Radius for x -> (1 + gamma (base + x)) / (1 + gamma (1 + base + x)) around y."""
    def build(v):
        s = base + v[0]
        return 1 + gamma * s, 1 + gamma * (1 + s)
    return centered_ratio_radius(build, [y], eps)


def _case_one(ctx: BootstrapContext, lam, eps) -> tuple[Node, dict]:
    """Tree (root = terminal) implementing lam within eps; needs |lam - 1| >= 2/r."""
    g = ctx.gamma
    lam0 = ctx.lambda0
    y = -(1 / g + lam0 + 1 + 1 / (lam - 1))
    if not ctx.cover.contains(y):
        raise GadgetError("chain target fell outside the cover interval")
    eps1 = _pendant_ratio_radius(g, lam0, y, eps)
    _, word = iterate_cover_maps(ctx.cover, ctx.y0, y, eps1, lam_of=ctx.aux_lambda)
    node = _terminal(ctx.h0)
    for j in word:
        node = Node([node, _terminal(ctx.aux(j))])
    z = Node([node, _terminal(ctx.g0)])
    return Node([z], "u"), {"word_length": len(word)}


def _case_two(ctx: BootstrapContext, lam, eps) -> tuple[Node, dict]:
    """Split the target over two chains whose sums stay far from 1."""
    g = ctx.gamma
    r = ctx.cover.r
    S = -1 / g - lam / (lam - 1)
    K = mpq(math.ceil(2 / r + abs(S) + 2))
    y1 = 1 + K
    y2 = S - y1

    def build(v):
        s = v[0] + v[1]
        return 1 + g * s, 1 + g * (1 + s)

    eps1 = centered_ratio_radius(build, [y1, y2], eps)
    j1, i1 = _case_one(ctx, y1, eps1)
    j2, i2 = _case_one(ctx, y2, eps1)
    z = Node([Node(j1.children), Node(j2.children)])
    return Node([z], "u"), {"word_length": i1["word_length"] + i2["word_length"], "split": [str(y1), str(y2)]}


def build_vertex_gadget_fast(gamma, delta: int, lam, eps, iter_cap: int = 100_000) -> Gadget:
    """Tree of maximum degree <= delta implementing ``lam`` within ``eps``.

    Size grows with log(1/eps).  The first call for a given (gamma, delta)
    precomputes the cover system and the auxiliary gadgets it needs.
    """
    gamma, lam, eps = to_rational(gamma), to_rational(lam), to_rational(eps)
    _check_inputs(gamma, delta, eps)
    ctx = bootstrap_context(gamma, delta, iter_cap=iter_cap)
    two_over_r = 2 / ctx.cover.r
    if lam == 1:
        e1 = min(two_over_r, eps)
        tree, info = _case_two(ctx, 1 + e1 / 2, e1 / 2)
        info["case"] = "one"
    elif abs(lam - 1) >= two_over_r:
        tree, info = _case_one(ctx, lam, eps)
        info["case"] = "far"
    else:
        tree, info = _case_two(ctx, lam, eps)
        info["case"] = "near"
    info.update(construction="bootstrap", auxiliary=ctx.source.family)
    out = Gadget.from_tree(tree, VERTEX, gamma, lam, eps, info=info)
    if out.max_degree > delta:
        raise GadgetError(f"bootstrap produced degree {out.max_degree} > {delta}")
    return out


VERTEX_METHODS = ("auto", "fast", "perfect", "dense")


def build_vertex_gadget(gamma, delta: int, lam, eps, method: str = "auto",
                        iter_cap: int = 100_000) -> Gadget:
    """Dispatch between constructions.

    ``auto`` uses the perfect tree when one exists at gamma and is short,
    and the bootstrap otherwise.
    """
    from .exceptional import build_vertex_gadget_dense

    gamma, lam, eps = to_rational(gamma), to_rational(lam), to_rational(eps)
    if method not in VERTEX_METHODS:
        raise ValueError(f"method must be one of {VERTEX_METHODS}")
    if method == "auto":
        method = "fast"
        if perfect_family(gamma, delta) is not None:
            val = simplest_rational(lam - eps, lam + eps)
            if perfect_word_length(val) <= PERFECT_WORD_BUDGET:
                method = "perfect"
    if method == "perfect":
        out = perfect_vertex_gadget(gamma, delta, lam, eps)
        if out.max_degree > delta:
            raise GadgetError(f"perfect tree has degree {out.max_degree} > {delta}")
        return out
    if method == "dense":
        return build_vertex_gadget_dense(gamma, delta, lam, eps, iter_cap)
    return build_vertex_gadget_fast(gamma, delta, lam, eps, iter_cap)


# ---------------------------------------------------------------------------
# edge gadgets
# ---------------------------------------------------------------------------

def _sqrt_bounds(x, bits: int) -> tuple:
    """Dyadic a <= sqrt(x) <= b with b - a <= 2^-bits (x >= 0)."""
    scale = mpz(1) << (2 * bits)
    n = x.numerator * scale
    d = x.denominator
    lo = isqrt(n // d)  # floor(sqrt(x) * 2^bits) up to one unit
    while (lo + 1) ** 2 * d <= n:
        lo += 1
    return mpq(lo, 1 << bits), mpq(lo + 1, 1 << bits)


def square_root_choice(target, tol):
    """Simplest positive rational s with |s^2 - target| <= tol (target >= 0, tol > 0)."""
    target, tol = to_rational(target), to_rational(tol)
    lo2, hi2 = max(target - tol, mpq(0)), target + tol
    bits = 8
    while True:
        _, a = _sqrt_bounds(lo2, bits)   # a >= sqrt(lo2)
        b, _ = _sqrt_bounds(hi2, bits)   # b <= sqrt(hi2)
        a = max(a, mpq(1, 1 << bits))
        if a <= b:
            s = simplest_rational(a, b)
            if lo2 <= s * s <= hi2 and s > 0:
                return s
        bits *= 2


def edge_chain_polynomials(gamma):
    """(P1, P2, P3, Q) in the three vertex activities of the chain u-y1-y2-y3-v:
    the ratios Z_{u,not v}, Z_{u,v}, Z_{not u,v} over Z_{not u,not v}
    are P1/Q, P2/Q, P3/Q."""
    x1, x2, x3 = Polynomial.variables(3)
    P1 = gamma * x1 * (1 + gamma * x2 * x3)
    P2 = gamma * gamma * x1 * x3
    P3 = gamma * x3 * (1 + gamma * x1 * x2)
    Q = 1 + gamma * x1 * x2 + gamma * x2 * x3
    return P1, P2, P3, Q


def build_edge_gadget(gamma, delta: int, gamma_prime, eps, vertex_method: str = "auto",
                      iter_cap: int = 100_000) -> Gadget:
    """Tree with terminals u, v at distance 4 implementing edge activity
    ``gamma_prime`` <= 0 within ``eps``."""
    gamma, gp, eps = to_rational(gamma), to_rational(gamma_prime), to_rational(eps)
    _check_inputs(gamma, delta, eps)
    if gp > 0:
        raise ValueError("edge activity must be <= 0")
    s = square_root_choice(-gp, eps / 2)
    g2 = -s
    lam1 = -g2 / gamma
    lam2 = 1 / g2
    point = [lam1, lam2, lam1]
    P1, P2, P3, Q = edge_chain_polynomials(gamma)
    eps1 = min(ratio_perturbation_radius(P, Q, point, eps / 2) for P in (P1, P2, P3))
    h1 = build_vertex_gadget(gamma, delta, lam1, eps1, vertex_method, iter_cap)
    h2 = build_vertex_gadget(gamma, delta, lam2, eps1, vertex_method, iter_cap)
    tree = chain_edge_tree(h1.tree, h2.tree, h1.tree)
    info = {
        "construction": "vertex_chain",
        "gamma_double_prime": str(g2),
        "vertex_accuracy": str(eps1),
        "vertex_methods": [h1.info.get("construction"), h2.info.get("construction")],
    }
    out = Gadget.from_tree(tree, EDGE, gamma, gp, eps, info=info)
    # closed form in the achieved vertex ratios, an independent route to the certificate
    x = [h1.achieved["ratio"], h2.achieved["ratio"], h1.achieved["ratio"]]
    q = Q(x)
    closed = {"u~v": P1(x) / q, "uv": P2(x) / q, "~uv": P3(x) / q}
    if closed != out.achieved:
        raise GadgetError("chain closed form disagrees with the tree certificate")
    if out.max_degree > delta:
        raise GadgetError(f"edge gadget has degree {out.max_degree} > {delta}")
    return out

"""Recovering a ratio of partition functions by binary search on gadget instances.

Fix an edge e* = (u*, v*) of G and gamma0 = -1/10.  Putting activity R on e*
and gamma0 elsewhere gives Z = alpha R + beta with alpha = Z_{G - u* - v*}
and beta = Z_{G - e*}, both positive on graphs of maximum degree 3.  The
zero R_goal = -beta/alpha is located by probing the sign (or the modulus)
of that affine function at nine points per round, shrinking the bracket by
a factor 7/8 each time, and then read off exactly as the simplest rational
in the final bracket.  Probes are answered either from the exact affine
value or from composed graphs in which every edge is replaced by an edge
gadget implementing the desired activity at the base activity gamma.

Also here: the period-six values of path partition functions at -1, and
the stretched -1 edge gadgets built from them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import ceil, log

from gmpy2 import mpq

from .exact import simplest_rational, to_rational, z_exact
from .graph import Graph
from . import trees
from .trees import Node
from .gadgets.bootstrap import build_edge_gadget
from .gadgets.exceptional import (build_exceptional_edge_minus_one, exceptional_degrees,
                                  substitute_tree)
from .gadgets.gadget import EDGE, Gadget

GAMMA0 = mpq(-1, 10)
ORACLES = ("sign_only", "norm_factor_1_01", "exact_simulated")
MODES = ("direct_f", "composed_graph")
NOISE = ("squeeze", "alternating", "random", "none")
NORM_FACTOR = mpq(101, 100) ** 2   # one factor 1.01 for each partition function in the ratio
PATH_PATTERN = (1, 0, -1, -1, 0, 1)


class ReconstructionFailed(RuntimeError):
    pass


class OracleInconsistency(RuntimeError):
    """Neither refinement rule applies; the oracle answers cannot all be right."""


def _edge(g: Graph, e_star) -> tuple[int, int]:
    u, v = sorted(int(x) for x in e_star)
    if not g.has_edge(u, v):
        raise KeyError(f"edge {(u, v)} not in graph")
    return u, v


def affine_coefficients(g: Graph, e_star, gamma0=GAMMA0) -> tuple:
    """(alpha, beta) with Z_G = alpha R + beta when e* carries R and the rest gamma0."""
    u, v = _edge(g, e_star)
    gamma0 = to_rational(gamma0)
    alpha = z_exact(g.remove_vertices([u, v]), gamma0).re
    beta = z_exact(g.remove_edge(u, v), gamma0).re
    return alpha, beta


def ratio_bound(n: int) -> int:
    """Numerators and denominators of R_goal are below 20^(2n)."""
    return 20 ** (2 * n)


@dataclass
class ReductionState:
    alpha: object
    beta: object
    r_goal: object
    intervals: list = field(default_factory=list)
    oracle_kind: str = "sign_only"

    @classmethod
    def for_graph(cls, g: Graph, e_star, oracle_kind: str = "sign_only") -> "ReductionState":
        alpha, beta = affine_coefficients(g, e_star)
        if alpha <= 0 or beta <= 0:
            raise ValueError("alpha and beta must be positive (is the maximum degree at most 3?)")
        return cls(alpha, beta, -beta / alpha, [], oracle_kind)

    def check(self) -> None:
        """Every bracket holds R_goal and each round keeps at most 7/8 of the width."""
        for i, (lo, hi) in enumerate(self.intervals):
            if not lo <= self.r_goal <= hi:
                raise AssertionError(f"bracket {i} lost the target")
            if i and (hi - lo) * 8 > 7 * (self.intervals[i - 1][1] - self.intervals[i - 1][0]):
                raise AssertionError(f"bracket {i} shrank by less than 7/8")


# ---------------------------------------------------------------------------
# composed instances
# ---------------------------------------------------------------------------

def gadget_accuracy(eps_prime, n: int, R, gamma0=GAMMA0):
    """Per-gadget accuracy making the composed ratio land within eps_prime of alpha R + beta."""
    return to_rational(eps_prime) / (5 ** (4 * n) * max(abs(to_rational(gamma0)), abs(to_rational(R))))


@lru_cache(maxsize=256)
def _edge_gadget(gamma, delta: int, activity, eps) -> Gadget:
    return build_edge_gadget(gamma, delta, activity, eps)


def _phase_ratios(gadget: Gadget | None) -> dict:
    """x(a, b) / x(0, 0) indexed by (u matched inside, v matched inside).

    ``None`` stands for a deleted edge, which implements activity 0 exactly.
    """
    if gadget is None:
        return {(0, 0): mpq(1), (1, 0): mpq(0), (0, 1): mpq(0), (1, 1): mpq(0)}
    a = gadget.achieved
    return {(0, 0): mpq(1), (1, 0): a["u~v"], (0, 1): a["~uv"], (1, 1): a["uv"]}


def _compose(g: Graph, gadget_of: dict) -> tuple[Graph, Graph]:
    """G_R (gadget copies glued on the vertices of g) and T_R (copies with terminals removed)."""
    n = g.vertex_count
    edges: list = []
    t_edges: list = []
    t_count = 0
    for a, b in g.sorted_edges:
        if gadget_of[(a, b)] is None:
            continue
        gg, marks = trees.materialize(gadget_of[(a, b)].tree)
        v = marks["v"]
        ids, t_ids = {}, {}
        for x in range(gg.vertex_count):
            if x == 0:
                ids[x] = a
            elif x == v:
                ids[x] = b
            else:
                ids[x] = n
                n += 1
                t_ids[x] = t_count
                t_count += 1
        for x, y in gg.sorted_edges:
            edges.append((ids[x], ids[y]))
            if x in t_ids and y in t_ids:
                t_edges.append((t_ids[x], t_ids[y]))
    return Graph(n, edges), Graph(t_count, t_edges)


def phase_sum(g: Graph, gadget_of: dict, max_terms: int = 200_000):
    """Z_{G_R}/Z_{T_R} as a sum over how each vertex of g is covered by the gadgets.

    Each vertex is either uncovered or matched inside exactly one incident
    gadget; a phase contributes the product of the gadgets' conditioned
    ratios.
    """
    inc = [[e for e in g.sorted_edges if x in e] for x in range(g.vertex_count)]
    terms = 1
    for opts in inc:
        terms *= len(opts) + 1
    if terms > max_terms:
        raise ValueError(f"{terms} phases exceed max_terms={max_terms}")
    ratios = {e: _phase_ratios(gd) for e, gd in gadget_of.items()}
    total = mpq(0)
    for choice in product(*[[None] + opts for opts in inc]):
        prod = mpq(1)
        for e in g.sorted_edges:
            a, b = e
            prod *= ratios[e][(int(choice[a] == e), int(choice[b] == e))]
            if not prod:
                break
        total += prod
    return total


@dataclass
class ReductionInstance:
    g_r: Graph | None
    t_r: Graph | None
    R: object
    eps_prime: object
    gadget_eps: object
    f_value: object            # Z_{G_R}/Z_{T_R}, exact
    f_direct: object | None    # same quantity through the exact engine on G_R and T_R
    alpha: object
    beta: object

    @property
    def deviation(self):
        return abs(self.alpha * self.R + self.beta - self.f_value)

    def within_bound(self) -> bool:
        return self.deviation <= self.eps_prime


def build_reduction_instance(g: Graph, e_star, R, eps, gamma=-1, delta: int = 3,
                             engine_check: bool | None = None) -> ReductionInstance:
    """Compose g with edge gadgets at base activity ``gamma``: e* gets one
    implementing R, every other edge one implementing -1/10.

    ``eps`` is the target deviation |alpha R + beta - Z_{G_R}/Z_{T_R}|.  The
    ratio is computed exactly by a phase sum over the gadget certificates
    and, when ``engine_check`` (default: g is a forest), also by the exact
    engine on the written-out graphs; the two must agree.
    """
    if g.max_degree > 3:
        raise ValueError("input graph must have maximum degree at most 3")
    e_star = _edge(g, e_star)
    R, eps, gamma = to_rational(R), to_rational(eps), to_rational(gamma)
    alpha, beta = affine_coefficients(g, e_star)
    geps = gadget_accuracy(eps, g.vertex_count, R)
    h0 = _edge_gadget(gamma, delta, GAMMA0, geps)
    # activity 0 is realised exactly by leaving the edge out
    h1 = _edge_gadget(gamma, delta, R, geps) if R else None
    gadget_of = {e: (h1 if e == e_star else h0) for e in g.sorted_edges}
    f_value = phase_sum(g, gadget_of)
    if engine_check is None:
        engine_check = g.is_forest()
    g_r = t_r = f_direct = None
    if engine_check:
        g_r, t_r = _compose(g, gadget_of)
        z_t = z_exact(t_r, gamma)
        f_direct = z_exact(g_r, gamma) / z_t
        if f_direct != f_value:
            raise AssertionError("phase sum and exact engine disagree on the composed instance")
    return ReductionInstance(g_r, t_r, R, eps, geps, f_value, f_direct, alpha, beta)


# ---------------------------------------------------------------------------
# binary search
# ---------------------------------------------------------------------------

def probe_points(lo, hi) -> list:
    step = (hi - lo) / 8
    return [lo + j * step for j in range(9)]


def _noise_factors(values: list, noise: str, rng: random.Random) -> list:
    """Multiplicative errors in [1/1.0201, 1.0201] applied to |f| at the probes."""
    up, down = NORM_FACTOR, 1 / NORM_FACTOR
    if noise == "none":
        return [mpq(1)] * len(values)
    if noise == "alternating":
        return [up if j % 2 else down for j in range(len(values))]
    if noise == "squeeze":
        # inflate small moduli and deflate large ones, flattening the profile
        mags = sorted(abs(v) for v in values)
        mid = mags[len(mags) // 2]
        return [up if abs(v) <= mid else down for v in values]
    if noise == "random":
        return [down + (up - down) * mpq(rng.randrange(1 << 20), 1 << 20) for _ in values]
    raise ValueError(f"unknown noise pattern {noise!r}")


def _refine(lo, hi, values: list, oracle_kind: str, noise: str, rng: random.Random) -> tuple:
    pts = probe_points(lo, hi)
    if oracle_kind == "sign_only":
        if all(values[j] < 0 for j in range(4)):
            return pts[1], pts[8]
        if all(values[j] > 0 for j in range(5, 9)):
            return pts[0], pts[7]
        raise OracleInconsistency("sign pattern fits neither refinement rule")
    if oracle_kind == "exact_simulated":
        noise = "none"
    mags = [abs(v) * f for v, f in zip(values, _noise_factors(values, noise, rng))]
    if all(mags[j] > mags[j + 1] for j in range(3)):
        return pts[1], pts[8]
    if all(mags[j] < mags[j + 1] for j in range(5, 8)):
        return pts[0], pts[7]
    raise OracleInconsistency("modulus pattern fits neither refinement rule")


def rounds_needed(n: int) -> int:
    """Rounds taking the initial width 20^(2n) below 1/20^(4n)."""
    return ceil(3 * log(ratio_bound(n)) / log(8 / 7)) + 1


@dataclass
class SearchResult:
    interval: tuple
    reconstructed: object | None
    ratio: object | None          # Z_G(gamma0) / Z_{G-e*}(gamma0)
    state: ReductionState
    rounds: int


def reconstruct(lo, hi, bound: int):
    """The unique rational with denominator <= bound in [lo, hi], or None if not yet unique."""
    if (hi - lo) * bound * bound >= 1:
        return None
    x = simplest_rational(lo, hi)
    return x if x.denominator <= bound else None


def binary_search_ratio(g: Graph, e_star, oracle_kind: str = "sign_only", iters: int | None = None,
                        mode: str = "direct_f", *, noise: str = "squeeze", seed: int = 0,
                        gamma=-1, delta: int = 3) -> SearchResult:
    """Bracket R_goal = -beta/alpha and reconstruct it exactly.

    ``iters=None`` runs just enough rounds for reconstruction to be
    guaranteed.  ``composed_graph`` mode answers each probe from a composed
    gadget instance whose accuracy shrinks with the bracket; it is only
    practical for very small graphs and few rounds.
    """
    if oracle_kind not in ORACLES:
        raise ValueError(f"oracle_kind must be one of {ORACLES}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if g.max_degree > 3:
        raise ValueError("input graph must have maximum degree at most 3")
    e_star = _edge(g, e_star)
    state = ReductionState.for_graph(g, e_star, oracle_kind)
    n = g.vertex_count
    bound = ratio_bound(n)
    rounds = rounds_needed(n) if iters is None else iters
    rng = random.Random(seed)
    lo, hi = mpq(-bound), mpq(0)
    state.intervals.append((lo, hi))
    # alpha * 10^(n/2) is a positive integer, so alpha >= 10^-n
    alpha_floor = mpq(1, 10 ** n)
    for _ in range(rounds):
        pts = probe_points(lo, hi)
        if mode == "direct_f":
            values = [state.alpha * R + state.beta for R in pts]
        else:
            eps_prime = (hi - lo) / 8 * alpha_floor / 40
            values = [build_reduction_instance(g, e_star, R, eps_prime, gamma, delta,
                                               engine_check=False).f_value for R in pts]
        lo, hi = _refine(lo, hi, values, oracle_kind, noise, rng)
        state.intervals.append((lo, hi))
    rec = reconstruct(lo, hi, bound)
    ratio = None if rec is None else 1 - GAMMA0 / rec
    return SearchResult((lo, hi), rec, ratio, state, rounds)


# ---------------------------------------------------------------------------
# paths at -1 and stretched gadgets
# ---------------------------------------------------------------------------

def path_partition_values(k_max: int) -> list[int]:
    """Z_{P_n}(-1) for n = 0..k_max by Z_n = Z_{n-1} - Z_{n-2}; checks the period-6 pattern."""
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    vals = [1, 1]
    while len(vals) <= k_max:
        vals.append(vals[-1] - vals[-2])
    vals = vals[:k_max + 1]
    for n in range(1, k_max + 1):
        if vals[n] != PATH_PATTERN[(n - 1) % 6]:
            raise AssertionError(f"Z_P{n}(-1) = {vals[n]} breaks the period-6 pattern")
    return vals


def path_tree(vertices: int) -> Node:
    """A path on ``vertices`` vertices rooted at one end, the far end marked v."""
    if vertices < 2:
        raise ValueError("need at least two vertices")
    node = Node((), "v")
    for _ in range(vertices - 2):
        node = Node([node])
    return Node([node])


def stretch_edge_gadget(gamma, k: int, d_max: int = 64) -> Gadget:
    """Perfect -1 edge gadget at an exceptional gamma with widely separated terminals.

    A base -1 gadget replaces each of the 6k+4 edges of a path on 6k+5
    vertices.  At activity -1 that path has ratios (0, 0, -1) between its
    ends, and substitution carries this over to gamma.
    """
    gamma = to_rational(gamma)
    if k < 0:
        raise ValueError("k must be non-negative")
    degrees = exceptional_degrees(gamma, d_max)
    if not degrees:
        raise ValueError(f"{gamma} is not exceptional for any degree bound 3..{d_max}")
    d = degrees[0]
    base = build_exceptional_edge_minus_one(gamma, d)
    tree = substitute_tree(path_tree(6 * k + 5), base)
    info = {"construction": "stretched_path", "k": k, "degree_bound": d,
            "base_distance": base.terminal_distance()}
    return Gadget.from_tree(tree, EDGE, gamma, -1, 0, info=info)


__all__ = [
    "GAMMA0", "ReductionState", "ReductionInstance", "SearchResult", "affine_coefficients",
    "build_reduction_instance", "binary_search_ratio", "phase_sum", "reconstruct",
    "path_partition_values", "stretch_edge_gadget",
]

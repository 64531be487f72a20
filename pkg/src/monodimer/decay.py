"""Approximate Z_G(gamma) by truncated self-avoiding-walk trees.

Off the negative real axis the unmatched ratio p_v obeys a recurrence that
contracts in a suitable metric, so evaluating the tree of walks only to a
logarithmic depth pins p_v down to a prescribed relative error.  The
partition function is then the inverse product of ratios along a vertex
elimination order.

Evaluation runs in y-space: with Q the square root of 1/gamma having
positive real part and y = x/Q, the recurrence reads y = 1/(Q + sum y_i)
and every value stays in a bounded region of the right half-plane.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field

import mpmath

from .exact import ComplexExact
from .graph import Graph
from .saw import SawCapExceeded, build_saw_tree

ELL_CAP = 10_000
DOMAIN_SLACK = 1e-12


class ForbiddenActivity(ValueError):
    """gamma lies on the negative real axis, where approximation is hard."""


class DomainViolation(ArithmeticError):
    """A recurrence value left the invariant region (numerical breakdown)."""


def _as_complex(gamma) -> complex:
    if isinstance(gamma, str):
        from .exact import parse_complex
        gamma = parse_complex(gamma)
    return complex(gamma)


def _check_gamma(gamma) -> None:
    if isinstance(gamma, ComplexExact):
        neg = gamma.im == 0 and gamma.re < 0
    else:
        z = _as_complex(gamma)
        neg = z.imag == 0 and z.real < 0
    if neg:
        raise ForbiddenActivity(
            f"gamma={gamma} is a negative real number; no approximation scheme "
            "is expected there (the problem is hard on that ray)")


@dataclass(frozen=True)
class DecayParams:
    gamma: complex
    Q: complex
    gamma_hat: float
    D: float
    p: float
    q: float
    alpha: float
    u0: complex
    L: float
    M: float
    c_hat: float
    ell: int
    delta_per_vertex: float
    n: int
    family: tuple = (0.0, 0.0, 0.0)

    @property
    def rate(self) -> float:
        """Per-level contraction Delta^{1/q} * alpha."""
        return self.family[0] ** (1 / self.q) * self.alpha


def _closed_forms(gamma: complex, big_delta: float):
    Q = 1 / cmath.sqrt(gamma)
    if Q.real <= 0:
        raise ForbiddenActivity(f"no square root of 1/gamma with positive real part for {gamma}")
    gamma_hat = 2 * abs(gamma) / (1 + math.cos(cmath.phase(gamma)))
    D = max(big_delta, 3 / (4 * gamma_hat))
    root = math.sqrt(1 + 4 * gamma_hat * D)
    p = 1 / (1 - 1 / root)
    q = p / (p - 1)
    alpha = D ** (-1 / q) * (1 - 2 / (1 + root))
    return Q, gamma_hat, D, p, q, alpha


def derive_params(gamma, delta_family: tuple, n: int, eps: float) -> DecayParams:
    """Constants of the scheme for graphs with n vertices in family (Delta, a, c).

    The depth ell is the least integer with ell >= a ln n whose tail bound
    (M/L) c_hat^{1/q} (Delta^{1/q} alpha)^ell is at most
    Re(Q) delta / (2 (|Q| + n/Re Q)^2), where delta = eps/(2n).
    """
    _check_gamma(gamma)
    big_delta, a, c = (float(x) for x in delta_family)
    if not (big_delta > 0 and a > 0 and c > 0):
        raise ValueError("family parameters must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    g = _as_complex(gamma)
    if g == 0:
        raise ValueError("gamma = 0 needs no approximation (Z = 1)")
    Q, gamma_hat, D, p, q, alpha = _closed_forms(g, big_delta)
    rate = big_delta ** (1 / q) * alpha
    if not (0 < alpha < 1 and rate < 1):
        raise AssertionError(f"contraction constants out of range: alpha={alpha}, rate={rate}")
    c_hat = max(1.0, c)
    delta = eps / (2 * n)
    re_q = Q.real
    L = re_q ** 2 / 2
    spread = (abs(Q) + n / re_q) ** 2
    M = (2 / re_q) * spread
    target = re_q * delta / (2 * spread)
    head = (M / L) * c_hat ** (1 / q)
    start = max(math.ceil(a * math.log(n)), 0) if n > 1 else 0
    # closed-form guess, then settle by a scan in both directions
    ell = max(start, math.ceil(math.log(target / head) / math.log(rate)) if head > target else 0)
    while ell > start and head * rate ** (ell - 1) <= target:
        ell -= 1
    while head * rate ** ell > target:
        ell += 1
        if ell > ELL_CAP:
            raise RuntimeError(f"truncation depth exceeds {ELL_CAP}")
    return DecayParams(g, Q, gamma_hat, D, p, q, alpha, 1 / Q, L, M, c_hat,
                       max(ell, 1), delta, n, (big_delta, a, c))


def _y_bounds(Q: complex, d: int) -> tuple[float, float]:
    re_q = Q.real
    return 1 / re_q, re_q / (abs(Q) + d / re_q) ** 2


@dataclass
class _Arith:
    """Float or mpmath arithmetic for the y-recurrence."""

    dps: int | None = None

    def cast(self, z: complex):
        return z if self.dps is None else mpmath.mpc(z.real, z.imag)


def _eval_y(tree, Q, arith: _Arith, check: bool) -> tuple:
    """Root y of the truncated tree plus the number of domain checks made."""
    Qv = arith.cast(Q)
    leaf = 1 / Qv
    vals: list = [None] * len(tree.nodes)
    re_q = Q.real
    checks = 0
    for nd in reversed(tree.nodes):
        kids = tree.children[nd.id]
        if not kids or nd.id in tree.cut_leaves:
            vals[nd.id] = leaf
            continue
        s = Qv
        for k in kids:
            s = s + vals[k]
        if check and abs(s) < re_q * (1 - DOMAIN_SLACK):
            raise DomainViolation(f"|Q + sum y| = {float(abs(s))} < Re Q at node {nd.id}")
        y = 1 / s
        if check:
            hi, lo = _y_bounds(Q, len(kids))
            ry = float(y.real)
            if not (ry > 0 and float(abs(y)) < hi + DOMAIN_SLACK and ry >= lo - DOMAIN_SLACK):
                raise DomainViolation(f"y={complex(y)} outside the invariant region at node {nd.id}")
            checks += 1
        vals[nd.id] = y
    return vals[tree.root], checks


@dataclass
class RatioEstimate:
    value: complex
    tree_nodes: int
    depth: int


def approx_p(g: Graph, v: int, gamma, params: DecayParams, *, node_cap: int = 2_000_000,
             dps: int | None = None, check_domain: bool = True, ell: int | None = None) -> RatioEstimate:
    """Estimate p_v(g, gamma) from the walk tree truncated at depth ``params.ell``.

    Leaves, genuine or cut, take y = 1/Q.  ``dps`` switches to mpmath with
    that many decimal digits; ``ell`` overrides the derived depth.
    """
    depth = params.ell if ell is None else ell
    g_c = _as_complex(gamma)
    if abs(g_c - params.gamma) > 1e-15 * max(1.0, abs(g_c)):
        raise ValueError("params were derived for a different gamma")
    tree = build_saw_tree(g, v, depth, node_cap)
    arith = _Arith(dps)
    if dps is None:
        y, _ = _eval_y(tree, params.Q, arith, check_domain)
        value = complex(params.Q * y)
    else:
        with mpmath.workdps(dps):
            y, _ = _eval_y(tree, params.Q, arith, check_domain)
            value = complex(arith.cast(params.Q) * y)
    return RatioEstimate(value, len(tree), depth)


@dataclass
class ApproxResult:
    z_hat: complex
    eps: float
    params: DecayParams | None
    node_counts: list[int] = field(default_factory=list)
    seconds: float = 0.0

    def to_record(self) -> dict:
        p = self.params
        return {
            "z_re": repr(self.z_hat.real),
            "z_im": repr(self.z_hat.imag),
            "z": f"{self.z_hat.real:.15g}{self.z_hat.imag:+.15g}i",
            "eps": self.eps,
            "ell": p.ell if p else 0,
            "alpha": p.alpha if p else None,
            "p": p.p if p else None,
            "q": p.q if p else None,
            "saw_nodes": self.node_counts,
            "seconds": round(self.seconds, 6),
        }


def approx_z(g: Graph, gamma, eps: float, delta_family: tuple, *, node_cap: int = 2_000_000,
             dps: int | None = None) -> ApproxResult:
    """Estimate Z_G(gamma) within a factor e^z, |z| <= eps, for graphs in the family.

    Vertices are eliminated in increasing id order: factor j is the ratio
    at v_j in the graph with v_1..v_{j-1} already removed.
    """
    _check_gamma(gamma)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    start = time.perf_counter()
    n = g.vertex_count
    if n == 0 or _as_complex(gamma) == 0:
        return ApproxResult(complex(1), eps, None, [], time.perf_counter() - start)
    params = derive_params(gamma, delta_family, n, eps)
    z_hat = mpmath.mpc(1) if dps else complex(1)
    counts = []
    for j in range(n):
        rest = g.induced(range(j, n))[0]
        est = approx_p(rest, 0, gamma, params, node_cap=node_cap, dps=dps)
        if est.value == 0:
            raise AssertionError(f"factor {j} vanished; impossible inside the invariant region")
        counts.append(est.tree_nodes)
        z_hat = z_hat / est.value
    return ApproxResult(complex(z_hat), eps, params, counts, time.perf_counter() - start)


def log_error(z_hat: complex, z_exact) -> complex:
    """Principal log of z_hat / z_exact."""
    return cmath.log(complex(z_hat) / complex(z_exact))


__all__ = [
    "DecayParams", "derive_params", "approx_p", "approx_z", "ApproxResult", "RatioEstimate",
    "ForbiddenActivity", "DomainViolation", "SawCapExceeded", "log_error",
]

"""Numerical probes of the conformal metric behind the decay argument.

A density Phi > 0 on a complex domain turns a path eta into the length
int Phi(eta(t)) |eta'(t)| dt.  Distances are only ever bounded from above
by straight segments; nothing here computes a true geodesic.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decay import DecayParams

log = logging.getLogger(__name__)

POINCARE = "poincare_half_plane"
MATCHING = "matching_phi"


class OutsideDomain(ValueError):
    pass


@dataclass(frozen=True)
class ConformalDensity:
    kind: str
    Q: complex | None = None

    def __post_init__(self):
        if self.kind not in (POINCARE, MATCHING):
            raise ValueError(f"unknown density {self.kind!r}")
        if (self.kind == MATCHING) != (self.Q is not None):
            raise ValueError("Q is required exactly for the matching density")
        if self.Q is not None and complex(self.Q).real <= 0:
            raise ValueError("Q must have positive real part")

    @classmethod
    def poincare(cls) -> "ConformalDensity":
        return cls(POINCARE)

    @classmethod
    def matching(cls, Q: complex) -> "ConformalDensity":
        return cls(MATCHING, complex(Q))

    def in_domain(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.kind == POINCARE:
            return z.real > 0
        return (z.real > 0) & (np.abs(z) < 1 / self.Q.real)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == POINCARE:
            return 1 / z.real
        x = z.real
        return 1 / (x * (2 / self.Q.real - x))


def segment_length(a: complex, b: complex, phi: ConformalDensity, steps: int = 10_000) -> float:
    """Length of the straight segment a -> b under ``phi`` by the composite midpoint rule."""
    if steps < 1:
        raise ValueError("steps must be positive")
    a, b = complex(a), complex(b)
    if a == b:
        return 0.0
    t = (np.arange(steps) + 0.5) / steps
    pts = (1 - t) * a + t * b
    if not phi.in_domain(pts).all():
        raise OutsideDomain(f"segment {a} -> {b} leaves the domain of {phi.kind}")
    vals = phi(pts)
    if not np.all(vals > 0):
        raise OutsideDomain("density is not positive along the segment")
    return float(vals.sum() / steps * abs(b - a))


def poincare_distance(a: complex, b: complex) -> float:
    """Closed-form hyperbolic distance in the right half-plane with density 1/Re z."""
    a, b = complex(a), complex(b)
    if a.real <= 0 or b.real <= 0:
        raise OutsideDomain("points must have positive real part")
    # rotate to the upper half-plane (z -> i z) and use the arccosh formula
    num = abs(a - b) ** 2
    return math.acosh(1 + num / (2 * a.real * b.real))


def _in_u(y: complex, Q: complex) -> bool:
    return y.real > 0 and abs(y) < 1 / Q.real


def contraction_residual(ys: Sequence[complex], params: DecayParams) -> float:
    """(sum_i |Phi(F(y)) dF/dy_i / Phi(y_i)|^p)^{1/p} / alpha for F(y) = 1/(Q + sum y).

    Values at most 1 witness the contraction of one recurrence step.
    """
    Q = params.Q
    if not ys:
        raise ValueError("need at least one argument")
    ys = [complex(y) for y in ys]
    for y in ys:
        if not _in_u(y, Q):
            raise OutsideDomain(f"{y} is outside the domain for Q={Q}")
    phi = ConformalDensity.matching(Q)
    s = Q + sum(ys)
    f = 1 / s
    deriv = abs(f) ** 2
    phi_f = float(phi(f))
    total = sum((phi_f * deriv / float(phi(y))) ** params.p for y in ys)
    return total ** (1 / params.p) / params.alpha


def sample_domain(Q: complex, rng: random.Random) -> complex:
    """A point of the domain: Re y > 0 and |y| < 1/Re Q, with emphasis near the boundary."""
    rad = 1 / Q.real
    while True:
        r = rad * rng.random() ** 0.5
        theta = (rng.random() - 0.5) * math.pi
        y = r * complex(math.cos(theta), math.sin(theta))
        if _in_u(y, Q):
            return y


def contraction_sweep(params: DecayParams, trials: int, seed: int = 0,
                      max_arity: int | None = None) -> float:
    """Largest residual over random (d, y_1..y_d) with 1 <= d <= max_arity."""
    rng = random.Random(seed)
    d_max = max_arity or math.ceil(params.family[0])
    worst = 0.0
    for _ in range(trials):
        d = rng.randint(1, d_max)
        worst = max(worst, contraction_residual([sample_domain(params.Q, rng) for _ in range(d)], params))
    return worst


def sinimport_constants(gamma_hat: float, delta: float) -> tuple[float, float, float]:
    """(D, p, alpha_hat) for a positive real activity gamma_hat and degree bound delta."""
    D = max(delta, 3 / (4 * gamma_hat))
    root = math.sqrt(1 + 4 * gamma_hat * D)
    p = 1 / (1 - 1 / root)
    q = p / (p - 1)
    return D, p, D ** (-1 / q) * (1 - 2 / (1 + root))


def sinimport_check(xs: Sequence[float], gamma_hat: float, delta: float, slack: float = 1e-12) -> bool:
    """Real-line contraction inequality with density 1/(x(2-x)) on (0, 1]:

    Phi(F)^p * sum_i (gamma_hat / (Phi(x_i) (1 + gamma_hat S)^2))^p <= alpha^p,
    where F = 1/(1 + gamma_hat S) and S = sum x_i.
    """
    if not xs:
        raise ValueError("xs must be non-empty")
    if gamma_hat <= 0:
        raise ValueError("gamma_hat must be positive")
    if any(not 0 < x <= 1 for x in xs):
        raise ValueError("every x must lie in (0, 1]")
    _, p, alpha = sinimport_constants(gamma_hat, delta)
    den = 1 + gamma_hat * sum(xs)
    f = 1 / den

    def phi(x):
        return 1 / (x * (2 - x))

    lhs = phi(f) ** p * sum((gamma_hat / (phi(x) * den * den)) ** p for x in xs)
    return lhs <= alpha ** p * (1 + slack)


def one_level_decay_probe(f_arity: int, inputs_x: Sequence[complex], inputs_y: Sequence[complex],
                          params: DecayParams, steps: int = 4000, tol: float = 1e-9) -> tuple[float, float]:
    """(segment length of F(x) -> F(y), alpha * (sum_i seg(x_i, y_i)^q)^{1/q}).

    Both sides are straight-segment upper bounds, so a violation is only
    logged: it may reflect a non-geodesic segment rather than a failure.
    """
    if not (len(inputs_x) == len(inputs_y) == f_arity):
        raise ValueError("both input lists must have length f_arity")
    Q = params.Q
    phi = ConformalDensity.matching(Q)
    fx = 1 / (Q + sum(complex(x) for x in inputs_x))
    fy = 1 / (Q + sum(complex(y) for y in inputs_y))
    lhs = segment_length(fx, fy, phi, steps)
    parts = [segment_length(x, y, phi, steps) for x, y in zip(inputs_x, inputs_y)]
    rhs = params.alpha * sum(s ** params.q for s in parts) ** (1 / params.q)
    if lhs > rhs + tol:
        log.info("one-level probe: segment bound %.3g exceeds %.3g", lhs, rhs)
    return lhs, rhs

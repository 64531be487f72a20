"""Contracting maps that cover an interval.

The maps are Phi_i(x) = 1/(1 + gamma (lambda_i + x)).  With the lambda_i
spread over a fine grid around a value lambda for which Phi has an attracting
fixpoint x0, every Phi_i contracts I = [x0 - r, x0 + r] and the images
Phi_i(I) cover I.  Walking backwards from a target through inverse maps and
then forwards from any start point lands within any desired distance of the
target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from gmpy2 import mpq

from ..exact import to_rational
from .poly import Polynomial, ratio_perturbation_radius


class CoverError(RuntimeError):
    """A cover-system invariant failed; indicates a bug, never silently ignored."""


def phi(gamma, lam, x):
    return 1 / (1 + gamma * (lam + x))


def phi_inverse(gamma, lam, y):
    return (1 / y - 1) / gamma - lam


def _image(gamma, lam, lo, hi):
    """Phi(lam, [lo, hi]) as an interval, or None if the pole lies inside."""
    d_lo = 1 + gamma * (lam + lo)
    d_hi = 1 + gamma * (lam + hi)
    if d_lo == 0 or d_hi == 0 or (d_lo > 0) != (d_hi > 0):
        return None
    a, b = 1 / d_lo, 1 / d_hi
    return (a, b) if a <= b else (b, a)


def _max_slope(gamma, lam, lo, hi):
    """max |Phi'| on [lo, hi]; |Phi'| = |gamma|/d^2 is monotone without a pole."""
    d_lo = 1 + gamma * (lam + lo)
    d_hi = 1 + gamma * (lam + hi)
    if d_lo == 0 or d_hi == 0 or (d_lo > 0) != (d_hi > 0):
        return None
    return max(abs(gamma) / (d_lo * d_lo), abs(gamma) / (d_hi * d_hi))


def covers(intervals: Sequence[tuple], lo, hi) -> bool:
    """Exact check that the union of closed intervals contains [lo, hi]."""
    reach = lo
    for a, b in sorted(intervals):
        if a > reach:
            break
        if b > reach:
            reach = b
        if reach >= hi:
            return True
    return reach >= hi


def centered_ratio_radius(build: Callable, point: Sequence, eps):
    """Perturbation radius of P/Q around ``point`` with each variable re-centred at 1.

    ``build`` receives polynomials standing for the original variables and
    returns (P, Q).  Re-centring keeps every coordinate of the base point
    nonzero, which the polynomial radius requires.
    """
    n = len(point)
    shifted = [Polynomial.variable(i, n) + (to_rational(a) - 1) for i, a in enumerate(point)]
    P, Q = build(shifted)
    return ratio_perturbation_radius(P, Q, [mpq(1)] * n, eps)


@dataclass
class CoverSystem:
    gamma: object
    x0: object
    r: object
    delta: object
    eta: object
    lam: object
    lambdas_star: list
    lambdas: list
    slope0: object                    # |Phi'(x0)| for the central map
    contraction: object = None        # max |Phi_i'| over I
    robust_contraction: object = None  # same, valid for any lambda_i within delta
    t_param: object = 2
    checks: dict = field(default_factory=dict)

    @property
    def interval(self) -> tuple:
        return (self.x0 - self.r, self.x0 + self.r)

    def contains(self, y) -> bool:
        lo, hi = self.interval
        return lo <= y <= hi

    def nearest_index(self, target_lambda) -> int:
        """Index of the grid point closest to ``target_lambda``."""
        lo = self.lambdas_star[0]
        step = 2 * self.delta
        j = int(round(float((target_lambda - lo) / step)))
        j = min(max(j, 0), len(self.lambdas_star) - 1)
        # float rounding can be off by one; settle exactly
        best = min(range(max(j - 2, 0), min(j + 3, len(self.lambdas_star))),
                   key=lambda i: (abs(self.lambdas_star[i] - target_lambda), i))
        return best

    def verify(self) -> dict:
        """Check contraction and covering exactly, for the stored lambdas and for
        every choice of lambdas within delta of the grid.  Raises CoverError."""
        g = self.gamma
        lo, hi = self.interval
        slopes = [_max_slope(g, l, lo, hi) for l in self.lambdas]
        if any(s is None or s >= 1 for s in slopes):
            raise CoverError("some map is not a contraction on I")
        images = [_image(g, l, lo, hi) for l in self.lambdas]
        if not covers(images, lo, hi):
            raise CoverError("images of I do not cover I")
        # Shifting lambda_i by s moves Phi_i(I) like shifting I by s, so the
        # robust versions use the widened / narrowed interval.
        d = self.delta
        rslopes = [_max_slope(g, l, lo - d, hi + d) for l in self.lambdas_star]
        if any(s is None or s >= 1 for s in rslopes):
            raise CoverError("contraction fails for some lambda within delta of the grid")
        rimages = [_image(g, l, lo + d, hi - d) for l in self.lambdas_star]
        if any(im is None for im in rimages) or not covers(rimages, lo, hi):
            raise CoverError("covering fails for some lambda within delta of the grid")
        self.contraction = max(slopes)
        self.robust_contraction = max(rslopes)
        self.checks = {"contraction": True, "covering": True, "robust": True}
        return self.checks


def _fixpoint_data(gamma, t):
    x1 = t
    x2 = -1 / (gamma * t)
    if x1 == x2 or x1 == -x2:
        return None
    lam = (-gamma * (x1 + x2) - 1) / gamma
    s1, s2 = abs(gamma) * x1 * x1, abs(gamma) * x2 * x2
    x0, s0 = (x1, s1) if s1 < 1 else (x2, s2)
    if not 0 < s0 < 1:
        return None
    return lam, x0, s0


def _system_for(gamma, lam, x0, s0, eta, t, realized=None) -> CoverSystem:
    r = s0 * eta / 4
    delta = r / 4
    lo = lam - eta / 2
    count = int((eta / (2 * delta)).__ceil__())
    stars = [lo + delta + 2 * delta * j for j in range(count)]
    while stars[-1] + delta < lam + eta / 2:
        stars.append(stars[-1] + 2 * delta)
    lambdas = list(stars) if realized is None else [to_rational(x) for x in realized]
    if len(lambdas) != len(stars) or any(abs(a - b) > delta for a, b in zip(lambdas, stars)):
        raise ValueError("realized lambdas must match the grid within delta")
    sys = CoverSystem(gamma, x0, r, delta, eta, lam, stars, lambdas, s0, t_param=t)
    sys.verify()
    return sys


def make_cover_system(gamma, t=2, realized: Sequence | None = None, widen: bool = False) -> CoverSystem:
    """Build and verify a cover system for a negative rational activity.

    ``t`` is the first fixpoint x1; the second is -1/(gamma t).  Collisions
    (x1 = +-x2) move on to t + 1.  ``realized`` optionally replaces the grid
    values by nearby rationals (each must be within delta).

    With ``widen`` the radius eta from the perturbation bound is doubled as
    long as the exact invariant checks still pass; a wider system needs
    coarser auxiliary gadgets.
    """
    gamma = to_rational(gamma)
    if gamma >= 0:
        raise ValueError("cover systems need a negative activity")
    t = to_rational(t)
    data = None
    for _ in range(16):
        data = _fixpoint_data(gamma, t)
        if data is not None:
            break
        t += 1
    if data is None:
        raise CoverError("no admissible fixpoint pair found")
    lam, x0, s0 = data
    tol = min(s0, 1 - s0) / 2

    def build(v):
        lp, x = v
        den = 1 + gamma * (lp + x)
        return Polynomial.constant(gamma, 2), den * den

    eta = centered_ratio_radius(build, [lam, x0], tol)
    sys = _system_for(gamma, lam, x0, s0, eta, t, realized)
    if widen and realized is None:
        for _ in range(60):
            try:
                sys = _system_for(gamma, lam, x0, s0, sys.eta * 2, t)
            except CoverError:
                break
    return sys


def iterate_cover_maps(sys: CoverSystem, y0, y, eps, lam_of: Callable[[int], object] | None = None):
    """Return (y_hat, word) with y_hat = Phi_{w[-1]}(...Phi_{w[0]}(y0)) and |y_hat - y| <= eps.

    ``lam_of(j)`` supplies the realised lambda of map j (defaults to the stored
    ones); every realised value must lie within delta of its grid point.
    """
    y0, y, eps = to_rational(y0), to_rational(y), to_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not (sys.contains(y0) and sys.contains(y)):
        raise ValueError("start and target must lie in the interval I")
    c = sys.contraction if lam_of is None else sys.robust_contraction
    lam_of = lam_of or (lambda j: sys.lambdas[j])
    g = sys.gamma
    width = 2 * sys.r
    back: list[int] = []
    w = y
    bound = width
    while bound > eps and not (w == y0 and not back):
        # preimage under the central map tells which grid point to use
        want = sys.lam + phi_inverse(g, sys.lam, w) - sys.x0
        order = [sys.nearest_index(want)]
        chosen = None
        for j in order + [i for i in range(len(sys.lambdas_star)) if i != order[0]]:
            pre = phi_inverse(g, lam_of(j), w)
            if sys.contains(pre):
                chosen = (j, pre)
                break
        if chosen is None:
            raise CoverError(f"no inverse branch keeps {w} inside I")
        back.append(chosen[0])
        w = chosen[1]
        bound *= c
    word = list(reversed(back))
    x = y0
    for j in word:
        x = phi(g, lam_of(j), x)
    if abs(x - y) > eps or not sys.contains(x):
        raise CoverError("forward orbit missed the target")
    return x, word

"""Sparse multivariate polynomials over the rationals and perturbation radii.

A perturbation radius answers: how far may each input move before the value
of a polynomial (or a ratio of two) moves by more than a given amount?
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from gmpy2 import mpq

from ..exact import ComplexExact, to_rational


def rational_size(x) -> float:
    """1 + log(|p| + |q|) for x = p/q in lowest terms."""
    x = to_rational(x)
    return 1 + math.log(abs(int(x.numerator)) + int(x.denominator))


class Polynomial:
    """Sum of ``coef * prod x_i^e_i`` with exact rational coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Iterable[tuple] = ()):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        acc: dict[tuple[int, ...], object] = {}
        for coef, exps in terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps} for {nvars} variables")
            acc[exps] = acc.get(exps, mpq(0)) + to_rational(coef)
        self.nvars = nvars
        self.terms = tuple(sorted(((c, e) for e, c in acc.items() if c != 0), key=lambda t: t[1]))

    @classmethod
    def constant(cls, c, nvars: int = 0) -> "Polynomial":
        return cls(nvars, [(c, (0,) * nvars)])

    @classmethod
    def variable(cls, i: int, nvars: int) -> "Polynomial":
        exps = [0] * nvars
        exps[i] = 1
        return cls(nvars, [(1, exps)])

    @classmethod
    def variables(cls, nvars: int) -> list["Polynomial"]:
        return [cls.variable(i, nvars) for i in range(nvars)]

    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("polynomials over different variable counts")
            return other
        return Polynomial.constant(other, self.nvars)

    def __add__(self, other):
        other = self._lift(other)
        return Polynomial(self.nvars, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, [(-c, e) for c, e in self.terms])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        return Polynomial(self.nvars, [
            (c1 * c2, tuple(a + b for a, b in zip(e1, e2)))
            for c1, e1 in self.terms for c2, e2 in other.terms
        ])

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Polynomial.constant(1, self.nvars)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Polynomial) and (self.nvars, self.terms) == (other.nvars, other.terms)

    def __hash__(self):
        return hash((self.nvars, self.terms))

    def __repr__(self):
        return f"Polynomial({self.nvars}, {list(self.terms)!r})"

    @property
    def degree(self) -> int:
        return max((sum(e) for _, e in self.terms), default=0)

    def is_constant(self) -> bool:
        return all(not any(e) for _, e in self.terms)

    def appearing(self) -> set[int]:
        return {i for _, e in self.terms for i, d in enumerate(e) if d}

    def size(self) -> float:
        """Total rational size of the coefficients plus the number of exponent entries."""
        return sum(rational_size(c) for c, _ in self.terms) + self.nvars * len(self.terms)

    def evaluate(self, point: Sequence):
        if len(point) != self.nvars:
            raise ValueError(f"expected {self.nvars} values, got {len(point)}")
        complex_mode = any(isinstance(x, ComplexExact) for x in point)
        total = ComplexExact() if complex_mode else mpq(0)
        for c, exps in self.terms:
            t = c
            for x, d in zip(point, exps):
                if d:
                    t = t * (x ** d)
            total = total + t
        return total

    __call__ = evaluate


def _floor_pow2(x) -> object:
    """Largest power of two not exceeding the positive rational x."""
    x = to_rational(x)
    k = int(x.numerator).bit_length() - int(x.denominator).bit_length()
    p = mpq(2) ** k if k >= 0 else mpq(1, 2 ** (-k))
    while p > x:
        p /= 2
    while p * 2 <= x:
        p *= 2
    return p


def poly_perturbation_radius(P: Polynomial, a: Sequence, eps) -> object:
    """A rational r > 0 with |P(b) - P(a)| <= eps whenever every |b_i - a_i| <= r.

    The radius satisfies, for every term c_j * prod x^d_ij and every variable i
    appearing in it with d = d_ij:

        r <= |a_i|,   r*d*2^(d-1) <= |a_i|,
        r*d*(2|a_i|)^(d-1) * prod_{k<i} |a_k|^d_kj * prod_{k>i} 2|a_k|^d_kj
            <= eps / (m*n*|c_j|)

    and is rounded down to a power of two to keep its bit size small.
    """
    eps = to_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    a = [to_rational(x) for x in a]
    if len(a) != P.nvars:
        raise ValueError(f"expected {P.nvars} values, got {len(a)}")
    for i in sorted(P.appearing()):
        if a[i] == 0:
            raise ValueError(f"variable {i} appears in the polynomial but a[{i}] = 0")
    if P.is_constant():
        return mpq(1)
    absa = [abs(x) for x in a]
    m, n = len(P.terms), P.nvars
    bound = None
    for c, exps in P.terms:
        budget = eps / (m * n * abs(c))
        for i, d in enumerate(exps):
            if not d:
                continue
            coef = d * (2 * absa[i]) ** (d - 1)
            for k, dk in enumerate(exps):
                if k < i:
                    coef *= absa[k] ** dk
                elif k > i and dk:
                    coef *= 2 * absa[k] ** dk
            for cand in (absa[i], absa[i] / (d * 2 ** (d - 1)), budget / coef):
                bound = cand if bound is None or cand < bound else bound
    return _floor_pow2(bound)


def ratio_perturbation_radius(P: Polynomial, Q: Polynomial, a: Sequence, eps) -> object:
    """A rational r > 0 such that Q stays nonzero and P/Q moves by at most eps
    whenever every |b_i - a_i| <= r."""
    eps = to_rational(eps)
    a = [to_rational(x) for x in a]
    qa = Q.evaluate(a)
    if qa == 0:
        raise ZeroDivisionError("Q vanishes at the base point")
    pa = P.evaluate(a)
    eta = min(eps * qa * qa / (2 * (abs(pa) + abs(qa))), abs(qa) / 2)
    return min(poly_perturbation_radius(P, a, eta), poly_perturbation_radius(Q, a, eta))


def grid_points(a: Sequence, radius, count: int = 1000) -> list[list]:
    """About ``count`` points of the box prod [a_i - r, a_i + r] on a uniform grid
    (corners included)."""
    a = [to_rational(x) for x in a]
    n = len(a)
    if n == 0:
        return [[]]
    per = max(2, round(count ** (1 / n)))
    ticks = [[x - radius + 2 * radius * mpq(t, per - 1) for t in range(per)] for x in a]
    pts: list[list] = [[]]
    for axis in ticks:
        pts = [p + [v] for p in pts for v in axis]
    return pts


def sweep_deviation(P: Polynomial, a: Sequence, radius, Q: Polynomial | None = None,
                    count: int = 1000) -> object:
    """Largest exact deviation of P (or P/Q) from its value at ``a`` over the grid."""
    a = [to_rational(x) for x in a]
    base = P.evaluate(a) if Q is None else P.evaluate(a) / Q.evaluate(a)
    worst = mpq(0)
    for b in grid_points(a, radius, count):
        val = P.evaluate(b) if Q is None else P.evaluate(b) / Q.evaluate(b)
        worst = max(worst, abs(val - base))
    return worst

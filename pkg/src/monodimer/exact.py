"""Exact evaluation of the matching polynomial and its conditioned variants.

All arithmetic is over the rationals (``gmpy2.mpq``) or Gaussian rationals
(:class:`ComplexExact`).  Nothing in this module touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Sequence, Union

from gmpy2 import mpq

from .graph import Graph

Rational = type(mpq(0))
Number = Union[int, Fraction, "ComplexExact", Rational]


def to_rational(x) -> Rational:
    """Convert ints, Fractions, mpq, or strings like ``"-3/4"``/``"0.1"`` exactly."""
    if isinstance(x, Rational):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, Fraction)):
        return mpq(x)
    if isinstance(x, str):
        try:
            return mpq(x.strip())
        except ValueError:
            raise ValueError(f"not an exact rational: {x!r}") from None
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact input; pass a string or Fraction")
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class ComplexExact:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = to_rational(re)
        self.im = to_rational(im)

    @classmethod
    def _raw(cls, re: Rational, im: Rational) -> "ComplexExact":
        z = object.__new__(cls)
        z.re = re
        z.im = im
        return z

    @classmethod
    def coerce(cls, x) -> "ComplexExact":
        if isinstance(x, ComplexExact):
            return x
        if isinstance(x, complex):
            raise TypeError("python complex is floating point; use ComplexExact or parse_complex")
        return cls._raw(to_rational(x), mpq(0))

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, ComplexExact):
            return ComplexExact._raw(self.re + other.re, self.im + other.im)
        try:
            o = to_rational(other)
        except TypeError:
            return NotImplemented
        return ComplexExact._raw(self.re + o, self.im)

    __radd__ = __add__

    def __neg__(self):
        return ComplexExact._raw(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, ComplexExact):
            return ComplexExact._raw(self.re - other.re, self.im - other.im)
        try:
            o = to_rational(other)
        except TypeError:
            return NotImplemented
        return ComplexExact._raw(self.re - o, self.im)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, ComplexExact):
            a, b, c, d = self.re, self.im, other.re, other.im
            return ComplexExact._raw(a * c - b * d, a * d + b * c)
        try:
            o = to_rational(other)
        except TypeError:
            return NotImplemented
        return ComplexExact._raw(self.re * o, self.im * o)

    __rmul__ = __mul__

    def norm2(self) -> Rational:
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "ComplexExact":
        return ComplexExact._raw(self.re, -self.im)

    def reciprocal(self) -> "ComplexExact":
        n = self.norm2()
        if n == 0:
            raise ZeroDivisionError("division by exact zero")
        return ComplexExact._raw(self.re / n, -self.im / n)

    def __truediv__(self, other):
        if isinstance(other, ComplexExact):
            return self * other.reciprocal()
        try:
            o = to_rational(other)
        except TypeError:
            return NotImplemented
        if o == 0:
            raise ZeroDivisionError("division by exact zero")
        return ComplexExact._raw(self.re / o, self.im / o)

    def __rtruediv__(self, other):
        return ComplexExact.coerce(other) * self.reciprocal()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.reciprocal() ** (-k)
        result, base = ComplexExact._raw(mpq(1), mpq(0)), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # comparison / conversion ------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, ComplexExact):
            return self.re == other.re and self.im == other.im
        if isinstance(other, complex):
            return complex(self) == other
        try:
            o = to_rational(other)
        except TypeError:
            return NotImplemented
        return self.im == 0 and self.re == o

    def __hash__(self):
        return hash(self.re) if self.im == 0 else hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def is_real(self) -> bool:
        return self.im == 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self) -> float:
        return abs(complex(self))

    def __repr__(self):
        return f"ComplexExact({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def to_pair_text(self) -> str:
        """``"a/b c/d"`` rendering, the inverse of :func:`parse_complex`."""
        return f"{_frac_text(self.re)} {_frac_text(self.im)}"

    def to_decimal(self, digits: int = 20) -> str:
        re, im = decimal_text(self.re, digits), decimal_text(self.im, digits)
        return re if self.im == 0 else f"{re} {im}"


def _frac_text(q: Rational) -> str:
    return f"{q.numerator}/{q.denominator}"


def decimal_text(q, digits: int = 20) -> str:
    """Decimal rendering of a rational with ``digits`` significant digits."""
    q = to_rational(q)
    with localcontext() as ctx:
        ctx.prec = max(digits, 1)
        return str(Decimal(int(q.numerator)) / Decimal(int(q.denominator)))


def parse_complex(text: str) -> ComplexExact:
    """Parse ``"a/b c/d"`` (real then imaginary), ``"a/b"`` or decimals ``"0 1"``."""
    parts = text.replace(",", " ").split()
    if not 1 <= len(parts) <= 2:
        raise ValueError(f"expected 're im' or 're', got {text!r}")
    re = to_rational(parts[0])
    im = to_rational(parts[1]) if len(parts) == 2 else mpq(0)
    return ComplexExact._raw(re, im)


def as_scalar(gamma) -> Union[Rational, ComplexExact]:
    """Narrow an activity to ``mpq`` when it is real (fast path) else ComplexExact."""
    if isinstance(gamma, ComplexExact):
        return gamma.re if gamma.im == 0 else gamma
    if isinstance(gamma, str):
        return as_scalar(parse_complex(gamma))
    return to_rational(gamma)


def is_zero(x) -> bool:
    return not x


def simplest_rational(lo, hi) -> Rational:
    """The rational with the smallest denominator in the closed interval [lo, hi]
    (smallest |numerator| among those)."""
    lo, hi = to_rational(lo), to_rational(hi)
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return mpq(0)
    if hi < 0:
        return -simplest_rational(-hi, -lo)
    # continued-fraction descent; terms collect the common integer parts
    terms: list = []
    while True:
        c = -((-lo.numerator) // lo.denominator)  # ceil(lo)
        if c <= hi:
            x = mpq(c)
            break
        a = lo.numerator // lo.denominator
        terms.append(a)
        lo, hi = 1 / (hi - a), 1 / (lo - a)
    for a in reversed(terms):
        x = a + 1 / x
    return x


# ---------------------------------------------------------------------------
# matching polynomial by vertex-deletion recursion
# ---------------------------------------------------------------------------

def _poly_add(a: list[int], b: list[int]) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return out


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _component(masks: Sequence[int], mask: int) -> int:
    """Bitmask of the connected component of the lowest vertex in ``mask``."""
    low = mask & -mask
    comp = frontier = low
    while frontier:
        nxt = 0
        f = frontier
        while f:
            b = f & -f
            nxt |= masks[b.bit_length() - 1]
            f ^= b
        nxt &= mask & ~comp
        comp |= nxt
        frontier = nxt
    return comp


def _pick_vertex(masks: Sequence[int], mask: int) -> int:
    """Vertex of maximum degree inside ``mask`` (lowest id on ties)."""
    best, best_deg = -1, -1
    m = mask
    while m:
        b = m & -m
        v = b.bit_length() - 1
        d = bin(masks[v] & mask).count("1")
        if d > best_deg:
            best, best_deg = v, d
        m ^= b
    return best


@lru_cache(maxsize=4096)
def matching_polynomial(g: Graph) -> tuple[int, ...]:
    """Coefficients ``m_k`` (number of k-edge matchings) of Z_G(x) = sum m_k x^k.

    Computed by the deletion recursion Z_S = Z_{S-v} + x * sum_u Z_{S-v-u}
    with memoisation on the residual vertex set and factorisation over
    connected components.
    """
    masks = g.masks
    memo: dict[int, list[int]] = {0: [1]}

    def rec(mask: int) -> list[int]:
        hit = memo.get(mask)
        if hit is not None:
            return hit
        comp = _component(masks, mask)
        if comp != mask:
            res = _poly_mul(rec(comp), rec(mask ^ comp))
        else:
            v = _pick_vertex(masks, mask)
            rest = mask & ~(1 << v)
            res = rec(rest)
            nb = masks[v] & mask
            acc: list[int] = [0]
            while nb:
                b = nb & -nb
                acc = _poly_add(acc, rec(rest & ~b))
                nb ^= b
            res = _poly_add(res, [0] + acc)
        memo[mask] = res
        return res

    coeffs = rec((1 << g.vertex_count) - 1)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    return tuple(coeffs)


def horner(coeffs: Sequence[int], x):
    acc = mpq(0) if not isinstance(x, ComplexExact) else ComplexExact()
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _one_like(gamma):
    return ComplexExact._raw(mpq(1), mpq(0)) if isinstance(gamma, ComplexExact) else mpq(1)


def _forest_pair(g: Graph, mask: int, gamma, root_of=None):
    """Tree DP on the forest induced by ``mask``.

    Returns Z of the induced forest.  Each vertex carries (a, b) with
    a = Z of its subtree with the vertex unmatched, b = Z of its subtree.
    """
    adj = g.adjacency
    one = _one_like(gamma)
    total = one
    seen = 0
    m = mask
    while m:
        low = m & -m
        m ^= low
        if seen & low:
            continue
        r = low.bit_length() - 1
        # iterative DFS for an order where children precede parents
        order, parent = [], {r: -1}
        stack = [r]
        seen |= low
        while stack:
            x = stack.pop()
            order.append(x)
            for y in adj[x]:
                if (mask >> y) & 1 and not (seen >> y) & 1:
                    seen |= 1 << y
                    parent[y] = x
                    stack.append(y)
        A: dict[int, object] = {}
        B: dict[int, object] = {}
        for x in reversed(order):
            a_acc, b_acc = one, 0 * one
            for y in adj[x]:
                if parent.get(y) == x:
                    b_acc = b_acc * B[y] + a_acc * A[y]
                    a_acc = a_acc * B[y]
            A[x] = a_acc
            B[x] = a_acc + gamma * b_acc
        total = total * B[r]
    return total


def _is_forest_mask(g: Graph, mask: int) -> bool:
    masks = g.masks
    edges2 = 0
    m = mask
    while m:
        b = m & -m
        edges2 += bin(masks[b.bit_length() - 1] & mask).count("1")
        m ^= b
    comps = 0
    rest = mask
    while rest:
        comps += 1
        rest &= ~_component(masks, rest)
    return edges2 // 2 == bin(mask).count("1") - comps


_POLY_LIMIT = 26


class _Evaluator:
    """Z on vertex subsets of one graph at one activity, with a per-call memo."""

    def __init__(self, g: Graph, gamma):
        self.g = g
        self.gamma = as_scalar(gamma)
        self.full = (1 << g.vertex_count) - 1
        self.forest = g.is_forest()
        self.memo: dict[int, object] = {}
        self.coeffs = None
        if not self.forest and g.vertex_count <= _POLY_LIMIT:
            self.coeffs = matching_polynomial(g)

    def z(self, mask: int):
        if mask == self.full and self.coeffs is not None:
            return horner(self.coeffs, self.gamma)
        hit = self.memo.get(mask)
        if hit is not None:
            return hit
        if self.forest or _is_forest_mask(self.g, mask):
            res = _forest_pair(self.g, mask, self.gamma)
        elif mask != self.full and self.g.vertex_count <= _POLY_LIMIT:
            sub, _ = self.g.induced(v for v in range(self.g.vertex_count) if (mask >> v) & 1)
            res = horner(matching_polynomial(sub), self.gamma)
        else:
            res = self._recurse(mask)
        self.memo[mask] = res
        return res

    def _recurse(self, mask: int):
        masks = self.g.masks
        comp = _component(masks, mask)
        if comp != mask:
            return self.z(comp) * self.z(mask ^ comp)
        v = _pick_vertex(masks, mask)
        rest = mask & ~(1 << v)
        acc = 0 * _one_like(self.gamma)
        nb = masks[v] & mask
        while nb:
            b = nb & -nb
            acc = acc + self.z(rest & ~b)
            nb ^= b
        return self.z(rest) + self.gamma * acc


def _wrap(x) -> ComplexExact:
    return x if isinstance(x, ComplexExact) else ComplexExact._raw(mpq(x), mpq(0))


def z_exact(g: Graph, gamma) -> ComplexExact:
    """Z_G(gamma) exactly.  The empty graph gives 1.

    Small graphs go through :func:`matching_polynomial`; forests use a
    linear tree recurrence; larger graphs run the same deletion recursion
    directly on values.
    """
    return _wrap(_Evaluator(g, gamma).z((1 << g.vertex_count) - 1))


def z_deletion(g: Graph, gamma) -> ComplexExact:
    """Z_G(gamma) strictly through the deletion recursion (no forest shortcut)."""
    return _wrap(horner(matching_polynomial(g), as_scalar(gamma)))


# ---------------------------------------------------------------------------
# independent path: explicit enumeration of matchings
# ---------------------------------------------------------------------------

ENUMERATION_VERTEX_CAP = 20


def iter_matchings(g: Graph) -> Iterable[tuple[tuple[int, int], ...]]:
    """Yield every matching as a tuple of edges, by include/exclude over sorted edges."""
    if g.vertex_count > ENUMERATION_VERTEX_CAP:
        raise ValueError(f"enumeration is capped at {ENUMERATION_VERTEX_CAP} vertices")
    edges = g.sorted_edges
    m = len(edges)
    chosen: list[tuple[int, int]] = []

    def go(i: int, used: int):
        if i == m:
            yield tuple(chosen)
            return
        yield from go(i + 1, used)
        u, v = edges[i]
        if not (used >> u) & 1 and not (used >> v) & 1:
            chosen.append(edges[i])
            yield from go(i + 1, used | (1 << u) | (1 << v))
            chosen.pop()

    yield from go(0, 0)


def matching_counts_by_enumeration(g: Graph) -> tuple[int, ...]:
    counts: dict[int, int] = {}
    for mt in iter_matchings(g):
        counts[len(mt)] = counts.get(len(mt), 0) + 1
    top = max(counts)
    return tuple(counts.get(k, 0) for k in range(top + 1))


def z_enumerate(g: Graph, gamma) -> ComplexExact:
    """Z_G(gamma) by summing gamma^|M| over explicitly enumerated matchings."""
    return _wrap(horner(matching_counts_by_enumeration(g), as_scalar(gamma)))


# ---------------------------------------------------------------------------
# conditioned partition functions
# ---------------------------------------------------------------------------

MATCHED, UNMATCHED = "matched", "unmatched"


class ZeroPartitionFunction(ZeroDivisionError):
    """Z_G(gamma) = 0, so the requested ratio is undefined."""


def _normalize_cond(g: Graph, cond) -> tuple[list[int], list[int]]:
    matched, unmatched, seen = [], [], set()
    for v, status in (cond.items() if isinstance(cond, Mapping) else cond):
        g._check_vertex(v)
        if v in seen:
            raise ValueError(f"vertex {v} conditioned twice")
        seen.add(v)
        if status in (MATCHED, True, 1, "u"):
            matched.append(v)
        elif status in (UNMATCHED, False, 0, "not"):
            unmatched.append(v)
        else:
            raise ValueError(f"unknown status {status!r}")
    return matched, unmatched


def _conditioned(ev: _Evaluator, matched: Sequence[int], unmatched: Sequence[int]):
    """Inclusion-exclusion: Z[S matched, T unmatched] = sum_{A<=S} (-1)^|A| Z(G - T - A)."""
    base = ev.full
    for v in unmatched:
        base &= ~(1 << v)
    total = 0 * _one_like(ev.gamma)
    for r in range(len(matched) + 1):
        for sub in combinations(matched, r):
            mask = base
            for v in sub:
                mask &= ~(1 << v)
            term = ev.z(mask)
            total = total - term if r % 2 else total + term
    return total


def z_conditioned(g: Graph, gamma, cond) -> ComplexExact:
    """Sum of gamma^|M| over matchings meeting every (vertex, status) condition."""
    matched, unmatched = _normalize_cond(g, cond)
    return _wrap(_conditioned(_Evaluator(g, gamma), matched, unmatched))


def p_unmatched(g: Graph, v: int, gamma) -> ComplexExact:
    """p_v = Z_{G,not v} / Z_G; raises :class:`ZeroPartitionFunction` when Z_G = 0."""
    g._check_vertex(v)
    ev = _Evaluator(g, gamma)
    z = ev.z(ev.full)
    if not z:
        raise ZeroPartitionFunction("Z_G(gamma) = 0")
    return _wrap(ev.z(ev.full & ~(1 << v)) / z)


@dataclass(frozen=True)
class MatchSummary:
    z: ComplexExact
    z_not_u: ComplexExact
    z_u: ComplexExact
    pairwise: dict | None = None  # keys "uv", "u~v", "~uv", "~u~v"


def match_summary(g: Graph, gamma, u: int, v: int | None = None) -> MatchSummary:
    ev = _Evaluator(g, gamma)
    z = ev.z(ev.full)
    z_not_u = _conditioned(ev, [], [u])
    pair = None
    if v is not None:
        if v == u:
            raise ValueError("pairwise summary needs two distinct vertices")
        pair = {
            "uv": _wrap(_conditioned(ev, [u, v], [])),
            "u~v": _wrap(_conditioned(ev, [u], [v])),
            "~uv": _wrap(_conditioned(ev, [v], [u])),
            "~u~v": _wrap(_conditioned(ev, [], [u, v])),
        }
    return MatchSummary(_wrap(z), _wrap(z_not_u), _wrap(z - z_not_u), pair)


# ---------------------------------------------------------------------------
# zero-freeness harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroFreeVerdict:
    in_forbidden_ray: bool
    z: ComplexExact
    consistent: bool
    ray_endpoint: Rational


def ray_endpoint(max_degree: int) -> Rational:
    """Right end of the excluded ray: -1/(4(D-1)), with D raised to 2 for D <= 2."""
    d = max(max_degree, 2)
    return mpq(-1, 4 * (d - 1))


def zero_free_check(g: Graph, gamma) -> ZeroFreeVerdict:
    """Evaluate Z exactly and check it is nonzero whenever gamma is off the ray
    ``(-inf, -1/(4(D-1)))``.  ``consistent=False`` would be a counterexample."""
    gam = ComplexExact.coerce(gamma) if not isinstance(gamma, str) else parse_complex(gamma)
    end = ray_endpoint(g.max_degree)
    on_ray = gam.im == 0 and gam.re < end
    z = z_exact(g, gam)
    return ZeroFreeVerdict(on_ray, z, on_ray or bool(z), end)

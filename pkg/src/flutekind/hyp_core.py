"""Upper half-plane primitives: ideal points, geodesics, isometries, shears.

Conventions used throughout the package:

* ``cross_ratio(a, b, c, d) = ((a - c)(b - d)) / ((a - d)(b - c))``; factors
  involving the point at infinity are dropped (the exact limit).
* Circular order on the boundary is the order of increasing real value with
  infinity last; "counterclockwise" below means that order (it is the
  counterclockwise order after the Cayley transform).
* ``shear_of_quad(p, q, r, t)`` takes the vertices of an ideal quadrilateral
  in counterclockwise order with diagonal oriented ``p -> r``.  ``q`` then
  lies to the right of the diagonal and ``t`` to its left, and the shear is
  ``position(foot of q) - position(foot of t)`` measured along the diagonal.
  This is the sign for which the even and odd shear closed forms of the
  criterion module hold (checked against the pentagon development in
  ``cover_oracle``).

Numbers may be Python floats or ``mpmath.mpf``; when any argument is an
``mpf`` the computation is carried out with mpmath at the ambient precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import mpmath

Real = Union[float, int, "mpmath.mpf"]


class DomainError(ValueError):
    """Raised when a geometric primitive receives degenerate input."""


def _eps(x):
    if isinstance(x, mpmath.mpf):
        return mpmath.eps
    return 2.220446049250313e-16


def _lib(*xs):
    for x in xs:
        if isinstance(x, (mpmath.mpf, mpmath.mpc)):
            return mpmath
    return math


# ---------------------------------------------------------------------------
# Boundary points and geodesics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the boundary of the upper half-plane.

    ``value is None`` encodes the point at infinity; use
    :meth:`BoundaryPoint.infinity` or pass ``math.inf`` to :func:`as_point`.
    """

    value: Optional[Real] = None

    def __post_init__(self):
        v = self.value
        if v is None:
            return
        if isinstance(v, mpmath.mpf):
            if mpmath.isnan(v):
                raise DomainError("boundary point cannot be NaN")
            if mpmath.isinf(v):
                object.__setattr__(self, "value", None)
            return
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise TypeError(f"unsupported boundary value {v!r}")
        if math.isnan(v):
            raise DomainError("boundary point cannot be NaN")
        if math.isinf(v):
            object.__setattr__(self, "value", None)

    @classmethod
    def infinity(cls) -> "BoundaryPoint":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __repr__(self):
        return "BoundaryPoint(inf)" if self.value is None else f"BoundaryPoint({self.value!r})"


INFINITY = BoundaryPoint(None)


def as_point(x) -> BoundaryPoint:
    if isinstance(x, BoundaryPoint):
        return x
    return BoundaryPoint(x)


def _same(x: BoundaryPoint, y: BoundaryPoint) -> bool:
    if x.is_infinite or y.is_infinite:
        return x.is_infinite and y.is_infinite
    return x.value == y.value


@dataclass(frozen=True)
class Geodesic:
    """Oriented geodesic of the upper half-plane, from ``start`` to ``end``."""

    start: BoundaryPoint
    end: BoundaryPoint

    def __post_init__(self):
        object.__setattr__(self, "start", as_point(self.start))
        object.__setattr__(self, "end", as_point(self.end))
        if _same(self.start, self.end):
            raise DomainError("geodesic endpoints must differ")

    def reversed(self) -> "Geodesic":
        return Geodesic(self.end, self.start)


def _key(x: BoundaryPoint):
    return (1, 0) if x.is_infinite else (0, x.value)


def is_ccw(x, y, z) -> bool:
    """True when the boundary points x, y, z are in counterclockwise order."""
    kx, ky, kz = _key(as_point(x)), _key(as_point(y)), _key(as_point(z))
    return (kx < ky < kz) or (ky < kz < kx) or (kz < kx < ky)


def on_right(x, g: Geodesic) -> bool:
    """Whether the boundary point ``x`` lies to the right of ``g``."""
    return is_ccw(g.start, x, g.end)


# ---------------------------------------------------------------------------
# Isometries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Isometry:
    """Element of PSL(2, R) acting by z -> (a z + b) / (c z + d)."""

    a: Real
    b: Real
    c: Real
    d: Real

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0:
            raise DomainError("isometry must have positive determinant")
        lib = _lib(self.a, self.b, self.c, self.d)
        s = lib.sqrt(det)
        a, b, c, d = self.a / s, self.b / s, self.c / s, self.d / s
        # canonical sign of the PSL representative
        if c < 0 or (c == 0 and d < 0):
            a, b, c, d = -a, -b, -c, -d
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, v)

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def translation(cls, dx: Real) -> "Isometry":
        one = dx - dx + 1
        return cls(one, dx, one * 0, one)

    def det(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    def apply_boundary(self, x) -> BoundaryPoint:
        x = as_point(x)
        if x.is_infinite:
            if self.c == 0:
                return INFINITY
            return BoundaryPoint(self.a / self.c)
        den = self.c * x.value + self.d
        if den == 0:
            return INFINITY
        return BoundaryPoint((self.a * x.value + self.b) / den)

    def apply_interior(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_geodesic(self, g: Geodesic) -> Geodesic:
        return Geodesic(self.apply_boundary(g.start), self.apply_boundary(g.end))


def apply_isometry(m: Isometry, x):
    """Apply ``m`` to a boundary point, a geodesic or an interior point."""
    if isinstance(x, Geodesic):
        return m.apply_geodesic(x)
    if isinstance(x, BoundaryPoint):
        return m.apply_boundary(x)
    if isinstance(x, (complex, mpmath.mpc)):
        return m.apply_interior(x)
    return m.apply_boundary(x)


def standardizing_map(g: Geodesic) -> Isometry:
    """Isometry sending ``g.start`` to 0 and ``g.end`` to infinity."""
    p, r = g.start, g.end
    if p.is_infinite:
        # z -> 1 / (r - z) = [[0, 1], [-1, r]]
        return Isometry(0 * r.value, 1 + 0 * r.value, -1 + 0 * r.value, r.value)
    if r.is_infinite:
        one = 1 + 0 * p.value
        return Isometry(one, -p.value, 0 * one, one)
    p, r = p.value, r.value
    if r > p:
        # z -> (z - p) / (r - z)
        return Isometry(1 + 0 * p, -p, -1 + 0 * p, r)
    return Isometry(-1 + 0 * p, p, -1 + 0 * p, r)


# ---------------------------------------------------------------------------
# Cross-ratios and shears
# ---------------------------------------------------------------------------


def cross_ratio(a, b, c, d) -> Real:
    """``((a - c)(b - d)) / ((a - d)(b - c))`` with exact limits at infinity."""
    pts = [as_point(x) for x in (a, b, c, d)]
    for i in range(4):
        for j in range(i + 1, 4):
            if _same(pts[i], pts[j]):
                raise DomainError("cross-ratio needs four distinct points")
    a, b, c, d = pts

    def diff(x, y):
        if x.is_infinite or y.is_infinite:
            return None
        return x.value - y.value

    num = [diff(a, c), diff(b, d)]
    den = [diff(a, d), diff(b, c)]
    n = 1
    for f in num:
        if f is not None:
            n = n * f
    q = 1
    for f in den:
        if f is not None:
            q = q * f
    return n / q


def shear_of_quad(p, q, r, t) -> Real:
    """Shear across the diagonal ``p -> r`` of the ideal quadrilateral p, q, r, t.

    Equals ``log |cross_ratio(q, t, p, r)|``; see the module docstring for the
    orientation convention.  Symmetric under ``(p, q, r, t) -> (r, t, p, q)``.
    """
    cr = cross_ratio(q, t, p, r)
    if cr == 0:
        raise DomainError("degenerate quadrilateral")
    return _lib(cr).log(abs(cr))


def foot_of_perpendicular(x, g: Geodesic):
    """Point of ``g`` where the geodesic from ``x`` meets ``g`` orthogonally.

    Returned as a complex number (``mpmath.mpc`` under mpmath input).
    """
    x = as_point(x)
    if _same(x, g.start) or _same(x, g.end):
        raise DomainError("point is an endpoint of the geodesic")
    m = standardizing_map(g)
    y = m.apply_boundary(x).value
    lib = _lib(y)
    if lib is mpmath:
        z = mpmath.mpc(0, abs(y))
    else:
        z = complex(0.0, abs(y))
    return m.inverse().apply_interior(z)


def position_on(g: Geodesic, z) -> Real:
    """Signed arclength coordinate of the interior point ``z`` along ``g``.

    The origin is the image of ``i`` under the inverse standardizing map.
    Only differences of positions are meaningful.
    """
    w = standardizing_map(g).apply_interior(z)
    lib = _lib(w)
    return lib.log(w.imag) if lib is mpmath else math.log(w.imag)


def foot_position(x, g: Geodesic) -> Real:
    """Position along ``g`` of the foot of the perpendicular from ``x``."""
    x = as_point(x)
    if _same(x, g.start) or _same(x, g.end):
        raise DomainError("point is an endpoint of the geodesic")
    y = standardizing_map(g).apply_boundary(x).value
    return _lib(y).log(abs(y))


def shear_by_feet(p, q, r, t) -> Real:
    """Shear computed directly from the feet of the perpendiculars."""
    g = Geodesic(p, r)
    return foot_position(q, g) - foot_position(t, g)


def geodesic_distance(g: Geodesic, h: Geodesic) -> Real:
    """Length of the common perpendicular of two disjoint geodesics."""
    a, b, c, d = g.start, g.end, h.start, h.end
    pts = [a, b, c, d]
    for i in range(4):
        for j in range(i + 1, 4):
            if _same(pts[i], pts[j]):
                raise DomainError("asymptotic geodesics have no common perpendicular")
    # canonical ordering makes the result exactly symmetric in (g, h)
    ka = sorted([_key(a), _key(b)])
    kc = sorted([_key(c), _key(d)])
    if kc < ka:
        a, b, c, d = c, d, a, b
    if is_ccw(a, c, b) != is_ccw(a, d, b):
        raise DomainError("geodesics cross")
    x = cross_ratio(a, b, c, d)
    if x > 1:
        c, d = d, c
        x = cross_ratio(a, b, c, d)
    # 1 - cr(a, b, c, d) == cr(a, c, b, d); no cancellation for distant geodesics
    y = cross_ratio(a, c, b, d)
    if not (0 < x < 1 and y > 0):
        raise DomainError("geodesics cross")
    lib = _lib(x, y)
    return 2 * lib.asinh(lib.sqrt(x / y))


# ---------------------------------------------------------------------------
# Trirectangles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trirectangle:
    phi: Optional[Real]
    beta: Optional[Real]
    alpha: Optional[Real]


def trirectangle_relations(a: Real, b: Real) -> Trirectangle:
    """Acute angle and remaining sides of the trirectangle with legs a, b.

    ``cos(phi) = sinh(a) sinh(b)``, ``cosh(a) = tanh(beta) coth(b)`` and
    ``sinh(alpha) = sinh(a) cosh(beta)``.  With the right-angled vertex O
    between the legs, ``beta`` is the side from the far end of ``a`` to the
    acute vertex and ``alpha`` the side from the far end of ``b``.  When
    ``sinh(a) sinh(b) > 1`` no such trirectangle exists and every field is
    ``None``.
    """
    if not (a > 0 and b > 0):
        raise DomainError("trirectangle legs must be positive")
    lib = _lib(a, b)
    prod = lib.sinh(a) * lib.sinh(b)
    if abs(prod - 1) <= 4 * _eps(prod):
        prod = prod * 0 + 1
    if prod > 1:
        return Trirectangle(None, None, None)
    phi = lib.acos(prod)
    if prod == 1:
        # fourth vertex is ideal; beta and alpha are infinite
        return Trirectangle(phi, None, None)
    tb = lib.cosh(a) * lib.tanh(b)
    if tb >= 1:
        raise DomainError("no finite beta with tanh(beta) >= 1")
    beta = lib.atanh(tb)
    alpha = lib.asinh(lib.sinh(a) * lib.cosh(beta))
    return Trirectangle(phi, beta, alpha)

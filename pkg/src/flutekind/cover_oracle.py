"""Explicit development of a patchwork lift in the upper half-plane.

This module is the independent check on the closed forms.  The default
``pentagons`` development glues right-angled pentagons one pair of pants at a
time: the common perpendicular between consecutive cuff lifts is measured on an
explicitly constructed pentagon, and the offset along each cuff is chosen so the
two pentagons meeting there overlap, which is where the twist enters.  Neither
step uses the shear or u' closed forms.

Chart: g_1 runs from 0 to infinity, 0 is the first wedge vertex and the second
wedge vertex (the far end of g_3) sits at 1.  Gaps are angles after the Cayley
transform.  This normalization is a convention; only shears are intrinsic.

Every geodesic g_k carries a local chart (an isometry putting g_k at 0 -> inf).
The chain stores the maps between consecutive charts, so measurements only
compose one or two neighbouring maps and stay accurate at double precision
even after the global endpoints have collapsed together.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import mpmath

from .flute_model import FluteSurface, eta_length
from .hyp_core import (
    BoundaryPoint,
    DomainError,
    Geodesic,
    Isometry,
    geodesic_distance,
    on_right,
    shear_of_quad,
    standardizing_map,
)
from .patchwork import Patchwork, ResourceLimitError, RestrictedPatchwork, reduce_to_patchwork, u_generalized

LADDER = (53, 113, 256)
DEVELOP_CAP = 5000


class OracleError(ValueError):
    pass


class PrecisionExhausted(ArithmeticError):
    def __init__(self, message: str, index: int, precision: int):
        super().__init__(message)
        self.index = index
        self.precision = precision


# ---------------------------------------------------------------------------
# Explicit pentagon and trirectangle constructions
# ---------------------------------------------------------------------------


def pentagon_eta(ell_a, ell_b, precision: int = 128):
    """Common perpendicular of two cuffs, measured on an explicit pentagon.

    The pentagon has its ideal vertex at infinity, the half of cuff ``a`` on the
    unit circle starting at ``i`` and the half of cuff ``b`` on a circle centred
    on the real axis under the second vertical side.  The returned value is the
    hyperbolic distance between the two full cuff geodesics.
    """
    if not (ell_a > 0 and ell_b > 0):
        raise DomainError("cuff lengths must be positive")
    # the cuff circles come within e^{-l} of each other; carry enough bits to see it
    with mpmath.workprec(precision + int(1.5 * (float(ell_a) + float(ell_b))) + 20):
        da = mpmath.mpf(ell_a) / 2
        db = mpmath.mpf(ell_b) / 2
        c = mpmath.coth(da) + mpmath.cosh(db) / mpmath.sinh(da)
        rho = mpmath.sinh(db) / mpmath.sinh(da)
        d = geodesic_distance(Geodesic(mpmath.mpf(-1), mpmath.mpf(1)), Geodesic(c - rho, c + rho))
        return +d


def pentagon_half_cuff(ell_a, ell_b, precision: int = 128):
    """Arclength on cuff ``b`` from its top to the foot of the perpendicular.

    Equals ``ell_b / 2`` when the construction closes up; used as a sanity check.
    """
    with mpmath.workprec(precision):
        da = mpmath.mpf(ell_a) / 2
        db = mpmath.mpf(ell_b) / 2
        c = mpmath.coth(da) + mpmath.cosh(db) / mpmath.sinh(da)
        rho = mpmath.sinh(db) / mpmath.sinh(da)
        x0, r = mpmath.coth(da), mpmath.csch(da)
        dd = c - x0
        xa = (dd ** 2 + r ** 2 - rho ** 2) / (2 * dd)
        p = mpmath.mpc(x0 + xa, mpmath.sqrt(r ** 2 - xa ** 2))
        top = mpmath.mpc(c, rho)
        return mpmath.acosh(1 + abs(p - top) ** 2 / (2 * p.imag * top.imag))


def _hdist(z, w):
    return mpmath.acosh(1 + abs(z - w) ** 2 / (2 * z.imag * w.imag))


def explicit_trirectangle(a, b, precision: int = 128):
    """Measure (phi, beta, alpha) on a trirectangle drawn with legs a, b.

    The right angle sits at ``i``; leg ``a`` runs up the imaginary axis and leg
    ``b`` along the unit circle.  ``beta`` is the side starting at the end of
    ``a``, ``alpha`` the side starting at the end of ``b``.  Returns ``None``
    when the perpendiculars at the leg ends do not meet.
    """
    with mpmath.workprec(precision):
        a = mpmath.mpf(a)
        b = mpmath.mpf(b)
        A = mpmath.mpc(0, mpmath.exp(a))
        B = mpmath.mpc(mpmath.tanh(b), mpmath.sech(b))
        r1 = mpmath.exp(a)
        x0, r2 = mpmath.coth(b), mpmath.csch(b)
        xa = (x0 ** 2 + r1 ** 2 - r2 ** 2) / (2 * x0)
        h2 = r1 ** 2 - xa ** 2
        if h2 <= 0:
            return None
        F = mpmath.mpc(xa, mpmath.sqrt(h2))
        n1 = F / r1
        n2 = (F - x0) / r2
        phi = mpmath.acos(abs(mpmath.re(mpmath.conj(n1) * n2)))
        return phi, _hdist(A, F), _hdist(B, F)


# ---------------------------------------------------------------------------
# Cuff offsets from pentagon overlap
# ---------------------------------------------------------------------------

# Along a cuff lift (arclength in units of the cuff length, forward = the lift's
# orientation) the pentagon of the left pair of pants touches the cuff on
#   [0, 1/2] * X            when it is the pentagon that carries eta, or
#   -[1/2, 1] * X           when the ray crossed the seam on this cuff (w = 1),
# relative to Q, the foot of the previous perpendicular.  The right pentagon is
# placed the same way relative to R = Q + (t + k) and the offset k is the one
# integer giving the two a common segment of positive length.


def _segment(sign: int, ray: bool, side: str) -> Tuple[float, float]:
    if side == "left":
        lo, hi = (-1.0, -0.5) if ray else (0.0, 0.5)
    else:
        lo, hi = (-1.0, -0.5) if ray else (0.0, 0.5)
    a, b = sign * lo, sign * hi
    return (min(a, b), max(a, b))


def overlap_offset(t: float, left_sign: int, left_ray: bool, right_sign: int, right_ray: bool) -> int:
    """Integer k placing the right pentagon at Q + (t + k) with positive overlap."""
    l0, l1 = _segment(left_sign, left_ray, "left")
    r0, r1 = _segment(right_sign, right_ray, "right")
    found = []
    for k in range(-3, 4):
        lo = max(l0, r0 + t + k)
        hi = min(l1, r1 + t + k)
        if hi - lo > 1e-12:
            found.append(k)
    if not found and t == 0.5:
        # the twist interval is closed at 1/2: use the placement of t -> 1/2 from below
        return overlap_offset(0.5 - 1e-9, left_sign, left_ray, right_sign, right_ray)
    if len(found) != 1:
        raise OracleError(f"pentagons meet at most in a point along the cuff (t={t}); "
                          "the patchwork is not realisable at this twist")
    return found[0]


def cuff_sides(p: Patchwork, m: int) -> Tuple[int, bool, int, bool]:
    """(left sign, left ray, right sign, right ray) on cuff alpha_m.

    Left is the exit pentagon of P_m, right the entry pentagon of P_{m+1}.
    A seam crossing (w = 1) requires the ray to switch pentagons inside the
    pair of pants; a crossing on the same pentagon is not realisable.
    """
    n = len(p.v_prime)
    x = p.vp(2 * m)
    w_out = p.wk(2 * m)
    if w_out and p.vp(2 * m - 1) == x:
        raise OracleError(f"w_{2 * m} = 1 but P_{m} is entered and left through the same pentagon")
    e = p.vp(2 * m + 1)
    w_in = p.wk(2 * m + 1)
    if w_in and 2 * m + 2 <= n and p.vp(2 * m + 2) == e:
        raise OracleError(f"w_{2 * m + 1} = 1 but P_{m + 1} is entered and left through the same pentagon")
    return x, bool(w_out), e, bool(w_in)


def geometric_u(p: Union[Patchwork, RestrictedPatchwork], surface: FluteSurface, depth: int) -> List[float]:
    """u_1 .. u_depth read off the pentagon placement (t_m + k_m)."""
    if isinstance(p, RestrictedPatchwork):
        p = reduce_to_patchwork(p)
    if len(p) < 2 * depth + 1:
        raise OracleError(f"patchwork too short for depth {depth}")
    _, t = surface.arrays(depth)
    out = []
    for m in range(1, depth + 1):
        ls, lr, rs, rr = cuff_sides(p, m)
        try:
            k = overlap_offset(float(t[m - 1]), ls, lr, rs, rr)
        except OracleError as exc:
            raise OracleError(f"cuff alpha_{m}: {exc}") from None
        out.append(float(t[m - 1]) + k)
    return out


# ---------------------------------------------------------------------------
# Lift chains
# ---------------------------------------------------------------------------


def _mp_iso(a, b, c, d) -> Isometry:
    return Isometry(mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(c), mpmath.mpf(d))


def _translate(dist) -> Isometry:
    h = mpmath.exp(dist / 2)
    return Isometry(h, mpmath.mpf(0), mpmath.mpf(0), 1 / h)


def _rotate(theta) -> Isometry:
    c, s = mpmath.cos(theta / 2), mpmath.sin(theta / 2)
    return Isometry(c, s, -s, c)


def _cross(eta) -> Isometry:
    # turn right, move eta, turn left: _rotate(-pi/2) @ _translate(eta) @ _rotate(pi/2),
    # multiplied out so that tiny eta survives at any precision
    c, s = mpmath.cosh(eta / 2), mpmath.sinh(eta / 2)
    return Isometry(c, s, s, c)


def _chart_to_endpoints(chart_inv: Isometry) -> Geodesic:
    return chart_inv.apply_geodesic(Geodesic(mpmath.mpf(0), BoundaryPoint(None)))


@dataclass
class LiftChain:
    """Geodesics g_1, g_2, ... of a developed patchwork.

    ``development_maps[k-1]`` maps chart coordinates of g_k to those of g_{k+1}.
    Global geodesics are composed at ``precision`` bits; ``exhausted_at`` is the
    first geodesic index whose endpoints could not be told apart, if any.  Past
    that index only the local maps are kept.
    """

    geodesics: List[Geodesic]
    ideal_vertices: List[BoundaryPoint]
    development_maps: List[Isometry]
    precision: int
    method: str
    u: List[float] = field(default_factory=list)
    eta: List[float] = field(default_factory=list)
    exhausted_at: Optional[int] = None

    def __len__(self):
        """Number of developed geodesics; with ``exhausted_at`` set only the
        first ``exhausted_at - 1`` of them have resolved global endpoints."""
        return len(self.development_maps) + 1

    def transformed(self, m: Isometry) -> "LiftChain":
        """The same chain after a global isometry (local maps are unchanged)."""
        with mpmath.workprec(self.precision):
            geos = [m.apply_geodesic(g) for g in self.geodesics]
            verts = [m.apply_boundary(v) for v in self.ideal_vertices]
        return LiftChain(geos, verts, self.development_maps, self.precision, self.method,
                         self.u, self.eta, self.exhausted_at)


def _check_exhaustion(gap, precision):
    return gap <= mpmath.ldexp(1, 10 - precision)


def develop_lift(
    surface: FluteSurface,
    p: Union[Patchwork, RestrictedPatchwork],
    N: int,
    precision: Union[int, str] = 53,
    method: str = "pentagons",
    on_exhaustion: str = "raise",
) -> LiftChain:
    """Develop g_1 .. g_{2N+1} (cuff lifts alpha_1 .. alpha_{N+1}).

    ``precision="auto"`` climbs 53, 113, 256 bits until the chain is resolved.
    ``on_exhaustion`` is ``"raise"``, ``"truncate"`` (stop before the failing
    cuff) or ``"keep"`` (keep the full local development and record the index).
    """
    if precision == "auto":
        last = None
        for bits in LADDER:
            try:
                return develop_lift(surface, p, N, bits, method, "raise")
            except PrecisionExhausted as exc:
                last = exc
        if on_exhaustion == "raise":
            raise last
        return develop_lift(surface, p, N, LADDER[-1], method, on_exhaustion)
    if not isinstance(precision, int) or precision < 53:
        raise ValueError("precision must be at least 53 bits")
    if N < 1 or N > DEVELOP_CAP:
        raise ValueError(f"N must be in 1..{DEVELOP_CAP}")
    if on_exhaustion not in ("raise", "truncate", "keep"):
        raise ValueError(f"unknown exhaustion policy {on_exhaustion!r}")
    if isinstance(p, RestrictedPatchwork):
        p = reduce_to_patchwork(p)
    if len(p) < 2 * N + 1:
        raise OracleError(f"patchwork has {len(p)} entries, need {2 * N + 1}")
    ell, t = surface.arrays(N + 1)
    with mpmath.workprec(precision + 20):
        if method == "pentagons":
            u = geometric_u(p, surface, N)
            eta = [pentagon_eta(float(ell[m]), float(ell[m + 1]), precision + 40) for m in range(N)]
        elif method == "shears":
            u = [u_generalized(p.vp(2 * m - 1), p.wk(2 * m - 1), p.vp(2 * m), p.wk(2 * m),
                               p.vp(2 * m + 1), p.wk(2 * m + 1), float(t[m - 1])) for m in range(1, N + 1)]
            eta = [eta_length(mpmath.mpf(float(ell[m])), mpmath.mpf(float(ell[m + 1]))) for m in range(N)]
        else:
            raise ValueError(f"unknown development method {method!r}")
    with mpmath.workprec(precision):
        if method == "pentagons":
            rel = _pentagon_maps(ell, u, eta, N)
        else:
            rel = _shear_maps(_closed_shears(ell, u, eta, N))
        return _assemble(rel, precision, method, u, [float(e) for e in eta], on_exhaustion)


def _pentagon_maps(ell, u, eta, N):
    # frame steps on odd geodesics: move u*l along the cuff, turn right, cross eta, turn left
    rel = []
    first = None
    for m in range(N):
        step = _translate(mpmath.mpf(u[m]) * mpmath.mpf(float(ell[m]))) @ _cross(mpmath.mpf(eta[m]))
        if first is None:
            first = step
        e = step.apply_boundary(BoundaryPoint(None)).value  # end of the next cuff lift, in this chart
        # chart of the even geodesic (start of this cuff, end of the next): z -> z / (e - z)
        s_even = Isometry(mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(-1), e)
        rel.append(s_even)
        rel.append(step.inverse() @ s_even.inverse())
    # normalization: the far end of g_3 goes to 1
    b2 = first.apply_boundary(BoundaryPoint(None)).value
    h = mpmath.sqrt(b2)
    base = Isometry(h, mpmath.mpf(0), mpmath.mpf(0), 1 / h)
    return base, rel


def _closed_shears(ell, u, eta, N):
    s = [mpmath.mpf(0)]
    for n in range(1, N + 1):
        s.append(2 * mpmath.log(mpmath.sinh(eta[n - 1] / 2)))
        if n < N:
            s.append(mpmath.asinh(1 / mpmath.sinh(eta[n - 1])) + mpmath.asinh(1 / mpmath.sinh(eta[n]))
                     + mpmath.mpf(u[n]) * mpmath.mpf(float(ell[n])))
    return s


def develop_from_shears(shears: Sequence, precision: int = 53) -> LiftChain:
    """Chain with prescribed shears s_1, s_2, ... (s_k across g_k)."""
    with mpmath.workprec(precision):
        s = [mpmath.mpf(x) for x in shears]
        return _assemble(_shear_maps(s), precision, "shears", [], [], "keep")


def _shear_maps(s):
    # in the chart of g_k the previous far vertex is at -1 and the new vertex at e^{s_k}
    rel = []
    for k, sk in enumerate(s, start=1):
        q = mpmath.exp(sk)
        if k % 2 == 0:
            # g_{k+1} = (q -> inf), previous start 0 goes to -1
            rel.append(Isometry(mpmath.mpf(1), -q, mpmath.mpf(0), q))
        else:
            # g_{k+1} = (0 -> q), old end inf goes to -1
            rel.append(Isometry(mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(-1), q))
    return Isometry(*(mpmath.mpf(x) for x in (1, 0, 0, 1))), rel


def _assemble(base_rel, precision, method, u, eta, on_exhaustion) -> LiftChain:
    base, rel = base_rel
    inv = base.inverse()  # chart coordinates of g_1 -> global
    geos = [_chart_to_endpoints(inv)]
    verts: List[BoundaryPoint] = []
    exhausted = None
    for k, r in enumerate(rel, start=1):
        try:
            inv = inv @ r.inverse()
            g = _chart_to_endpoints(inv)
        except DomainError:
            g = None
        shared = None if g is None else _shared(geos[-1], g)
        if shared is None or (k % 2 == 0 and _check_exhaustion(_gap_of(geos[0], g), precision)):
            exhausted = k + 1
            if on_exhaustion == "raise":
                raise PrecisionExhausted(
                    f"endpoints of g_{exhausted} are indistinguishable at {precision} bits", exhausted, precision)
            break
        geos.append(g)
        verts.append(shared)
    maps = list(rel) if on_exhaustion == "keep" else list(rel[: len(geos) - 1])
    return LiftChain(geos, verts, maps, precision, method, list(u), list(eta), exhausted)


def _close(x: BoundaryPoint, y: BoundaryPoint, tol) -> bool:
    if x.is_infinite or y.is_infinite:
        return x.is_infinite and y.is_infinite
    return abs(x.value - y.value) <= tol * max(1, abs(x.value), abs(y.value))


def _shared(g: Geodesic, h: Geodesic) -> Optional[BoundaryPoint]:
    tol = mpmath.ldexp(1, 8 - mpmath.mp.prec)
    for x in (g.start, g.end):
        for y in (h.start, h.end):
            if _close(x, y, tol):
                return x
    return None


def _angle(x: BoundaryPoint):
    return mpmath.pi / 2 if x.is_infinite else mpmath.atan(x.value)


def _gap_of(g1: Geodesic, g: Geodesic):
    # angle gap between the endpoints of an odd geodesic in the normalized chart
    return 2 * (_angle(g.end) - _angle(g.start))


# ---------------------------------------------------------------------------
# Measurements
# ---------------------------------------------------------------------------


def _unit_geodesic() -> Geodesic:
    return Geodesic(mpmath.mpf(0), BoundaryPoint(None))


def _quad_in_chart(chain: LiftChain, n: int):
    """(g_{n-1}, g_{n+1}) expressed in the chart of g_n."""
    prev_map = chain.development_maps[n - 2]  # chart n-1 -> chart n
    next_map = chain.development_maps[n - 1]  # chart n -> chart n+1
    g_prev = prev_map.apply_geodesic(_unit_geodesic())
    g_next = next_map.inverse().apply_geodesic(_unit_geodesic())
    return g_prev, g_next


def _nearness(x: BoundaryPoint):
    # chordal closeness to {0, inf}; 0 exactly at the endpoints of the chart geodesic
    if x.is_infinite:
        return mpmath.mpf(0)
    v = abs(x.value)
    return min(v, 1 / v) if v != 0 else mpmath.mpf(0)


def _far(g: Geodesic) -> BoundaryPoint:
    """Endpoint of a neighbour of 0 -> inf that is not shared with it."""
    a, b = _nearness(g.start), _nearness(g.end)
    # the chart divides rounding error by the local gap, so allow half the bits
    if min(a, b) > mpmath.ldexp(1, -(mpmath.mp.prec // 2)):
        raise OracleError("neighbouring geodesics do not share a vertex")
    return g.end if a < b else g.start


def measure_shear(chain: LiftChain, n: int):
    """Shear across g_n from the ideal quadrilateral formed with g_{n-1}, g_{n+1}."""
    if not (2 <= n < len(chain.development_maps) + 1):
        raise IndexError(f"shear index {n} outside 2..{len(chain.development_maps)}")
    with mpmath.workprec(chain.precision):
        diag = _unit_geodesic()
        g_prev, g_next = _quad_in_chart(chain, n)
        a = _far(g_prev)
        b = _far(g_next)
        q, t = (a, b) if on_right(a, diag) else (b, a)
        if not on_right(q, diag) or on_right(t, diag):
            raise OracleError(f"quadrilateral around g_{n} is not embedded")
        return shear_of_quad(diag.start, q, diag.end, t)


def measure_shear_global(chain: LiftChain, n: int):
    """Same shear read from the global endpoints of g_{n-1}, g_n, g_{n+1}.

    Only valid before ``exhausted_at``; used to check Mobius invariance and the
    local route against each other.
    """
    if not (2 <= n < len(chain.geodesics)):
        raise IndexError(f"shear index {n} outside 2..{len(chain.geodesics) - 1}")
    with mpmath.workprec(chain.precision):
        g_prev, diag, g_next = chain.geodesics[n - 2], chain.geodesics[n - 1], chain.geodesics[n]
        to_chart = standardizing_map(diag)
        diag = _unit_geodesic()
        a = _far(to_chart.apply_geodesic(g_prev))
        b = _far(to_chart.apply_geodesic(g_next))
        q, t = (a, b) if on_right(a, diag) else (b, a)
        if not on_right(q, diag) or on_right(t, diag):
            raise OracleError(f"quadrilateral around g_{n} is not embedded")
        return shear_of_quad(diag.start, q, diag.end, t)


def measure_eta(chain: LiftChain, n: int):
    """Distance between g_{2n-1} and g_{2n+1}, measured in the chart of g_{2n-1}."""
    k = 2 * n - 1
    if not (1 <= n and k + 1 <= len(chain.development_maps)):
        raise IndexError(f"eta index {n} out of range")
    with mpmath.workprec(chain.precision):
        m = chain.development_maps[k] @ chain.development_maps[k - 1]
        g = m.inverse().apply_geodesic(_unit_geodesic())
        return geodesic_distance(_unit_geodesic(), g)


@dataclass(frozen=True)
class AccumulationEstimate:
    left_limit_track: Tuple[BoundaryPoint, ...]
    right_limit_track: Tuple[BoundaryPoint, ...]
    gap: Tuple[float, ...]
    precision: int
    reliable_until: Optional[int] = None

    @property
    def final_gap(self) -> float:
        return self.gap[-1]


def accumulation_gap(chain: LiftChain) -> AccumulationEstimate:
    """Starts and ends of the cuff lifts g_1, g_3, ... and the angle between them.

    Starts increase and ends decrease along the boundary, so the gap is
    non-increasing; it tends to 0 exactly when the lift closes up on one point.
    """
    if len(chain) < 3:
        raise OracleError("accumulation needs at least three geodesics")
    with mpmath.workprec(chain.precision):
        left, right, gaps = [], [], []
        for g in chain.geodesics[0::2]:
            left.append(g.start)
            right.append(g.end)
            gaps.append(float(_gap_of(chain.geodesics[0], g)))
    return AccumulationEstimate(tuple(left), tuple(right), tuple(gaps), chain.precision, chain.exhausted_at)


# ---------------------------------------------------------------------------
# Configurations of a ray through two consecutive pairs of pants
# ---------------------------------------------------------------------------

PANTS_TYPES = ("none", "ray_prev", "ray_next")


@dataclass(frozen=True)
class Configuration:
    """Exit sign of P, same/opposite entry sign of the next P, and both pants types."""

    exit_sign: int
    same: bool
    first: str
    second: str

    @property
    def excluded(self) -> bool:
        return self.first == "ray_next" and self.second == "ray_prev"

    def label(self) -> str:
        return f"{'+' if self.exit_sign > 0 else '-'}{'=' if self.same else '!'}{self.first}/{self.second}"


def all_configurations() -> List[Configuration]:
    out = []
    for x, same, a, b in itertools.product((1, -1), (True, False), PANTS_TYPES, PANTS_TYPES):
        if a == "none" and b == "none":
            continue
        out.append(Configuration(x, same, a, b))
    return out


def admissible_configurations() -> List[Configuration]:
    return [c for c in all_configurations() if not c.excluded]


def _pants_entries(entry: int, kind: str) -> Tuple[int, int, int, int]:
    """(v'_enter, w_enter, v'_exit, w_exit) of one pair of pants."""
    if kind == "none":
        return entry, 0, entry, 0
    if kind == "ray_prev":
        return entry, 1, -entry, 0
    return entry, 0, -entry, 1


def _step(state: Tuple[int, str], same: bool, kind: str) -> Tuple[int, str]:
    x, _ = state
    entry = x if same else -x
    return _pants_entries(entry, kind)[2], kind


def _moves(state):
    x, first = state
    for same in (True, False):
        for kind in PANTS_TYPES:
            if first == "ray_next" and kind == "ray_prev":
                continue
            cfg = None if first == "none" and kind == "none" else Configuration(x, same, first, kind)
            yield cfg, same, kind


def configuration_walk(configs: Sequence[Configuration], length: int, first_entry: int = 1) -> Patchwork:
    """A patchwork of ``length`` pairs of pants realising every configuration in ``configs``.

    Greedy walk on the six states (exit sign, type of the current pair of
    pants): take an unused requested configuration if one leaves the current
    state, otherwise follow a shortest path to a state that has one.  Once all
    are placed the walk continues with type "none" pants.
    """
    pending = {c for c in configs if not c.excluded}
    state = (first_entry, "none")
    plan: List[Tuple[bool, str]] = []
    while len(plan) < length - 1:
        pick = next(((sm, k) for c, sm, k in _moves(state) if c in pending), None)
        if pick is None and pending:
            # breadth-first search towards a state with a pending configuration
            prev = {state: None}
            queue = [state]
            goal = None
            while queue and goal is None:
                nxt = []
                for st in queue:
                    for c, sm, k in _moves(st):
                        to = _step(st, sm, k)
                        if to in prev:
                            continue
                        prev[to] = (st, sm, k)
                        if any(cc in pending for cc, _, _ in _moves(to)):
                            goal = to
                            break
                        nxt.append(to)
                    if goal is not None:
                        break
                queue = nxt
            if goal is None:
                raise OracleError("requested configurations are not reachable")
            path = []
            while prev[goal] is not None:
                st, sm, k = prev[goal]
                path.append((sm, k))
                goal = st
            pick = path[-1]
        if pick is None:
            pick = (True, "none")
        cfg = next(c for c, sm, k in _moves(state) if (sm, k) == pick)
        pending.discard(cfg)
        plan.append(pick)
        state = _step(state, *pick)
    if pending:
        raise ResourceLimitError(f"{len(pending)} configurations do not fit in {length} pairs of pants")
    vp: List[int] = []
    w: List[int] = []
    entry, kind = first_entry, "none"
    for same, nk in plan + [(True, "none")]:
        e, we, x, wx = _pants_entries(entry, kind)
        vp += [e, x]
        w += [we, wx]
        entry, kind = (x if same else -x), nk
    vp.append(entry)
    w.append(1 if kind == "ray_prev" else 0)
    return Patchwork(tuple(vp), tuple(w))


def configurations_of(p: Patchwork, depth: int) -> List[Tuple[int, Configuration]]:
    """The configuration realised on each cuff alpha_m, 1 <= m <= depth."""
    out = []
    for m in range(1, depth + 1):
        if 2 * m + 2 > len(p):
            break
        x = p.vp(2 * m)
        first = "ray_prev" if p.wk(2 * m - 1) else "ray_next" if p.wk(2 * m) else "none"
        second = "ray_prev" if p.wk(2 * m + 1) else "ray_next" if p.wk(2 * m + 2) else "none"
        if first == "none" and second == "none":
            continue
        out.append((m, Configuration(x, p.vp(2 * m + 1) == x, first, second)))
    return out


def has_perpendicular_crossing(p: Patchwork, m: int) -> bool:
    """P_m switches pentagon without crossing a seam (through the perpendicular)."""
    return p.vp(2 * m - 1) != p.vp(2 * m) and p.wk(2 * m - 1) == 0 and p.wk(2 * m) == 0


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

SVG_DEFAULTS = {
    "size": 512,
    "margin": 8,
    "stroke": "#1f4e79",
    "stroke_width": 1.0,
    "boundary_stroke": "#000000",
    "vertex_color": "#c0392b",
    "horocycle_color": "#27ae60",
    "overlay": False,
    "overlay_samples": 16,
}


def _cayley(x: BoundaryPoint) -> complex:
    if x.is_infinite:
        return complex(1.0, 0.0)
    v = x.value
    w = (mpmath.mpc(v, -1)) / (mpmath.mpc(v, 1))
    return complex(float(w.real), float(w.imag))


def _cayley_interior(z) -> complex:
    w = (z - 1j) / (z + 1j)
    return complex(float(mpmath.re(w)), float(mpmath.im(w)))


def _fmt(x: float) -> str:
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def _arc_path(w1: complex, w2: complex, to_screen) -> str:
    x1, y1 = to_screen(w1)
    x2, y2 = to_screen(w2)
    cross = (w1.conjugate() * w2).imag
    dot = (w1.conjugate() * w2).real
    if abs(cross) < 1e-9:
        return f"M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}"
    delta = math.atan2(abs(cross), dot)
    radius = math.tan(delta / 2)
    rpx = radius * to_screen.scale
    # the orthogonal arc bends towards the centre of the disk
    sweep = 1 if cross > 0 else 0
    return f"M {_fmt(x1)} {_fmt(y1)} A {_fmt(rpx)} {_fmt(rpx)} 0 0 {sweep} {_fmt(x2)} {_fmt(y2)}"


def horocyclic_path_points(chain: LiftChain, samples: int = 16) -> List[complex]:
    """Interior points of the piecewise horocyclic path, starting at i on g_1."""
    pts = []
    with mpmath.workprec(chain.precision):
        z = mpmath.mpc(0, 1)
        geos = chain.geodesics
        for k in range(len(geos) - 1):
            v = chain.ideal_vertices[k]
            other = geos[k + 1].end if _close(geos[k + 1].start, v, mpmath.ldexp(1, 8 - chain.precision)) else geos[k + 1].start
            # send v to infinity
            if v.is_infinite:
                m = Isometry(mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(1))
            else:
                m = Isometry(mpmath.mpf(0), mpmath.mpf(-1), mpmath.mpf(1), -v.value)
            zz = m.apply_interior(z)
            target = m.apply_boundary(other)
            if target.is_infinite:
                break
            y = mpmath.im(zz)
            x0, x1 = mpmath.re(zz), target.value
            minv = m.inverse()
            for j in range(samples + 1):
                xx = x0 + (x1 - x0) * j / samples
                pts.append(_cayley_interior(minv.apply_interior(mpmath.mpc(xx, y))))
            z = minv.apply_interior(mpmath.mpc(x1, y))
    return pts


def render_disk_svg(chain: LiftChain, path, style: Optional[dict] = None) -> None:
    """Write the chain in the Poincare disk as SVG 1.1."""
    if len(chain) == 0:
        raise OracleError("nothing to render")
    opts = dict(SVG_DEFAULTS)
    for k, v in (style or {}).items():
        if k not in SVG_DEFAULTS:
            raise ValueError(f"unknown style option {k!r}")
        opts[k] = v
    size = float(opts["size"])
    c = size / 2
    scale = c - float(opts["margin"])

    def to_screen(w: complex):
        return c + scale * w.real, c - scale * w.imag

    to_screen.scale = scale
    lines = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{int(size)}" height="{int(size)}" '
        f'viewBox="0 0 {int(size)} {int(size)}">',
        f'<circle class="boundary" cx="{_fmt(c)}" cy="{_fmt(c)}" r="{_fmt(scale)}" fill="none" '
        f'stroke="{opts["boundary_stroke"]}" stroke-width="1"/>',
    ]
    with mpmath.workprec(chain.precision):
        for g in chain.geodesics:
            d = _arc_path(_cayley(g.start), _cayley(g.end), to_screen)
            lines.append(f'<path class="geodesic" d="{d}" fill="none" stroke="{opts["stroke"]}" '
                         f'stroke-width="{opts["stroke_width"]}"/>')
        for v in chain.ideal_vertices:
            x, y = to_screen(_cayley(v))
            xi, yi = to_screen(_cayley(v) * 0.97)
            lines.append(f'<line class="vertex" x1="{_fmt(x)}" y1="{_fmt(y)}" x2="{_fmt(xi)}" y2="{_fmt(yi)}" '
                         f'stroke="{opts["vertex_color"]}" stroke-width="2"/>')
        if opts["overlay"]:
            pts = horocyclic_path_points(chain, int(opts["overlay_samples"]))
            coords = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in (to_screen(p) for p in pts))
            lines.append(f'<polyline class="horocycle" points="{coords}" fill="none" '
                         f'stroke="{opts["horocycle_color"]}" stroke-width="1"/>')
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

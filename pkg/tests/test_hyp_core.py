import math

import mpmath
import pytest

from flutekind.hyp_core import (
    INFINITY,
    BoundaryPoint,
    DomainError,
    Geodesic,
    Isometry,
    cross_ratio,
    foot_of_perpendicular,
    geodesic_distance,
    is_ccw,
    on_right,
    position_on,
    shear_by_feet,
    shear_of_quad,
    standardizing_map,
    trirectangle_relations,
)


def test_boundary_point_infinity_forms():
    assert BoundaryPoint(math.inf).is_infinite
    assert BoundaryPoint(mpmath.inf).is_infinite
    with pytest.raises(DomainError):
        BoundaryPoint(math.nan)


def test_geodesic_needs_distinct_endpoints():
    with pytest.raises(DomainError):
        Geodesic(1.0, 1.0)


def test_ccw_and_right_side():
    assert is_ccw(0.0, 1.0, INFINITY)
    assert not is_ccw(1.0, 0.0, INFINITY)
    assert on_right(2.0, Geodesic(0.0, INFINITY))
    assert not on_right(-2.0, Geodesic(0.0, INFINITY))


def test_isometry_canonical_and_inverse():
    m = Isometry(2.0, 1.0, 3.0, 5.0)
    assert abs(m.det() - 1) < 1e-15
    assert Isometry(-2.0, -1.0, -3.0, -5.0) == m
    z = 0.3 + 0.7j
    w = (m.inverse() @ m).apply_interior(z)
    assert abs(w - z) < 1e-14
    with pytest.raises(DomainError):
        Isometry(1.0, 0.0, 0.0, -1.0)


def test_standardizing_map_sends_endpoints():
    for g in (Geodesic(2.0, -1.0), Geodesic(INFINITY, 3.0), Geodesic(-4.0, INFINITY)):
        m = standardizing_map(g)
        assert abs(m.apply_boundary(g.start).value) < 1e-15
        assert m.apply_boundary(g.end).is_infinite


def test_cross_ratio_limits_at_infinity():
    assert cross_ratio(INFINITY, 1.0, 0.0, 2.0) == pytest.approx((1 - 2) / (1 - 0))
    with pytest.raises(DomainError):
        cross_ratio(0.0, 0.0, 1.0, 2.0)


def test_symmetric_quad_has_zero_shear():
    assert shear_of_quad(0.0, 1.0, INFINITY, -1.0) == 0.0


def test_shear_matches_feet_route():
    p, q, r, t = -1.3, 0.4, 2.0, 7.5
    assert abs(shear_of_quad(p, q, r, t) - shear_by_feet(p, q, r, t)) < 1e-13
    assert abs(shear_of_quad(p, q, r, t) - shear_of_quad(r, t, p, q)) < 1e-13


def test_shear_invariant_under_isometry():
    m = Isometry(1.0, 2.0, -1.0, 3.0)
    pts = (-1.3, 0.4, 2.0, 7.5)
    moved = [m.apply_boundary(x) for x in pts]
    assert abs(shear_of_quad(*pts) - shear_of_quad(*moved)) < 1e-12


def test_foot_lies_on_geodesic_and_position_is_log():
    g = Geodesic(0.0, INFINITY)
    z = foot_of_perpendicular(3.0, g)
    assert abs(z - 3j) < 1e-15
    assert position_on(g, z) == pytest.approx(math.log(3.0))


def test_geodesic_distance_known_value_and_symmetry():
    # concentric semicircles: the common perpendicular runs from i to 4i
    g, h = Geodesic(-1.0, 1.0), Geodesic(-4.0, 4.0)
    assert geodesic_distance(g, h) == pytest.approx(math.log(4.0), abs=1e-14)
    assert geodesic_distance(g, h) == geodesic_distance(h, g)
    with pytest.raises(DomainError):
        geodesic_distance(Geodesic(-1.0, 1.0), Geodesic(0.0, 2.0))
    with pytest.raises(DomainError):
        geodesic_distance(Geodesic(-1.0, 1.0), Geodesic(1.0, 2.0))


def test_geodesic_distance_mpmath():
    with mpmath.workprec(200):
        d = geodesic_distance(Geodesic(mpmath.mpf(-1), mpmath.mpf(1)), Geodesic(mpmath.mpf(-4), mpmath.mpf(4)))
        assert abs(d - mpmath.log(4)) < mpmath.mpf(10) ** -55


def test_trirectangle_relations():
    tr = trirectangle_relations(0.3, 0.5)
    assert math.cos(tr.phi) == pytest.approx(math.sinh(0.3) * math.sinh(0.5))
    assert math.cosh(0.3) == pytest.approx(math.tanh(tr.beta) / math.tanh(0.5))
    assert math.sinh(tr.alpha) == pytest.approx(math.sinh(0.3) * math.cosh(tr.beta))
    assert trirectangle_relations(2.0, 2.0).phi is None
    a = math.asinh(1.0)
    ideal = trirectangle_relations(a, a)
    assert ideal.phi == pytest.approx(0.0, abs=1e-7) and ideal.beta is None

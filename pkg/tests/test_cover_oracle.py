import random
from pathlib import Path

import mpmath
import pytest

from conftest import family
from flutekind import cover_oracle as co
from flutekind.criterion import shear_sequence
from flutekind.flute_model import FluteSurface, SequenceSpec as Q, eta_length
from flutekind.hyp_core import Isometry, trirectangle_relations
from flutekind.patchwork import RestrictedPatchwork, u_prime_sequence, u_sequence

GOLDEN = Path(__file__).parent / "golden"


def _random_surface(rng, n, lo=0.5, hi=8.0):
    L = [rng.uniform(lo, hi) for _ in range(n)]
    T = [rng.uniform(-0.49, 0.5) for _ in range(n)]
    return FluteSurface(Q.periodic(L), Q.periodic(T))


def test_zero_shear_fan_measures_zero():
    ch = co.develop_from_shears([0] * 20, 53)
    assert len(ch) == 21
    assert max(abs(float(co.measure_shear(ch, k))) for k in range(2, 21)) < 1e-12


def test_pentagon_eta_and_half_cuff():
    with mpmath.workprec(200):
        a, b = mpmath.mpf(3), mpmath.mpf(5)
        assert abs(co.pentagon_eta(3, 5, 200) - eta_length(a, b)) < mpmath.mpf(10) ** -50
        assert abs(co.pentagon_half_cuff(3, 5, 200) - b / 2) < mpmath.mpf(10) ** -50


def test_explicit_trirectangle_matches_relations():
    got = co.explicit_trirectangle(0.3, 0.5)
    want = trirectangle_relations(0.3, 0.5)
    for x, y in zip(got, (want.phi, want.beta, want.alpha)):
        assert float(x) == pytest.approx(float(y), rel=1e-12)


def test_cross_step_is_rotated_translation():
    e = mpmath.mpf("0.37")
    with mpmath.workprec(100):
        a = co._rotate(-mpmath.pi / 2) @ co._translate(e) @ co._rotate(mpmath.pi / 2)
        b = co._cross(e)
        assert max(abs(x - y) for x, y in zip((a.a, a.b, a.c, a.d), (b.a, b.b, b.c, b.d))) < 1e-25


def test_geometric_u_matches_combinatorial_u():
    rng = random.Random(1)
    s = _random_surface(rng, 42)
    p = co.configuration_walk(co.admissible_configurations(), 40)
    gu = co.geometric_u(p, s, 39)
    u = u_prime_sequence(p, s, 40)
    assert max(abs(a - b) for a, b in zip(gu, u.u)) < 1e-12


def test_developed_shears_match_closed_form():
    rng = random.Random(2)
    s = _random_surface(rng, 42)
    p = co.configuration_walk(co.admissible_configurations(), 40)
    ch = co.develop_lift(s, p, 39, 53, "pentagons", "keep")
    sh = shear_sequence(s, u_prime_sequence(p, s, 40), 39)
    err = max(abs(float(co.measure_shear(ch, k)) - sh[k]) / max(1, abs(sh[k])) for k in range(2, 79))
    assert err < 1e-8


def test_pentagon_and_shear_methods_agree():
    s = FluteSurface(Q.linear(1, 2), Q.constant(0.5))
    v = RestrictedPatchwork.default(s, 22)
    a = co.develop_lift(s, v, 20, 113, "pentagons")
    b = co.develop_lift(s, v, 20, 113, "shears")
    assert max(abs(float(co.measure_shear(a, k) - co.measure_shear(b, k))) for k in range(2, 41)) < 1e-25


def test_precision_stable_and_mobius_invariant():
    rng = random.Random(3)
    s = _random_surface(rng, 110, 4, 16)
    v = RestrictedPatchwork.default(s, 102)
    a = co.develop_lift(s, v, 100, "auto")
    b = co.develop_lift(s, v, 100, 2 * a.precision)
    diff = max(abs(float(x.value - y.value))
               for g, h in zip(a.geodesics, b.geodesics)
               for x, y in ((g.start, h.start), (g.end, h.end)) if not x.is_infinite)
    assert diff < 1e-30
    m = Isometry(mpmath.mpf(2), mpmath.mpf(1), mpmath.mpf(3), mpmath.mpf(5))
    c = a.transformed(m)
    assert max(abs(float(co.measure_shear_global(a, k) - co.measure_shear_global(c, k))) for k in range(2, 60)) < 1e-30
    assert max(abs(float(co.measure_shear_global(a, k) - co.measure_shear(a, k))) for k in range(2, 200)) < 1e-20


def test_exhaustion_policies_and_ladder():
    s = FluteSurface(Q.constant(1.0), Q.constant(0.0))
    v = RestrictedPatchwork.default(s, 202)
    with pytest.raises(co.PrecisionExhausted) as info:
        co.develop_lift(s, v, 200, 53)
    idx = info.value.index
    t = co.develop_lift(s, v, 200, 53, on_exhaustion="truncate")
    k = co.develop_lift(s, v, 200, 53, on_exhaustion="keep")
    assert t.exhausted_at == k.exhausted_at == idx
    assert len(t) < len(k) == 401
    a = co.develop_lift(s, v, 200, "auto", on_exhaustion="keep")
    assert a.precision == co.LADDER[-1]
    with pytest.raises(ValueError):
        co.develop_lift(s, v, 10, 53, on_exhaustion="ignore")
    with pytest.raises(ValueError):
        co.develop_lift(s, v, 10, 32)


def test_eta_anchor_and_range():
    x = 2 * float(mpmath.asinh(1))
    s = FluteSurface(Q.constant(x))
    ch = co.develop_lift(s, RestrictedPatchwork.default(s, 3), 1, 53)
    assert abs(float(co.measure_eta(ch, 1)) - x) < 1e-12
    rng = random.Random(4)
    for _ in range(50):
        la, lb = rng.uniform(1, 20), rng.uniform(1, 20)
        s = FluteSurface(Q.constant(1.0, prefix=(la, lb)))
        ch = co.develop_lift(s, RestrictedPatchwork.default(s, 3), 1, 53)
        assert abs(float(co.measure_eta(ch, 1)) - eta_length(la, lb)) < 1e-9


def test_gap_monotone_and_frozen_floor():
    s = family("4log_t0")
    ch = co.develop_lift(s, RestrictedPatchwork.default(s, 202), 200, 256)
    gap = co.accumulation_gap(ch).gap
    assert all(x >= y for x, y in zip(gap, gap[1:]))
    assert gap[-1] == pytest.approx(0.31712085462957507, rel=1e-12)


def test_configuration_walk_covers_admissible():
    assert len(co.all_configurations()) == 32
    adm = co.admissible_configurations()
    assert len(adm) == 28 and not any(c.excluded for c in adm)
    p = co.configuration_walk(adm, 40)
    seen = {c for _, c in co.configurations_of(p, 39)}
    assert seen == set(adm)


def test_touching_pentagons_rejected_at_zero_twist():
    s = FluteSurface(Q.constant(2.0), Q.constant(0.0))
    p = co.configuration_walk(co.admissible_configurations(), 40)
    with pytest.raises(co.OracleError, match="point"):
        co.geometric_u(p, s, 39)


def test_svg_structure(tmp_path):
    ch = co.develop_from_shears([0, 0], 53)
    out = tmp_path / "c.svg"
    co.render_disk_svg(ch, out)
    text = out.read_text()
    assert text.count('class="geodesic"') == 3
    assert text.count('class="boundary"') == 1
    assert "polyline" not in text
    co.render_disk_svg(ch, out, {"overlay": True})
    assert 'class="horocycle"' in out.read_text()
    with pytest.raises(ValueError):
        co.render_disk_svg(ch, out, {"colour": "red"})


def test_fan_svg_golden(tmp_path):
    out = tmp_path / "fan.svg"
    co.render_disk_svg(co.develop_from_shears([0] * 20, 53), out)
    assert out.read_text() == (GOLDEN / "fan_depth10.svg").read_text()

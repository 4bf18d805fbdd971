import itertools

import numpy as np
import pytest

from flutekind.flute_model import FluteSurface, SequenceSpec
from flutekind.patchwork import (
    RULE_HALF,
    RULE_ZERO,
    Patchwork,
    PatchworkError,
    ResourceLimitError,
    RestrictedPatchwork,
    enumerate_patchworks,
    minimizing_patchwork_search,
    partial_log_sum,
    reduce_to_patchwork,
    u_generalized,
    u_prime_sequence,
    u_restricted,
    u_sequence,
    validate_restricted,
)


def surf(lengths=5.0, twists=0.0):
    return FluteSurface(SequenceSpec.from_dict(lengths), SequenceSpec.from_dict(twists))


def test_restricted_indexing_and_flip():
    v = RestrictedPatchwork((1, -1, -1))
    assert v[1] == 1 and v[3] == -1
    assert v.flipped().v == (-1, 1, 1)
    with pytest.raises(PatchworkError):
        RestrictedPatchwork((1, 0))


def test_default_follows_rules():
    s = surf(twists={"tail": "periodic", "cycle": [0.0, 0.5, 0.25]})
    v = RestrictedPatchwork.default(s, 12)
    assert validate_restricted(v, s, 11).ok


def test_violation_reports_rule_and_index():
    rep = validate_restricted(RestrictedPatchwork((1, 1, -1, -1)), surf(twists=0.0), 3)
    assert not rep.ok and rep.index == 2 and rep.rule == RULE_ZERO
    assert str(rep.message).startswith("violation at n=2")
    rep = validate_restricted(RestrictedPatchwork((1, 1, 1)), surf(twists=0.5), 2)
    assert rep.rule == RULE_HALF
    with pytest.raises(PatchworkError):
        rep.raise_if_failed()


def test_u_restricted_branches():
    assert u_restricted(1, 1, 0.3) == 0.3
    assert u_restricted(1, -1, 0.3) == 0.3
    assert u_restricted(-1, 1, 0.3) == pytest.approx(-0.7)
    assert u_restricted(1, -1, 0.5) == 0.5
    assert u_restricted(-1, 1, 0.5) == -0.5


def test_u_sequence_half_twist_alternates():
    s = surf(twists=0.5)
    u = u_sequence(RestrictedPatchwork.default(s, 6), s, 5)
    assert set(abs(x) for x in u.u) == {0.5}
    assert all(a == -b for a, b in zip(u.u, u.u[1:]))


def test_generalized_admissibility():
    with pytest.raises(PatchworkError):
        Patchwork((1,) * 5, (0, 0, 1, 1, 0))
    p = Patchwork((1,) * 5, (0, 1, 1, 0, 0))
    assert p.admissible_violation() == 1
    with pytest.raises(PatchworkError):
        u_prime_sequence(p, surf(), 2)


def test_reduction_identity_small():
    s = surf(twists={"tail": "periodic", "cycle": [0.3, -0.2, 0.5, 0.0]})
    v = RestrictedPatchwork.default(s, 9)
    assert u_prime_sequence(reduce_to_patchwork(v), s, 8).u == u_sequence(v, s, 8).u


def test_u_generalized_branches():
    # same pentagon on both sides of the cuff: shift by the seam crossings
    assert u_generalized(1, 0, 1, 1, 1, 0, 0.1) == pytest.approx(1.1)
    assert u_generalized(-1, 1, 1, 0, 1, 1, 0.1) == pytest.approx(1.1)
    assert u_generalized(1, 0, 1, 0, 1, 0, 0.1) == 0.1
    # pentagon switch: keep t when the signs agree, otherwise move by a full turn
    assert u_generalized(1, 0, -1, 1, 1, 0, 0.25) == 0.25
    assert u_generalized(1, 0, 1, 0, -1, 0, 0.25) == 0.25
    assert u_generalized(1, 0, 1, 0, -1, 0, -0.25) == pytest.approx(0.75)


@pytest.mark.parametrize("twist,depth,count", [(0.0, 5, 2), (0.5, 5, 2), (0.25, 4, 16)])
def test_restricted_enumeration_counts(twist, depth, count):
    items = list(enumerate_patchworks(surf(twists=twist), depth))
    assert len(items) == count and len(set(items)) == count


def _brute_generalized(depth):
    n = 2 * depth + 1
    out = 0
    for vp in itertools.product((1, -1), repeat=n):
        for w in itertools.product((0, 1), repeat=n):
            try:
                p = Patchwork(vp, w)
            except PatchworkError:
                continue
            if p.admissible:
                out += 1
    return out


@pytest.mark.parametrize("depth", [1, 2])
def test_generalized_enumeration_matches_brute_force(depth):
    items = list(enumerate_patchworks(surf(), depth, "generalized"))
    assert len(items) == len(set(items)) == _brute_generalized(depth)


def test_enumeration_caps():
    with pytest.raises(ResourceLimitError):
        enumerate_patchworks(surf(), 21)
    with pytest.raises(ResourceLimitError):
        enumerate_patchworks(surf(), 7, "generalized")
    with pytest.raises(ResourceLimitError):
        minimizing_patchwork_search(surf(), 11, "exhaustive")


def test_exhaustive_search_matches_brute_force():
    s = surf({"tail": "linear", "a": 1, "b": 2}, 0.3)
    depth = 3
    best = min(partial_log_sum(s, u_prime_sequence(p, s, depth), depth)
               for p in enumerate_patchworks(s, depth, "generalized"))
    res = minimizing_patchwork_search(s, depth, "exhaustive")
    assert res.exact and res.log_partial_sum == pytest.approx(best, abs=1e-12)
    assert partial_log_sum(s, u_prime_sequence(res.patchwork, s, depth), depth) == pytest.approx(best, abs=1e-12)


def test_beam_never_beats_exhaustive():
    s = surf({"tail": "logarithmic", "c": 4, "d": 1}, 0.25)
    ex = minimizing_patchwork_search(s, 8, "exhaustive")
    bm = minimizing_patchwork_search(s, 8, "beam", beam_width=16)
    assert bm.log_partial_sum >= ex.log_partial_sum - 1e-12
    assert not bm.exact and bm.beam_width == 16

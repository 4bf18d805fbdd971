"""Acceptance criteria, one test each.  Every test records a PASS/FAIL line
that is printed in the terminal summary."""
import json
import math
import random
import subprocess
import sys

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, FAMILIES, family
from flutekind import cover_oracle as co
from flutekind.criterion import (
    FIRST_KIND,
    NOT_FIRST_KIND,
    PARABOLIC,
    beta_sequence,
    classify,
    criterion_terms,
    horocyclic_partial_length,
    horocyclic_running_logs,
    shear_sequence,
)
from flutekind.flute_model import FluteSurface, SequenceSpec as Q, eta_comparability, eta_length
from flutekind.patchwork import RestrictedPatchwork, reduce_to_patchwork, u_prime_sequence, u_sequence

# tolerances and thresholds of the contract
SHEAR_TOL = 1e-8
ETA_TOL = 1e-9
ANCHOR_TOL = 1e-12
COMPARABILITY = (1.9, 2.1)
GROWTH_BAND = 0.20
BETA_FLOOR = -1e-12
IDENTITY_TOL = 1e-12
FORM_FACTOR = 2.0
HORO_DIVERGENT = 1e6
GAP_DIVERGENT = 1e-12

# sandwich bounds frozen from the first run (N = 10 .. 500), rounded outward
SANDWICH = {
    "4log_t0": ((Q.logarithmic(4, 1), Q.constant(0.0)), 1.85, 1.98),
    "lin_half": ((Q.linear(1, 1), Q.constant(0.5)), 1.72, 1.77),
    "3log_half": ((Q.logarithmic(3, 1), Q.constant(0.5)), 1.75, 2.11),
    "pow_t0": ((Q.power(1, 0.5), Q.constant(0.0)), 30.6, 153.4),
    "4log_periodic": ((Q.logarithmic(4, 1), Q.periodic([0.0, 0.5])), 1.17, 1.40),
    "3log_t0": ((Q.logarithmic(3, 1), Q.constant(0.0)), 1.65, 1.77),
}


def record(number, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_1_shear_round_trip():
    rng = random.Random(2024)
    adm = co.admissible_configurations()
    p = co.configuration_walk(adm, 51)
    depth = 50
    covered = {c for _, c in co.configurations_of(p, depth)}
    worst = 0.0
    for _ in range(200):
        L = [rng.uniform(4, 16) for _ in range(depth + 2)]
        T = [0.5 - rng.uniform(0, 1) for _ in range(depth + 2)]
        T = [t if t > -0.5 else 0.5 for t in T]
        s = FluteSurface(Q.periodic(L), Q.periodic(T))
        closed = shear_sequence(s, u_prime_sequence(p, s, depth + 1), depth)
        chain = co.develop_lift(s, p, depth, 53, "pentagons", "keep")
        for k in range(2, 2 * depth + 1):
            worst = max(worst, abs(float(co.measure_shear(chain, k)) - closed[k]))
    ok = worst < SHEAR_TOL and covered == set(adm)
    record(1, ok, f"worst |s_closed - s_measured| = {worst:.2e} over 200 surfaces, "
                  f"{len(covered)}/{len(adm)} configurations")


def test_criterion_2_eta_formula():
    rng = random.Random(7)
    worst = 0.0
    for _ in range(300):
        la, lb = rng.uniform(1, 20), rng.uniform(1, 20)
        s = FluteSurface(Q.constant(1.0, prefix=(la, lb)))
        chain = co.develop_lift(s, RestrictedPatchwork.default(s, 3), 1, 53)
        worst = max(worst, abs(float(co.measure_eta(chain, 1)) - eta_length(la, lb)))
    x = 2 * math.asinh(1)
    s = FluteSurface(Q.constant(x))
    chain = co.develop_lift(s, RestrictedPatchwork.default(s, 3), 1, 53)
    anchor = max(abs(float(co.measure_eta(chain, 1)) - x), abs(eta_length(x, x) - x))
    record(2, worst < ETA_TOL and anchor < ANCHOR_TOL, f"worst eta residual {worst:.2e}, anchor {anchor:.2e}")


def test_criterion_3_comparability():
    lo, hi, checked = math.inf, -math.inf, 0
    surfaces = [family(n) for n in FAMILIES] + [
        FluteSurface(Q.linear(12, 0.5)), FluteSurface(Q.logarithmic(4, 20)), FluteSurface(Q.periodic([12.0, 30.0]))]
    for s in surfaces:
        for n in range(1, 2001):
            if min(s.length(n), s.length(n + 1)) >= 12:
                r = eta_comparability(s, n)
                lo, hi, checked = min(lo, r), max(hi, r), checked + 1
    ok = checked > 0 and COMPARABILITY[0] <= lo and hi <= COMPARABILITY[1]
    record(3, ok, f"ratio range [{lo:.6f}, {hi:.6f}] over {checked} indices")


def test_criterion_4_sandwich():
    N = 500
    out, ok = [], True
    for name, ((L, T), c, C) in SANDWICH.items():
        s = FluteSurface(L, T)
        v = RestrictedPatchwork.default(s, N + 2)
        u = u_sequence(v, s, N + 1)
        h = horocyclic_running_logs(shear_sequence(s, u, N), N)
        ratio = np.exp(h[9:] - criterion_terms(s, u, N).partial_sums[9:N])
        inside = c <= ratio.min() and ratio.max() <= C
        ok &= inside
        out.append(f"{name} [{ratio.min():.4g}, {ratio.max():.4g}] in [{c}, {C}]" + ("" if inside else " ESCAPED"))
    record(4, ok, "; ".join(out))


def test_criterion_5_known_classifications():
    s = family("2log_t0")
    rep = classify(s, 200)
    two = rep.verdict == "DIVERGENT_CONFIRMED" and rep.classification == (FIRST_KIND, PARABOLIC)
    N = 10000
    v = RestrictedPatchwork.default(s, N + 2)
    P = np.exp(criterion_terms(s, u_sequence(v, s, N), N).partial_sums)
    n = np.arange(100, N + 1)
    logn = np.log(n)
    Pn = P[n - 1]
    c = float(np.dot(Pn, logn) / np.dot(logn, logn))
    dev = float(np.max(np.abs(Pn / (c * logn) - 1)))
    four = classify(family("4log_t0"), 200)
    four_ok = four.verdict == "CONVERGENT_CONFIRMED" and four.first_kind == NOT_FIRST_KIND
    bounded = ["const1_t0", "const3_quarter", "const6_half", "periodic_lengths"]
    par = {b: classify(family(b), 200).parabolic for b in bounded}
    ok = two and dev <= GROWTH_BAND and four_ok and all(p == PARABOLIC for p in par.values())
    record(5, ok, f"2log {rep.verdict}/{rep.first_kind}/{rep.parabolic}, P(N) ~ {c:.3f} log N "
                  f"(max deviation {dev:.1%}); 4log {four.verdict}; bounded {sorted(set(par.values()))}")


def test_criterion_6_symmetric_identities():
    names = ["const1_t0", "const6_half", "periodic_lengths", "2log_t0", "3log_half", "4log_t0", "lin_half", "pow_t0"]
    N = 300
    same, min_beta, resid, factor = True, math.inf, 0.0, 0.0
    for name in names:
        s = family(name)
        v = RestrictedPatchwork.default(s, N + 2)
        w = v.flipped()
        a = criterion_terms(s, u_sequence(v, s, N), N)
        b = criterion_terms(s, u_sequence(w, s, N), N)
        same &= a.terms.tobytes() == b.terms.tobytes()
        ell, _ = s.arrays(N + 1)
        if np.all(np.diff(ell) >= 0):
            for p in (v, w):
                u = u_sequence(p, s, N + 1)
                beta = beta_sequence(p, u, s, N)
                min_beta = min(min_beta, beta.min_beta)
                resid = max(resid, beta.closed_form_residual)
                e = criterion_terms(s, u, N, form="signed_exp", v=p)
                c = criterion_terms(s, u, N)
                factor = max(factor, float(np.max(np.abs(c.partial_sums - e.partial_sums))))
    factor = math.exp(factor)
    ok = same and min_beta >= BETA_FLOOR and resid <= IDENTITY_TOL and factor <= FORM_FACTOR
    record(6, ok, f"byte-identical {same}, min beta {min_beta:.2e}, identity residual {resid:.1e}, "
                  f"cosh/signed-exp factor {factor:.4f}")


def test_criterion_7_reduction_identity():
    rng = random.Random(11)
    choices = [0.0, 0.5, -0.25, 0.25, 0.1, -0.4, 0.45]
    bad = 0
    for _ in range(10_000):
        n = rng.randint(2, 15)
        L = [rng.uniform(0.1, 20) for _ in range(n + 1)]
        T = [rng.choice(choices) if rng.random() < 0.7 else 0.5 - rng.random() * 0.999 for _ in range(n + 1)]
        s = FluteSurface(Q.periodic(L), Q.periodic(T))
        v = RestrictedPatchwork.default(s, n + 1, rng.choice([1, -1]))
        if u_prime_sequence(reduce_to_patchwork(v), s, n).u != u_sequence(v, s, n).u:
            bad += 1
    record(7, bad == 0, f"{bad} mismatches in 10000 cases")


def test_criterion_8_three_way_agreement():
    N = 500
    out, ok = [], True
    for name in FAMILIES:
        s = family(name)
        v = RestrictedPatchwork.default(s, N + 2)
        u = u_sequence(v, s, N + 1)
        log_h = float(horocyclic_partial_length(shear_sequence(s, u, N, precision=256), N).log)
        chain = co.develop_lift(s, v, N, 256, "pentagons", "truncate")
        gap = 0.0 if chain.exhausted_at is not None else co.accumulation_gap(chain).final_gap
        rep = classify(s, 200)
        legs = (log_h > math.log(HORO_DIVERGENT), gap < GAP_DIVERGENT, rep.first_kind == FIRST_KIND)
        agree = len(set(legs)) == 1
        ok &= agree
        out.append(f"{name} H:{'div' if legs[0] else 'conv'}(log {log_h:.2f}) "
                   f"gap:{'div' if legs[1] else 'conv'}({gap:.2e}) crit:{'div' if legs[2] else 'conv'}"
                   + ("" if agree else " DISAGREE"))
    record(8, ok, "; ".join(out))


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "flutekind.cli", *args], capture_output=True, text=True)


def test_criterion_9_determinism_and_exit_codes(tmp_path):
    cases = {
        "two.toml": ('[surface]\nlengths = { tail = "logarithmic", c = 2, d = 1 }\ntwists = 0\n', 0),
        "four.toml": ('[surface]\nlengths = { tail = "logarithmic", c = 4, d = 1 }\ntwists = 0\n', 1),
        "quarter.toml": ('depth = 60\n[surface]\nlengths = { tail = "logarithmic", c = 4, d = 1 }\n'
                         'twists = 0.25\n', 2),
        "bad.toml": ('[surface]\nlengths = 5\ntwists = 0.7\n', 3),
    }
    codes, identical = {}, True
    for name, (text, _) in cases.items():
        path = tmp_path / name
        path.write_text(text)
        a, b = _cli("classify", str(path), "--no-timestamp"), _cli("classify", str(path), "--no-timestamp")
        codes[name] = a.returncode
        identical &= a.stdout == b.stdout and a.returncode == b.returncode
    small = tmp_path / "small.toml"
    small.write_text("[surface]\nlengths = 5\n")
    codes["enumerate depth 30"] = _cli("enumerate", str(small), "--depth", "30").returncode
    codes["oracle 53 bits depth 200"] = _cli("oracle-check", str(small), "--precision", "53", "--depth", "200").returncode
    codes["missing file"] = _cli("classify", str(tmp_path / "none.toml")).returncode
    want = {n: c for n, (_, c) in cases.items()}
    want.update({"enumerate depth 30": 4, "oracle 53 bits depth 200": 5, "missing file": 6})
    ok = identical and codes == want
    record(9, ok, f"byte-identical {identical}, exit codes {json.dumps(codes, sort_keys=True)}")

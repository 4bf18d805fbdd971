"""Shears, horocyclic path length, criterion series and the classification pipeline.

The first shear s_1 is not determined by the surface; it is fixed to 0.  That
rescales both horocyclic sums by constant factors and never changes whether
they diverge.

All series arithmetic is in log space.  ``cosh(S_n)`` is evaluated as
``|S_n| + log1p(exp(-2|S_n|)) - log 2`` so flipping every sign of a patchwork
gives bit-identical terms.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from .flute_model import FluteSurface, log_asinh_csch, log_eta_length
from .logspace import LogValue, log_cosh, log_sum_exp
from .patchwork import (
    Patchwork,
    RestrictedPatchwork,
    USequence,
    minimizing_patchwork_search,
    u_prime_sequence,
    u_restricted_array,
    u_sequence,
)

VERDICTS = (
    "DIVERGENT_CONFIRMED",
    "CONVERGENT_CONFIRMED",
    "HEURISTIC_DIVERGENT",
    "HEURISTIC_CONVERGENT",
    "INCONCLUSIVE",
)
FIRST_KIND = "FIRST_KIND"
NOT_FIRST_KIND = "NOT_FIRST_KIND"
PARABOLIC = "PARABOLIC"
NOT_PARABOLIC = "NOT_PARABOLIC"
UNDETERMINED = "UNDETERMINED"


class CriterionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Shears
# ---------------------------------------------------------------------------


def shear_even(eta):
    """``2 log sinh(eta / 2)``."""
    if not eta > 0:
        raise CriterionError("eta must be positive")
    if isinstance(eta, mpmath.mpf):
        return 2 * mpmath.log(mpmath.sinh(eta / 2))
    return float(_even_from_log_eta(np.array([math.log(eta)]))[0])


def _odd_piece(eta):
    if isinstance(eta, mpmath.mpf):
        return mpmath.asinh(1 / mpmath.sinh(eta))
    return float(_odd_piece_from_log_eta(np.array([math.log(eta)]))[0])


def shear_odd(eta_n, eta_next, u_next, ell_next):
    """``asinh(1/sinh eta_n) + asinh(1/sinh eta_next) + u_next * ell_next``."""
    if not (eta_n > 0 and eta_next > 0):
        raise CriterionError("eta must be positive")
    return _odd_piece(eta_n) + _odd_piece(eta_next) + u_next * ell_next


_SMALL = math.log(1e-3)


def _even_from_log_eta(log_eta: np.ndarray) -> np.ndarray:
    log_eta = np.asarray(log_eta, dtype=float)
    out = np.empty_like(log_eta)
    small = log_eta < _SMALL
    eta = np.exp(np.where(small, _SMALL, log_eta))
    out[~small] = 2.0 * np.log(np.sinh(eta[~small] / 2.0))
    ly = log_eta[small] - math.log(2.0)
    y = np.exp(ly)
    # log sinh y = log y + log(1 + y^2/6 + y^4/120)
    out[small] = 2.0 * (ly + np.log1p(y * y / 6.0 + y ** 4 / 120.0))
    return out


def _odd_piece_from_log_eta(log_eta: np.ndarray) -> np.ndarray:
    # asinh(1/sinh eta) = log coth(eta/2)
    log_eta = np.asarray(log_eta, dtype=float)
    out = np.empty_like(log_eta)
    small = log_eta < _SMALL
    eta = np.exp(np.where(small, _SMALL, log_eta))
    out[~small] = np.arcsinh(1.0 / np.sinh(eta[~small]))
    ly = log_eta[small] - math.log(2.0)
    y = np.exp(ly)
    # log tanh y = log y + log(1 - y^2/3 + 2 y^4/15)
    out[small] = -(ly + np.log1p(-y * y / 3.0 + 2.0 * y ** 4 / 15.0))
    return out


def log_eta_array(ell: np.ndarray) -> np.ndarray:
    """log eta_n for n = 1..len(ell)-1."""
    la = np.array([log_asinh_csch(x / 2.0) for x in ell])
    return np.logaddexp(la[:-1], la[1:])


@dataclass(frozen=True)
class ShearSequence:
    """Shears s_1 .. s_{2N+1}; ``s[k - 1]`` is s_k and ``s[0] = 0``."""

    s: np.ndarray
    cumulative: np.ndarray

    def __len__(self):
        return len(self.s)

    def __getitem__(self, k: int):
        if k < 1:
            raise IndexError(k)
        return self.s[k - 1]

    @property
    def extended(self) -> bool:
        return self.s.dtype == object


def shear_sequence(surface: FluteSurface, u: USequence, N: int, precision: Optional[int] = None) -> ShearSequence:
    """Closed-form shears through s_{2N+1}; needs u_2 .. u_{N+1}.

    With ``precision`` (bits) the shears are evaluated with mpmath and kept as
    ``mpf`` values for extended-precision cross-checks.
    """
    if len(u) < N + 1:
        raise CriterionError(f"u has {len(u)} entries, need {N + 1}")
    ell, _ = surface.arrays(N + 2)
    uu = u.array()
    if precision is not None:
        with mpmath.workprec(precision):
            L = [mpmath.mpf(float(x)) for x in ell]
            eta = [mpmath.asinh(mpmath.csch(L[i] / 2)) + mpmath.asinh(mpmath.csch(L[i + 1] / 2)) for i in range(N + 1)]
            s = [mpmath.mpf(0)]
            for n in range(1, N + 1):
                s.append(2 * mpmath.log(mpmath.sinh(eta[n - 1] / 2)))
                s.append(mpmath.asinh(1 / mpmath.sinh(eta[n - 1])) + mpmath.asinh(1 / mpmath.sinh(eta[n]))
                         + mpmath.mpf(float(uu[n])) * L[n])
            arr = np.empty(len(s), dtype=object)
            arr[:] = s
            cum = np.empty(len(s), dtype=object)
            acc = mpmath.mpf(0)
            for i, x in enumerate(s):
                acc += x
                cum[i] = acc
        return ShearSequence(arr, cum)
    le = log_eta_array(ell)  # eta_1 .. eta_{N+1}
    even = _even_from_log_eta(le[:N])
    odd = _odd_piece_from_log_eta(le)
    s = np.zeros(2 * N + 1)
    s[1::2] = even
    s[2::2] = odd[:N] + odd[1 : N + 1] + uu[1 : N + 1] * ell[1 : N + 1]
    return ShearSequence(s, np.cumsum(s))


def _horocyclic_logs(s: ShearSequence, N: int):
    if len(s) < 2 * N + 1:
        raise CriterionError(f"shears available through s_{len(s)}, need s_{2 * N + 1}")
    c = s.cumulative
    return c[1 : 2 * N : 2], c[2 : 2 * N + 1 : 2]


def horocyclic_partial_length(s: ShearSequence, N: int) -> LogValue:
    """sum_{n<=N} e^{s_1+..+s_{2n}} + sum_{n<=N} e^{-(s_1+..+s_{2n+1})} as (log, sign)."""
    ce, co = _horocyclic_logs(s, N)
    if s.extended:
        terms = [x for x in ce] + [-x for x in co]
        m = max(terms)
        total = m + mpmath.log(mpmath.fsum(mpmath.exp(x - m) for x in terms))
        return LogValue(float(total), 1)
    return LogValue(log_sum_exp(np.concatenate([ce, -co])), 1)


def horocyclic_running_logs(s: ShearSequence, N: int) -> np.ndarray:
    """log of the horocyclic partial length for every n = 1..N."""
    ce, co = _horocyclic_logs(s, N)
    ce = np.asarray(ce, dtype=float)
    co = np.asarray(co, dtype=float)
    return np.logaddexp.accumulate(np.logaddexp(ce, -co))


# ---------------------------------------------------------------------------
# Criterion terms
# ---------------------------------------------------------------------------


@dataclass
class CriterionReport:
    terms: np.ndarray
    partial_sums: np.ndarray
    form: str = "cosh"
    growth_fit: Dict[str, float] = field(default_factory=dict)
    verdict: str = "INCONCLUSIVE"
    first_kind: str = UNDETERMINED
    parabolic: str = UNDETERMINED
    justification: str = ""
    depth: int = 0
    patchwork: Optional[dict] = None
    registry: Optional[dict] = None
    heuristic: bool = False

    @property
    def classification(self) -> Tuple[str, str]:
        return (self.first_kind, self.parabolic)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "classification": {"first_kind": self.first_kind, "parabolic": self.parabolic},
            "justification": self.justification,
            "depth": self.depth,
            "form": self.form,
            "heuristic": self.heuristic,
            "growth_fit": {k: _jsonable(v) for k, v in sorted(self.growth_fit.items())},
            "registry": self.registry,
            "patchwork": self.patchwork,
            "log_terms": [_jsonable(x) for x in self.terms],
            "log_partial_sums": [_jsonable(x) for x in self.partial_sums],
        }


def _jsonable(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return repr(x)
        return x
    if isinstance(x, np.integer):
        return int(x)
    return x


def _non_decreasing(ell: np.ndarray) -> bool:
    return bool(np.all(np.diff(ell) >= 0))


def criterion_terms(
    surface: FluteSurface,
    u: USequence,
    N: int,
    form: str = "cosh",
    v: Optional[RestrictedPatchwork] = None,
) -> CriterionReport:
    """log term_n = log(e^{-l_{n+1}/2} + e^{-l_n/2}) + log cosh(S_n), S_n = sum_{k<=n} u_k l_k.

    ``form="signed_exp"`` replaces cosh(S_n) by exp(-v_{n+1} S_n); it is only
    offered for non-decreasing cuff lengths and needs the restricted patchwork.
    """
    if N < 1:
        raise CriterionError("N must be positive")
    if len(u) < N:
        raise CriterionError(f"u has {len(u)} entries, need {N}")
    ell, _ = surface.arrays(N + 1)
    s = np.cumsum(u.array()[:N] * ell[:N])
    base = np.logaddexp(-ell[1:] / 2.0, -ell[:-1] / 2.0)
    if form == "cosh":
        terms = base + log_cosh(s)
    elif form == "signed_exp":
        if v is None:
            raise CriterionError("signed_exp form needs the restricted patchwork v")
        if not _non_decreasing(ell):
            raise CriterionError(
                "signed_exp form refused: the sign identity behind it is only established "
                "for increasing cuff lengths, and these lengths decrease somewhere"
            )
        if len(v) < N + 1:
            raise CriterionError(f"patchwork has {len(v)} signs, need {N + 1}")
        vn1 = np.asarray(v.v[1 : N + 1], dtype=float)
        terms = base - vn1 * s
    else:
        raise CriterionError(f"unknown form {form!r}")
    partial = np.logaddexp.accumulate(terms)
    return CriterionReport(terms=terms, partial_sums=partial, form=form, depth=N)


# ---------------------------------------------------------------------------
# beta recursion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaSequence:
    beta: Tuple[float, ...]
    closed_form_residual: float
    min_beta: float

    def __getitem__(self, n: int) -> float:
        if n < 1:
            raise IndexError(n)
        return self.beta[n - 1]


def beta_sequence(v: RestrictedPatchwork, u: USequence, surface: FluteSurface, N: int) -> BetaSequence:
    """beta_1 = -v_2 u_1 l_1, beta_{n+1} = v_{n+1} v_{n+2} (beta_n - v_{n+1} l_{n+1} u_{n+1})."""
    ell, t = surface.arrays(N + 1)
    if not np.all((t == 0.0) | (t == 0.5)):
        k = int(np.argmax(~((t == 0.0) | (t == 0.5)))) + 1
        raise CriterionError(f"beta recursion needs twists in {{0, 1/2}}; t_{k} = {t[k - 1]}")
    if len(v) < N + 1 or len(u) < N:
        raise CriterionError("patchwork or u sequence too short")
    beta = [-v[2] * u[1] * ell[0]]
    for n in range(1, N):
        beta.append(v[n + 1] * v[n + 2] * (beta[-1] - v[n + 1] * ell[n] * u[n + 1]))
    s = np.cumsum(u.array()[:N] * ell[:N])
    closed = np.array([-v[n + 1] * s[n - 1] for n in range(1, N + 1)])
    b = np.asarray(beta, dtype=float)
    scale = np.maximum(1.0, np.cumsum(np.abs(u.array()[:N] * ell[:N])))
    resid = float(np.max(np.abs(b - closed) / scale))
    if resid > 1e-12:
        raise CriterionError(f"beta recursion disagrees with the closed form (relative {resid:.3g})")
    min_beta = float(np.min(b))
    if _non_decreasing(ell) and min_beta < -1e-12 * float(scale[-1]):
        raise CriterionError(f"beta_n negative ({min_beta}) for non-decreasing lengths")
    return BetaSequence(tuple(float(x) for x in b), resid, min_beta)


# ---------------------------------------------------------------------------
# Convergence registry and heuristics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Thresholds:
    divergent_slope: float = 0.1
    convergent_term_slope: float = -1.1
    registry_delta: float = 1e-3
    registry_far: int = 1 << 16

    def __post_init__(self):
        for name in ("divergent_slope", "registry_delta"):
            if not getattr(self, name) > 0:
                raise CriterionError(f"threshold {name} must be positive")
        if not self.convergent_term_slope < 0:
            raise CriterionError("convergent_term_slope must be negative")
        if self.registry_far < 64:
            raise CriterionError("registry_far must be at least 64")


@dataclass(frozen=True)
class RegistryResult:
    applies: bool
    verdict: Optional[str]
    scale: Optional[str]
    kappa: Tuple[float, ...] = ()
    reason: str = ""

    def to_dict(self):
        return {
            "applies": self.applies,
            "verdict": self.verdict,
            "scale": self.scale,
            "kappa": [float(k) for k in self.kappa],
            "reason": self.reason,
        }


def _phi(scale: str, n: np.ndarray, p: float = 1.0) -> np.ndarray:
    n = n.astype(float)
    if scale == "linear":
        return n
    if scale == "power":
        return n ** p
    return np.log(n)


def registry_test(
    surface: FluteSurface,
    u_of: "callable",
    period: int,
    th: Thresholds = Thresholds(),
) -> RegistryResult:
    """Closed-form comparison test for eventually periodic u and parametric lengths.

    ``u_of(n_max)`` returns u_1 .. u_{n_max}; ``period`` is the eventual period
    of u.  Along each residue class of n modulo ``period`` the log-terms are
    affine in a growth scale phi(n) (n, n^p or log n) up to vanishing
    corrections; the fitted slopes kappa decide the series by comparison with a
    geometric series (linear, power) or with a p-series (log).
    """
    lengths = surface.lengths
    scale = lengths.growth()
    if scale is None:
        return RegistryResult(False, None, None, reason="bounded lengths are handled separately")
    p = float(lengths.param.get("p", 1.0)) if scale == "power" else 1.0
    if scale in ("linear", "power") and lengths.param.get("a", lengths.param.get("c", 0)) < 0:
        return RegistryResult(False, None, scale, reason="lengths eventually negative")
    far = th.registry_far
    period = max(1, int(period))
    nmax = far + 2 * period + 2
    ell, _ = surface.arrays(nmax + 1)
    u = np.asarray(u_of(nmax), dtype=float)
    s = np.cumsum(u * ell[:nmax])
    E = np.logaddexp(-ell[1:] / 2.0, -ell[:-1] / 2.0) + log_cosh(s)
    idx = np.arange(1, nmax + 1)
    kap_lo, kap_hi, bound = [], [], []
    for r in range(period):
        n1 = _snap(far // 4, r, period)
        n2 = _snap(far // 2, r, period)
        n3 = _snap(far, r, period)
        pts = np.array([n1, n2, n3])
        ph = _phi(scale, pts, p)
        e = E[pts - 1]
        kap_lo.append((e[1] - e[0]) / (ph[1] - ph[0]))
        kap_hi.append((e[2] - e[1]) / (ph[2] - ph[1]))
        if scale == "log":
            bound.append((e[1] + math.log(n2), e[2] + math.log(n3)))
    kap_lo = np.array(kap_lo)
    kap_hi = np.array(kap_hi)
    kappa = tuple(float(k) for k in kap_hi)
    d = th.registry_delta
    if not np.all(np.isfinite(kap_hi)):
        return RegistryResult(False, None, scale, kappa, "non-finite log-terms")
    if scale in ("linear", "power"):
        if np.any((kap_lo > d) & (kap_hi > d)):
            return RegistryResult(True, "DIVERGENT_CONFIRMED", scale, kappa,
                                  "log-terms grow along a residue class; terms do not tend to 0")
        if np.all((kap_lo < -d) & (kap_hi < -d)):
            return RegistryResult(True, "CONVERGENT_CONFIRMED", scale, kappa,
                                  "terms bounded by C exp(kappa phi(n)) with kappa < 0 on every residue class")
        return RegistryResult(False, None, scale, kappa, "slope too close to the comparison boundary")
    # log scale: compare with sum n^kappa
    if np.any((kap_lo > -1 + d) & (kap_hi > -1 + d)):
        return RegistryResult(True, "DIVERGENT_CONFIRMED", scale, kappa,
                              "terms dominate n^kappa with kappa > -1 on a residue class")
    if np.all((kap_lo < -1 - d) & (kap_hi < -1 - d)):
        return RegistryResult(True, "CONVERGENT_CONFIRMED", scale, kappa,
                              "terms bounded by C n^kappa with kappa < -1 on every residue class")
    for (b2, b3), klo, khi in zip(bound, kap_lo, kap_hi):
        if abs(khi + 1) <= d and abs(klo + 1) <= d and abs(b3 - b2) <= 1e-3:
            return RegistryResult(True, "DIVERGENT_CONFIRMED", scale, kappa,
                                  "terms comparable to c/n on a residue class (harmonic comparison)")
    return RegistryResult(False, None, scale, kappa, "slope too close to the p-series boundary")


def _snap(n: int, r: int, period: int) -> int:
    # largest index <= n with index % period == r (indices start at 1)
    m = n - ((n - r) % period)
    return max(m, period + r if r else period)


def growth_fit(partial_logs: np.ndarray, term_logs: np.ndarray) -> Dict[str, float]:
    """Least-squares slopes over the last half of the window.

    ``slope`` is d log(partial sum) / d log N; ``term_slope`` is d log(term) / d log n.
    """
    N = len(partial_logs)
    lo = max(1, N // 2)
    n = np.arange(lo, N + 1, dtype=float)
    x = np.log(n)
    out = {"window_start": float(lo), "window_end": float(N)}
    if len(n) < 2:
        out.update(slope=float("nan"), term_slope=float("nan"))
        return out
    out["slope"] = float(np.polyfit(x, partial_logs[lo - 1 :], 1)[0])
    out["term_slope"] = float(np.polyfit(x, term_logs[lo - 1 :], 1)[0])
    return out


def heuristic_verdict(fit: Dict[str, float], th: Thresholds = Thresholds()) -> str:
    if fit.get("slope", float("nan")) > th.divergent_slope:
        return "HEURISTIC_DIVERGENT"
    if fit.get("term_slope", float("nan")) < th.convergent_term_slope:
        return "HEURISTIC_CONVERGENT"
    return "INCONCLUSIVE"


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassifyOptions:
    thresholds: Thresholds = Thresholds()
    search_strategy: str = "beam"
    beam_width: int = 64
    search_depth: Optional[int] = None  # None: search the full depth
    max_candidate_period: int = 8


def _periodic_twists(surface: FluteSurface) -> Optional[Tuple[float, ...]]:
    tw = surface.twists
    if tw.tail == "constant":
        return (tw.param["c"],)
    if tw.tail == "periodic":
        return tuple(tw.param["cycle"])
    return None


def _restricted_u_of(surface: FluteSurface, v_cycle: Sequence[int], v_prefix: Sequence[int] = ()):
    """u_of(n_max) for the patchwork v = prefix then cycle repeated (absolute indexing)."""
    k = len(v_cycle)
    cyc = np.asarray(v_cycle)
    pre = np.asarray(v_prefix, dtype=int)

    def u_of(nmax):
        idx = np.arange(1, nmax + 2)
        v = cyc[(idx - 1) % k]
        if len(pre):
            m = min(len(pre), len(v))
            v[:m] = pre[:m]
        _, t = surface.arrays(nmax)
        return u_restricted_array(v, t)

    return u_of


def _restricted_legal(surface: FluteSurface, v: np.ndarray, upto: int) -> bool:
    _, t = surface.arrays(upto)
    n = np.arange(2, upto + 1)
    tn = t[n - 1]
    vn, vnext = v[n - 1], v[n]
    bad = ((tn == 0.0) & (vnext != vn)) | ((tn == 0.5) & (vnext != -vn))
    return not bool(bad.any())


def _default_u(v: RestrictedPatchwork, t: np.ndarray, depth: int) -> USequence:
    u = u_restricted_array(np.asarray(v.v[: depth + 1]), t[:depth])
    return USequence(tuple(float(x) for x in u), "restricted")


def _report_for_u(surface, u, depth, th):
    rep = criterion_terms(surface, u, depth)
    rep.growth_fit = growth_fit(rep.partial_sums, rep.terms)
    return rep


def classify(surface: FluteSurface, depth: int = 200, options: ClassifyOptions = ClassifyOptions()) -> CriterionReport:
    th = options.thresholds
    if depth < 2:
        raise CriterionError("depth must be at least 2")
    ell, t = surface.arrays(depth + 1)

    # (1) bounded lengths
    if surface.lengths.is_bounded():
        v = RestrictedPatchwork.default(surface, depth + 1)
        rep = _report_for_u(surface, _default_u(v, t, depth), depth, th)
        rep.verdict = "DIVERGENT_CONFIRMED"
        rep.first_kind, rep.parabolic = FIRST_KIND, PARABOLIC
        rep.justification = (
            "cuff lengths are bounded: every criterion term is at least 2 exp(-L/2) for the bound L, "
            "so every patchwork series diverges; bounded-length flutes are parabolic whatever the twists"
        )
        rep.registry = RegistryResult(True, "DIVERGENT_CONFIRMED", "bounded", (), "bounded lengths").to_dict()
        rep.patchwork = {"kind": "restricted", "v": list(v.v[: depth + 1])}
        return rep

    cyc = _periodic_twists(surface)
    symmetric = surface.symmetric_twists(depth + 1)

    # (2) symmetric twists: one restricted patchwork decides
    if symmetric:
        v = RestrictedPatchwork.default(surface, depth + 1)
        u = u_sequence(v, surface, depth)
        rep = _report_for_u(surface, u, depth, th)
        rep.patchwork = {"kind": "restricted", "v": list(v.v)}
        reg = None
        if cyc is not None:
            k = len(cyc)
            full = RestrictedPatchwork.default(surface, th.registry_far + 4 * k + 8)
            vv = np.asarray(full.v)
            reg = registry_test(surface, lambda nmax: u_restricted_array(vv[: nmax + 1], surface.arrays(nmax)[1]),
                                2 * k, th)
            rep.registry = reg.to_dict()
        if reg is not None and reg.applies:
            rep.verdict = reg.verdict
            if reg.verdict == "DIVERGENT_CONFIRMED":
                rep.first_kind, rep.parabolic = FIRST_KIND, PARABOLIC
                rep.justification = ("twists in {0, 1/2}: the restricted-patchwork series diverges "
                                     f"({reg.reason}); divergence means first kind and parabolic")
            else:
                rep.first_kind, rep.parabolic = NOT_FIRST_KIND, NOT_PARABOLIC
                rep.justification = ("twists in {0, 1/2}: the restricted-patchwork series converges "
                                     f"({reg.reason}); the lift accumulates on two points")
            return rep
        rep.verdict = heuristic_verdict(rep.growth_fit, th)
        rep.heuristic = True
        rep.justification = _heuristic_text(rep, depth, reg)
        return rep

    # (3a) lower bound cosh >= 1 covers every patchwork at once
    lower = registry_test(surface, lambda nmax: np.zeros(nmax), 1, th)
    if lower.applies and lower.verdict == "DIVERGENT_CONFIRMED":
        v = RestrictedPatchwork.default(surface, depth + 1)
        rep = _report_for_u(surface, _default_u(v, t, depth), depth, th)
        rep.patchwork = {"kind": "restricted", "v": list(v.v)}
        rep.registry = lower.to_dict()
        rep.verdict = "DIVERGENT_CONFIRMED"
        rep.first_kind, rep.parabolic = FIRST_KIND, UNDETERMINED
        rep.justification = ("sum of exp(-l_n/2) diverges, and cosh >= 1, so the series diverges for every "
                             "patchwork; parabolicity is not decided by the criterion for general twists")
        return rep

    # (3b) periodic restricted patchworks with a registered convergence test
    if cyc is not None:
        best = _periodic_convergent_witness(surface, cyc, depth, options)
        if best is not None:
            v_cycle, reg = best
            u_of = _restricted_u_of(surface, v_cycle)
            u = USequence(tuple(float(x) for x in u_of(depth)), "restricted")
            rep = _report_for_u(surface, u, depth, th)
            rep.patchwork = {"kind": "restricted", "v_cycle": list(v_cycle)}
            rep.registry = reg.to_dict()
            rep.verdict = "CONVERGENT_CONFIRMED"
            rep.first_kind, rep.parabolic = NOT_FIRST_KIND, NOT_PARABOLIC
            rep.justification = ("a periodic restricted patchwork has a convergent series "
                                 f"({reg.reason}); one convergent patchwork means not of the first kind")
            return rep

    # (3c) heuristic search
    sd = depth if options.search_depth is None else min(depth, options.search_depth)
    res = minimizing_patchwork_search(surface, sd, options.search_strategy, options.beam_width)
    ext = _extend_patchwork(res.patchwork, depth)
    u = u_prime_sequence(ext, surface, depth)
    rep = _report_for_u(surface, u, depth, th)
    rep.patchwork = {
        "kind": "generalized",
        "v_prime": list(ext.v_prime),
        "w": list(ext.w),
        "search": {"strategy": res.strategy, "exact": res.exact, "depth": sd, "beam_width": res.beam_width},
    }
    rep.verdict = heuristic_verdict(rep.growth_fit, th)
    rep.heuristic = True
    rep.justification = _heuristic_text(rep, depth, None)
    return rep


def _extend_patchwork(p: Patchwork, depth: int) -> Patchwork:
    # continue a searched prefix greedily by keeping the last pentagon
    need = 2 * depth + 1
    vp, w = list(p.v_prime[:need]), list(p.w[:need])
    while len(vp) < need:
        vp.append(vp[-1])
        w.append(0)
    return Patchwork(tuple(vp), tuple(w))


def _heuristic_text(rep: CriterionReport, depth: int, reg: Optional[RegistryResult]) -> str:
    g = rep.growth_fit
    why = reg.reason if reg is not None else "no registered comparison test applies"
    return (f"{why}; heuristic from depth {depth}: partial-sum log-slope {g.get('slope', float('nan')):.4g}, "
            f"term log-slope {g.get('term_slope', float('nan')):.4g}")


def _periodic_convergent_witness(surface, cyc, depth, options):
    th = options.thresholds
    k = len(cyc)
    period = 2 * k
    if period > options.max_candidate_period:
        period = k
    if period > options.max_candidate_period:
        return None
    upto = min(depth + 1, 4 * period + 2)
    for pattern in itertools.product((1, -1), repeat=period):
        vv = np.asarray(pattern)[(np.arange(1, upto + 2) - 1) % period]
        if not _restricted_legal(surface, vv, upto - 1):
            continue
        reg = registry_test(surface, _restricted_u_of(surface, pattern), int(np.lcm(period, k)), th)
        if reg.applies and reg.verdict == "CONVERGENT_CONFIRMED":
            return tuple(pattern), reg
    return None


def classify_patchwork(
    surface: FluteSurface,
    patchwork: Union[RestrictedPatchwork, Patchwork],
    depth: int = 200,
    options: ClassifyOptions = ClassifyOptions(),
) -> CriterionReport:
    """Evaluate the series along one user-supplied patchwork.

    With twists in {0, 1/2} every legal restricted patchwork carries the same
    terms, so the full classification applies.  Otherwise a single patchwork
    decides nothing about the infimum and the verdict stays heuristic.
    """
    if depth < 2:
        raise CriterionError("depth must be at least 2")
    if isinstance(patchwork, RestrictedPatchwork):
        if len(patchwork) < depth + 1:
            raise CriterionError(f"patchwork has {len(patchwork)} signs, need {depth + 1}")
        u = u_sequence(patchwork, surface, depth)
        desc = {"kind": "restricted", "v": list(patchwork.v[: depth + 1])}
        if surface.symmetric_twists(depth + 1) and not surface.lengths.is_bounded():
            rep = classify(surface, depth, options)
            mine = criterion_terms(surface, u, depth)
            rep.terms, rep.partial_sums = mine.terms, mine.partial_sums
            rep.patchwork = desc
            return rep
    else:
        u = u_prime_sequence(patchwork, surface, depth)
        desc = {"kind": "generalized", "v_prime": list(patchwork.v_prime[: 2 * depth + 1]),
                "w": list(patchwork.w[: 2 * depth + 1])}
    if surface.lengths.is_bounded():
        rep = classify(surface, depth, options)
        mine = criterion_terms(surface, u, depth)
        rep.terms, rep.partial_sums = mine.terms, mine.partial_sums
        rep.patchwork = desc
        return rep
    rep = _report_for_u(surface, u, depth, options.thresholds)
    rep.patchwork = desc
    rep.verdict = heuristic_verdict(rep.growth_fit, options.thresholds)
    rep.heuristic = True
    rep.justification = _heuristic_text(rep, depth, None) + "; evaluated on the given patchwork only"
    return rep

"""Restricted and generalized patchworks and the sequences u_n, u'_n.

Indices are 1-based in every user-facing sequence: ``v[0]`` is v_1.  A
generalized patchwork of depth N carries ``v'_1 .. v'_{2N+1}`` and
``w_1 .. w_{2N+1}``, which is what u'_1 .. u'_N need.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .flute_model import FluteSurface
from .logspace import log_cosh

RESTRICTED_DEPTH_CAP = 20
GENERALIZED_DEPTH_CAP = 6
EXHAUSTIVE_DEPTH_CAP = 10

RULE_ZERO = "if t_n = 0 then v_{n+1} = v_n"
RULE_HALF = "if t_n = 1/2 then v_{n+1} = -v_n"


class PatchworkError(ValueError):
    def __init__(self, message: str, index: Optional[int] = None, rule: Optional[str] = None):
        super().__init__(message)
        self.index = index
        self.rule = rule


class ResourceLimitError(RuntimeError):
    """Requested depth exceeds a configured enumeration cap."""


def _signs(seq, name):
    out = tuple(int(x) for x in seq)
    for i, x in enumerate(out, 1):
        if x not in (-1, 1):
            raise PatchworkError(f"{name}_{i} = {x} is not +1 or -1", i)
    return out


@dataclass(frozen=True)
class RestrictedPatchwork:
    v: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", _signs(self.v, "v"))

    def __len__(self):
        return len(self.v)

    def __getitem__(self, n: int) -> int:
        """1-based access: ``p[n]`` is v_n."""
        if n < 1:
            raise IndexError(n)
        return self.v[n - 1]

    def flipped(self) -> "RestrictedPatchwork":
        return RestrictedPatchwork(tuple(-x for x in self.v))

    @classmethod
    def default(cls, surface: FluteSurface, length: int, v2: int = 1) -> "RestrictedPatchwork":
        """The patchwork forced by the twists, starting from ``v_2``.

        ``v_1`` is chosen coherently with ``t_1`` (equal to ``v_2`` when
        ``t_1 = 0``, opposite when ``t_1 = 1/2``, and ``-1`` otherwise).  Off
        {0, 1/2} the next sign repeats the previous one.
        """
        if length < 2:
            raise ValueError("a restricted patchwork needs at least v_1 and v_2")
        _, t = surface.arrays(length)
        v = [0, v2]
        v[0] = _coherent_v1(t[0], v2)
        for n in range(2, length):
            v.append(-v[-1] if t[n - 1] == 0.5 else v[-1])
        return cls(tuple(v))


def _coherent_v1(t1: float, v2: int) -> int:
    if t1 == 0.0:
        return v2
    if t1 == 0.5:
        return -v2
    return -1


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    index: Optional[int] = None
    rule: Optional[str] = None
    message: str = "ok"

    def __bool__(self):
        return self.ok

    def raise_if_failed(self):
        if not self.ok:
            raise PatchworkError(self.message, self.index, self.rule)


def validate_restricted(v: RestrictedPatchwork, surface: FluteSurface, depth: int) -> ValidationReport:
    """Check the twist rule for ``2 <= n <= depth``; v must reach index depth + 1."""
    if depth < 2:
        raise ValueError("depth must be at least 2")
    if len(v) < depth + 1:
        raise PatchworkError(f"patchwork has {len(v)} signs, need {depth + 1}")
    _, t = surface.arrays(depth)
    for n in range(2, depth + 1):
        tn = t[n - 1]
        if tn == 0.0 and v[n + 1] != v[n]:
            return ValidationReport(False, n, RULE_ZERO, f"violation at n={n}: {RULE_ZERO}")
        if tn == 0.5 and v[n + 1] != -v[n]:
            return ValidationReport(False, n, RULE_HALF, f"violation at n={n}: {RULE_HALF}")
    return ValidationReport(True)


@dataclass(frozen=True)
class Patchwork:
    v_prime: Tuple[int, ...]
    w: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "v_prime", _signs(self.v_prime, "v'"))
        w = tuple(int(x) for x in self.w)
        for i, x in enumerate(w, 1):
            if x not in (0, 1):
                raise PatchworkError(f"w_{i} = {x} is not 0 or 1", i)
        if len(w) != len(self.v_prime):
            raise PatchworkError("v' and w must have the same length")
        object.__setattr__(self, "w", w)
        for n in range(2, len(w) // 2 + 1):
            if w[2 * n - 2] + w[2 * n - 1] == 2:
                raise PatchworkError(f"w_{2 * n - 1} + w_{2 * n} = 2 at n={n}", n, "w_{2n-1} + w_{2n} != 2")

    def __len__(self):
        return len(self.w)

    @property
    def depth(self) -> int:
        """Number of u' values the patchwork determines."""
        return (len(self.w) - 1) // 2

    def vp(self, k: int) -> int:
        return self.v_prime[k - 1]

    def wk(self, k: int) -> int:
        return self.w[k - 1]

    def admissible_violation(self) -> Optional[int]:
        """First n > 0 with w_{2n} + w_{2n+1} = 2, or None."""
        for n in range(1, (len(self.w) - 1) // 2 + 1):
            if self.w[2 * n - 1] + self.w[2 * n] == 2:
                return n
        return None

    @property
    def admissible(self) -> bool:
        return self.admissible_violation() is None


@dataclass(frozen=True)
class USequence:
    u: Tuple[float, ...]
    provenance: str

    def __len__(self):
        return len(self.u)

    def __getitem__(self, n: int) -> float:
        if n < 1:
            raise IndexError(n)
        return self.u[n - 1]

    def array(self) -> np.ndarray:
        return np.asarray(self.u, dtype=float)


def u_restricted(vn: int, vnext: int, tn: float) -> float:
    if vn * vnext == 1 or vn * tn > 0:
        return tn
    return vn + tn


def u_restricted_array(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Vectorized u_n for n = 1..len(t); ``v`` needs len(t) + 1 entries."""
    v = np.asarray(v)
    vn, vnext = v[:-1], v[1:]
    keep = (vn * vnext == 1) | (vn * t > 0)
    return np.where(keep, t, vn + t)


def u_sequence(v: RestrictedPatchwork, surface: FluteSurface, depth: int) -> USequence:
    if len(v) < depth + 1:
        raise PatchworkError(f"patchwork has {len(v)} signs, need {depth + 1}")
    if depth >= 2:
        validate_restricted(v, surface, depth).raise_if_failed()
    _, t = surface.arrays(depth)
    u = tuple(float(u_restricted(v[n], v[n + 1], float(t[n - 1]))) for n in range(1, depth + 1))
    return USequence(u, "restricted")


def u_generalized(vp_prev, w_prev, vp_out, w_out, vp_in, w_in, tn) -> float:
    """u'_n from (v'_{2n-1}, w_{2n-1}, v'_{2n}, w_{2n}, v'_{2n+1}, w_{2n+1}, t_n)."""
    ww = w_out + w_in
    if vp_out * vp_in == 1:
        return tn + ww * vp_prev * (1 - 2 * w_prev)
    if vp_out * (1 - 2 * ww) * tn > 0:
        return tn
    return tn + vp_out * (1 - 2 * ww)


def u_prime_sequence(p: Patchwork, surface: FluteSurface, depth: int) -> USequence:
    if len(p) < 2 * depth + 1:
        raise PatchworkError(f"patchwork has {len(p)} entries, need {2 * depth + 1}")
    bad = Patchwork(p.v_prime[: 2 * depth + 1], p.w[: 2 * depth + 1]).admissible_violation()
    if bad is not None:
        raise PatchworkError(f"w_{2 * bad} + w_{2 * bad + 1} = 2 at n={bad}", bad, "w_{2n} + w_{2n+1} != 2")
    _, t = surface.arrays(depth)
    u = []
    for n in range(1, depth + 1):
        u.append(float(u_generalized(
            p.vp(2 * n - 1), p.wk(2 * n - 1), p.vp(2 * n), p.wk(2 * n),
            p.vp(2 * n + 1), p.wk(2 * n + 1), float(t[n - 1]),
        )))
    return USequence(tuple(u), "generalized")


def reduce_to_patchwork(v: RestrictedPatchwork) -> Patchwork:
    vp = tuple(x for s in v.v for x in (s, s))
    return Patchwork(vp, (0,) * len(vp))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def enumerate_patchworks(surface: FluteSurface, depth: int, kind: str = "restricted", cap: Optional[int] = None) -> Iterator:
    """Yield every admissible prefix of the given depth exactly once.

    Restricted prefixes are ``v_1 .. v_depth`` with the twist rule applied from
    n = 1 on (so v_1 is coherent).  Generalized prefixes have 2*depth + 1
    entries and satisfy both w-sum constraints.  Order is lexicographic with
    +1 before -1 and, for generalized prefixes, v' before w and 0 before 1.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    if kind == "restricted":
        limit = RESTRICTED_DEPTH_CAP if cap is None else cap
        if depth > limit:
            raise ResourceLimitError(f"restricted enumeration depth {depth} exceeds cap {limit}")
        return _enum_restricted(surface, depth)
    if kind == "generalized":
        limit = GENERALIZED_DEPTH_CAP if cap is None else cap
        if depth > limit:
            raise ResourceLimitError(f"generalized enumeration depth {depth} exceeds cap {limit}")
        return _enum_generalized(depth)
    raise ValueError(f"unknown patchwork kind {kind!r}")


def _enum_restricted(surface, depth):
    _, t = surface.arrays(depth)

    def rec(prefix):
        if len(prefix) == depth:
            yield RestrictedPatchwork(tuple(prefix))
            return
        if not prefix:
            choices = (1, -1)
        else:
            tn = t[len(prefix) - 1]
            last = prefix[-1]
            choices = (last,) if tn == 0.0 else (-last,) if tn == 0.5 else (1, -1)
        for c in choices:
            prefix.append(c)
            yield from rec(prefix)
            prefix.pop()

    yield from rec([])


def _admissible_ws(length):
    """All w prefixes of the given length obeying both sum constraints, 0 before 1."""

    def rec(prefix):
        k = len(prefix)
        if k == length:
            yield tuple(prefix)
            return
        for c in (0, 1):
            if c == 1 and k >= 1 and prefix[-1] == 1:
                # position k+1: odd index pairs with the previous even one (n > 0),
                # even index 2n pairs with 2n-1 only for n > 1
                idx = k + 1
                if idx % 2 == 1 or idx >= 4:
                    continue
            prefix.append(c)
            yield from rec(prefix)
            prefix.pop()

    yield from rec([])


def _enum_generalized(depth):
    length = 2 * depth + 1
    ws = list(_admissible_ws(length))
    for vp in itertools.product((1, -1), repeat=length):
        for w in ws:
            yield Patchwork(vp, w)


# ---------------------------------------------------------------------------
# Minimizing search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    patchwork: Patchwork
    log_partial_sum: float
    strategy: str
    exact: bool
    beam_width: Optional[int] = None

    @property
    def partial_sum(self) -> float:
        return math.exp(self.log_partial_sum) if self.log_partial_sum < 709 else math.inf


def _transitions(first: bool):
    """Choices for the entries that close one step of the search."""
    out = []
    for vo, wo, vi, wi in itertools.product((1, -1), (0, 1), (1, -1), (0, 1)):
        if wo + wi == 2:
            continue
        out.append((vo, wo, vi, wi))
    return out


def minimizing_patchwork_search(
    surface: FluteSurface,
    depth: int,
    strategy: str = "exhaustive",
    beam_width: int = 256,
) -> SearchResult:
    """Admissible generalized patchwork with the smallest partial criterion sum.

    Dynamic programme over (v'_{2n+1}, w_{2n+1}, S_n).  Entries are merged only
    when S_n is exactly equal, which keeps the exhaustive search exact; the beam
    variant keeps the ``beam_width`` entries of smallest |S_n| per layer.
    """
    if strategy not in ("exhaustive", "beam"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "exhaustive" and depth > EXHAUSTIVE_DEPTH_CAP:
        raise ResourceLimitError(f"exhaustive search depth {depth} exceeds cap {EXHAUSTIVE_DEPTH_CAP}")
    if strategy == "beam" and beam_width < 1:
        raise ValueError("beam width must be positive")
    ell, t = surface.arrays(depth + 1)
    half = np.logaddexp(-ell[1:] / 2.0, -ell[:-1] / 2.0)

    # layer entries: key (vp_in, w_in, S) -> (log partial, parent key, choice)
    layer = {}
    for vp1, w1 in itertools.product((1, -1), (0, 1)):
        for vo, wo, vi, wi in _transitions(True):
            u = u_generalized(vp1, w1, vo, wo, vi, wi, float(t[0]))
            s = u * float(ell[0])
            lp = float(half[0] + log_cosh(s))
            key = (vi, wi, s)
            if key not in layer or lp < layer[key][0]:
                layer[key] = (lp, None, (vp1, w1, vo, wo, vi, wi))
    history = [layer]
    for n in range(2, depth + 1):
        if strategy == "beam" and len(layer) > beam_width:
            ranked = sorted(layer.items(), key=lambda kv: (abs(kv[0][2]), kv[1][0], kv[0][0], kv[0][1]))
            layer = dict(ranked[:beam_width])
            history[-1] = layer
        nxt = {}
        tn = float(t[n - 1])
        ln = float(ell[n - 1])
        for key, (lp, _, _) in layer.items():
            vp_prev, w_prev, s_prev = key
            for vo, wo, vi, wi in _transitions(False):
                if w_prev + wo == 2:
                    continue
                u = u_generalized(vp_prev, w_prev, vo, wo, vi, wi, tn)
                s = s_prev + u * ln
                lq = float(np.logaddexp(lp, half[n - 1] + log_cosh(s)))
                k2 = (vi, wi, s)
                if k2 not in nxt or lq < nxt[k2][0]:
                    nxt[k2] = (lq, key, (vo, wo, vi, wi))
        layer = nxt
        history.append(layer)
    best_key = min(layer, key=lambda k: (layer[k][0], k[0], k[1]))
    best = layer[best_key][0]
    # walk back-pointers
    chunks = []
    key = best_key
    for lay in reversed(history):
        _, parent, choice = lay[key]
        chunks.append(choice)
        key = parent
    chunks.reverse()
    vp, w = [], []
    first = chunks[0]
    vp += [first[0], first[2], first[4]]
    w += [first[1], first[3], first[5]]
    for vo, wo, vi, wi in chunks[1:]:
        vp += [vo, vi]
        w += [wo, wi]
    return SearchResult(Patchwork(tuple(vp), tuple(w)), best, strategy, strategy == "exhaustive",
                        beam_width if strategy == "beam" else None)


def partial_log_sum(surface: FluteSurface, u: USequence, depth: int) -> float:
    """log of sum_{n<=depth} (e^{-l_{n+1}/2} + e^{-l_n/2}) cosh(S_n)."""
    ell, _ = surface.arrays(depth + 1)
    s = np.cumsum(u.array()[:depth] * ell[:depth])
    logs = np.logaddexp(-ell[1:] / 2.0, -ell[:-1] / 2.0) + log_cosh(s)
    return float(np.logaddexp.reduce(logs))

"""Flute surfaces given by Fenchel-Nielsen sequences, and common-perpendicular lengths."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import mpmath
import numpy as np

TAIL_KINDS = ("constant", "linear", "logarithmic", "power", "periodic")

_TAIL_PARAMS = {
    "constant": ("c",),
    "linear": ("a", "b"),
    "logarithmic": ("c", "d"),
    "power": ("c", "p"),
    "periodic": ("cycle",),
}


class SurfaceValidationError(ValueError):
    """A coordinate sequence violates the flute-surface invariants at some index."""

    def __init__(self, message: str, index: Optional[int] = None, field_name: Optional[str] = None):
        super().__init__(message)
        self.index = index
        self.field_name = field_name


@dataclass(frozen=True)
class SequenceSpec:
    """An explicit prefix followed by a parametric tail.

    The tail is evaluated at the absolute index ``n`` (1-based), so a prefix of
    length 2 followed by ``linear(a=1, b=0)`` gives ``prefix[0], prefix[1], 3, 4, ...``.
    A periodic tail uses ``cycle[(n - 1) % len(cycle)]``.
    """

    tail: str = "constant"
    params: Tuple[Tuple[str, object], ...] = (("c", 0.0),)
    prefix: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.tail not in TAIL_KINDS:
            raise SurfaceValidationError(f"unknown tail kind {self.tail!r}")
        p = dict(self.params)
        expected = _TAIL_PARAMS[self.tail]
        if set(p) != set(expected):
            raise SurfaceValidationError(
                f"tail {self.tail!r} takes parameters {expected}, got {tuple(sorted(p))}"
            )
        if self.tail == "periodic":
            cycle = tuple(float(x) for x in p["cycle"])
            if not cycle:
                raise SurfaceValidationError("periodic tail needs a non-empty cycle")
            p["cycle"] = cycle
        else:
            p = {k: float(v) for k, v in p.items()}
        object.__setattr__(self, "params", tuple(sorted(p.items())))
        object.__setattr__(self, "prefix", tuple(float(x) for x in self.prefix))

    # constructors -----------------------------------------------------------

    @classmethod
    def constant(cls, c, prefix=()):
        return cls("constant", (("c", c),), tuple(prefix))

    @classmethod
    def linear(cls, a, b=0.0, prefix=()):
        return cls("linear", (("a", a), ("b", b)), tuple(prefix))

    @classmethod
    def logarithmic(cls, c, d=0.0, prefix=()):
        return cls("logarithmic", (("c", c), ("d", d)), tuple(prefix))

    @classmethod
    def power(cls, c, p, prefix=()):
        return cls("power", (("c", c), ("p", p)), tuple(prefix))

    @classmethod
    def periodic(cls, cycle, prefix=()):
        return cls("periodic", (("cycle", tuple(cycle)),), tuple(prefix))

    @property
    def param(self) -> Dict[str, object]:
        return dict(self.params)

    # evaluation -------------------------------------------------------------

    def tail_value(self, n: int) -> float:
        p = self.param
        if self.tail == "constant":
            return p["c"]
        if self.tail == "linear":
            return p["a"] * n + p["b"]
        if self.tail == "logarithmic":
            return p["c"] * math.log(n + p["d"])
        if self.tail == "power":
            return p["c"] * float(n) ** p["p"]
        cycle = p["cycle"]
        return cycle[(n - 1) % len(cycle)]

    def __call__(self, n: int) -> float:
        if n < 1:
            raise ValueError("sequence indices start at 1")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        return self.tail_value(n)

    def values(self, start: int, stop: int) -> np.ndarray:
        """Vectorized values for indices ``start <= n < stop``."""
        n = np.arange(start, stop, dtype=np.int64)
        out = np.empty(n.shape, dtype=float)
        p = self.param
        nf = n.astype(float)
        if self.tail == "constant":
            out[:] = p["c"]
        elif self.tail == "linear":
            out[:] = p["a"] * nf + p["b"]
        elif self.tail == "logarithmic":
            with np.errstate(invalid="ignore", divide="ignore"):
                out[:] = p["c"] * np.log(nf + p["d"])
        elif self.tail == "power":
            out[:] = p["c"] * nf ** p["p"]
        else:
            cycle = np.asarray(p["cycle"], dtype=float)
            out[:] = cycle[(n - 1) % len(cycle)]
        k = len(self.prefix)
        mask = n <= k
        if mask.any():
            out[mask] = np.asarray(self.prefix, dtype=float)[n[mask] - 1]
        return out

    # tail diagnostics used by the convergence registry ----------------------

    def is_bounded(self) -> bool:
        p = self.param
        if self.tail in ("constant", "periodic"):
            return True
        if self.tail == "linear":
            return p["a"] == 0
        if self.tail == "logarithmic":
            return p["c"] == 0
        return p["c"] == 0 or p["p"] <= 0

    def growth(self) -> Optional[str]:
        """Name of the unbounded growth scale of the tail, or ``None`` if bounded."""
        if self.is_bounded():
            return None
        return {"linear": "linear", "logarithmic": "log", "power": "power"}[self.tail]

    def tail_is_periodic(self) -> bool:
        return self.tail in ("constant", "periodic")

    def tail_period(self) -> int:
        if self.tail == "periodic":
            return len(self.param["cycle"])
        return 1

    def to_dict(self) -> dict:
        p = self.param
        if self.tail == "periodic":
            p = {"cycle": list(p["cycle"])}
        d = {"tail": self.tail, **p}
        if self.prefix:
            d["prefix"] = list(self.prefix)
        return d

    @classmethod
    def from_dict(cls, d, field_name: str = "sequence") -> "SequenceSpec":
        if isinstance(d, (int, float)) and not isinstance(d, bool):
            return cls.constant(float(d))
        if not isinstance(d, dict):
            raise SurfaceValidationError(f"{field_name}: expected a table or a number", field_name=field_name)
        d = dict(d)
        kind = d.pop("tail", "constant")
        prefix = d.pop("prefix", ())
        if kind not in TAIL_KINDS:
            raise SurfaceValidationError(f"{field_name}: unknown tail kind {kind!r}", field_name=field_name)
        expected = set(_TAIL_PARAMS[kind])
        if kind == "logarithmic":
            d.setdefault("d", 0.0)
        if kind == "linear":
            d.setdefault("b", 0.0)
        if set(d) != expected:
            raise SurfaceValidationError(
                f"{field_name}: tail {kind!r} takes keys {sorted(expected)}, got {sorted(d)}",
                field_name=field_name,
            )
        try:
            return cls(kind, tuple(d.items()), tuple(prefix))
        except (TypeError, ValueError) as exc:
            raise SurfaceValidationError(f"{field_name}: {exc}", field_name=field_name) from exc


@dataclass(frozen=True)
class FluteSurface:
    """Tight flute surface with cuff lengths ``lengths(n)`` and twists ``twists(n)``.

    Twists are fractions of the cuff length in ``(-1/2, 1/2]``; values outside
    that range are rejected rather than wrapped.
    """

    lengths: SequenceSpec
    twists: SequenceSpec = field(default_factory=lambda: SequenceSpec.constant(0.0))
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def coordinates(self, n: int) -> Tuple[float, float]:
        hit = self._cache.get(n)
        if hit is not None:
            return hit
        if n < 1:
            raise SurfaceValidationError("indices start at 1", index=n)
        ell = self.lengths(n)
        t = self.twists(n)
        _check_pair(ell, t, n)
        self._cache[n] = (ell, t)
        return ell, t

    def length(self, n: int) -> float:
        return self.coordinates(n)[0]

    def twist(self, n: int) -> float:
        return self.coordinates(n)[1]

    def arrays(self, n_max: int) -> Tuple[np.ndarray, np.ndarray]:
        """Validated arrays ``(lengths[0..n_max-1], twists[0..n_max-1])`` for n = 1..n_max."""
        ell = self.lengths.values(1, n_max + 1)
        t = self.twists.values(1, n_max + 1)
        bad = ~(np.isfinite(ell) & (ell > 0))
        if bad.any():
            n = int(np.argmax(bad)) + 1
            raise SurfaceValidationError(f"lengths: value {float(ell[n - 1])!r} at n={n} is not positive", n, "lengths")
        bad = ~(np.isfinite(t) & (t > -0.5) & (t <= 0.5))
        if bad.any():
            n = int(np.argmax(bad)) + 1
            raise SurfaceValidationError(f"twists: value {float(t[n - 1])!r} at n={n} is outside (-1/2, 1/2]", n, "twists")
        return ell, t

    def symmetric_twists(self, n_max: int) -> bool:
        """Whether every twist up to ``n_max`` (and the whole periodic tail) lies in {0, 1/2}."""
        _, t = self.arrays(n_max)
        ok = bool(np.all((t == 0.0) | (t == 0.5)))
        if ok and self.twists.tail_is_periodic():
            cyc = self.twists.param.get("cycle", (self.twists.param.get("c"),))
            ok = all(x in (0.0, 0.5) for x in cyc)
        return ok

    def to_dict(self) -> dict:
        return {"lengths": self.lengths.to_dict(), "twists": self.twists.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "FluteSurface":
        return cls(
            SequenceSpec.from_dict(d["lengths"], "lengths"),
            SequenceSpec.from_dict(d.get("twists", 0.0), "twists"),
        )


def _check_pair(ell, t, n):
    if not (math.isfinite(ell) and ell > 0):
        raise SurfaceValidationError(f"lengths: value {ell!r} at n={n} is not positive", n, "lengths")
    if not (math.isfinite(t) and -0.5 < t <= 0.5):
        raise SurfaceValidationError(f"twists: value {t!r} at n={n} is outside (-1/2, 1/2]", n, "twists")


def eval_coordinates(surface: FluteSurface, n: int) -> Tuple[float, float]:
    return surface.coordinates(n)


# ---------------------------------------------------------------------------
# Common perpendicular between consecutive cuff lifts
# ---------------------------------------------------------------------------


def _log_csch(x: float) -> float:
    # log(1 / sinh x) without overflow for large x
    return math.log(2.0) - x - math.log1p(-math.exp(-2.0 * x))


def log_asinh_csch(x: float) -> float:
    """``log(asinh(1 / sinh(x)))`` for x > 0, stable for large x."""
    lc = _log_csch(x)
    if lc > -18.0:
        return math.log(math.asinh(math.exp(lc)))
    c = math.exp(lc)
    # asinh(c) = c (1 - c^2/6 + ...)
    return lc + math.log1p(-c * c / 6.0)


def eta_length(ell_a, ell_b):
    """Length of the common perpendicular between consecutive cuff lifts.

    ``asinh(1/sinh(ell_a/2)) + asinh(1/sinh(ell_b/2))``.
    """
    if not (ell_a > 0 and ell_b > 0):
        raise ValueError("cuff lengths must be positive")
    if isinstance(ell_a, mpmath.mpf) or isinstance(ell_b, mpmath.mpf):
        return mpmath.asinh(mpmath.csch(ell_a / 2)) + mpmath.asinh(mpmath.csch(ell_b / 2))
    return math.exp(log_eta_length(ell_a, ell_b))


def log_eta_length(ell_a: float, ell_b: float) -> float:
    """``log(eta_length(ell_a, ell_b))`` evaluated without underflow."""
    if not (ell_a > 0 and ell_b > 0):
        raise ValueError("cuff lengths must be positive")
    x = log_asinh_csch(ell_a / 2.0)
    y = log_asinh_csch(ell_b / 2.0)
    return float(np.logaddexp(x, y))


def eta_comparability(surface: FluteSurface, n: int) -> float:
    """``eta_n / (exp(-ell_{n+1}/2) + exp(-ell_n/2))``; tends to 2 as the cuffs grow."""
    a = surface.length(n)
    b = surface.length(n + 1)
    return math.exp(log_eta_length(a, b) - float(np.logaddexp(-a / 2.0, -b / 2.0)))

"""Extended-range reals stored as (log|x|, sign)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class LogValue:
    log: float
    sign: int = 1

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(-math.inf, 0)

    @classmethod
    def of(cls, x: float) -> "LogValue":
        if x == 0:
            return cls.zero()
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log)
        except OverflowError:
            return self.sign * math.inf

    def __add__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        if self.sign == other.sign:
            return LogValue(float(np.logaddexp(self.log, other.log)), self.sign)
        hi, lo = (self, other) if self.log >= other.log else (other, self)
        if hi.log == lo.log:
            return LogValue.zero()
        return LogValue(hi.log + math.log1p(-math.exp(lo.log - hi.log)), hi.sign)

    def __truediv__(self, other: "LogValue") -> float:
        """Ratio as a plain float."""
        return self.sign * other.sign * math.exp(self.log - other.log)


def log_cosh(x):
    """``log(cosh(x))`` for floats or numpy arrays, without overflow."""
    a = np.abs(x)
    return a + np.log1p(np.exp(-2.0 * a)) - _LOG2


def log_sum_exp(logs) -> float:
    logs = np.asarray(logs, dtype=float)
    if logs.size == 0:
        return -math.inf
    m = float(np.max(logs))
    if m == -math.inf:
        return m
    return m + math.log(float(np.sum(np.exp(logs - m))))


def cumulative_log_sum(logs) -> np.ndarray:
    """Running ``log(sum(exp(logs[:k+1])))``."""
    return np.logaddexp.accumulate(np.asarray(logs, dtype=float))

"""Argument checks shared by the CLI and the estimator."""
from __future__ import annotations

import numbers
from typing import Iterable, List, Mapping, Union

from .flute_model import FluteSurface, SurfaceValidationError

MIN_DEPTH = 2
MIN_PRECISION = 53


class ConfigError(ValueError):
    """Invalid configuration value; ``field`` names the offending key."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


def check_int(value, field: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"expected an integer, got {value!r}", field)
    if value < minimum:
        raise ConfigError(f"must be at least {minimum}, got {value}", field)
    return int(value)


def check_depth(depth, field: str = "depth") -> int:
    return check_int(depth, field, MIN_DEPTH)


def check_precision(precision, field: str = "precision") -> Union[int, str]:
    if precision == "auto":
        return precision
    return check_int(precision, field, MIN_PRECISION)


def check_positive(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not value > 0:
        raise ConfigError(f"must be a positive number, got {value!r}", field)
    return float(value)


def check_surface(obj: Union[FluteSurface, Mapping]) -> FluteSurface:
    """Accept a surface or its dict form; validates the first coordinates eagerly."""
    if isinstance(obj, FluteSurface):
        surface = obj
    elif isinstance(obj, Mapping):
        extra = set(obj) - {"lengths", "twists"}
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)}", "surface")
        if "lengths" not in obj:
            raise ConfigError("missing required key 'lengths'", "surface")
        surface = FluteSurface.from_dict(dict(obj))
    else:
        raise ConfigError(f"cannot interpret {type(obj).__name__} as a surface", "surface")
    surface.arrays(MIN_DEPTH + 1)
    return surface


def check_surfaces(X: Iterable) -> List[FluteSurface]:
    out = []
    for i, obj in enumerate(X):
        try:
            out.append(check_surface(obj))
        except (SurfaceValidationError, ConfigError) as exc:
            raise ConfigError(f"sample {i}: {exc}") from exc
    if not out:
        raise ConfigError("need at least one surface")
    return out

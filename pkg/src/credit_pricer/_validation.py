"""Input validation helpers used by the estimators and generators."""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np
import pandas as pd

from .exceptions import NumericalError, ValidationError


def check_finite(x, name: str = "array") -> np.ndarray:
    """Return ``x`` as a float array, raising if any entry is NaN or Inf."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains non-finite values")
    return arr


def check_probability(x, name: str = "probability", *, open_interval: bool = False) -> np.ndarray:
    arr = check_finite(x, name)
    if open_interval:
        bad = (arr <= 0.0) | (arr >= 1.0)
        bounds = "(0, 1)"
    else:
        bad = (arr < 0.0) | (arr > 1.0)
        bounds = "[0, 1]"
    if np.any(bad):
        raise ValidationError(f"{name} must lie in {bounds}")
    return arr


def check_positive(value, name: str, *, strict: bool = True) -> float:
    value = float(value)
    if not np.isfinite(value) or (value <= 0 if strict else value < 0):
        kind = "> 0" if strict else ">= 0"
        raise ValidationError(f"{name} must be {kind}, got {value!r}")
    return value


def check_columns(frame: pd.DataFrame, columns: Iterable[str], what: str = "frame") -> None:
    if not isinstance(frame, pd.DataFrame):
        raise ValidationError(f"{what} must be a pandas DataFrame, got {type(frame).__name__}")
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ValidationError(f"{what} is missing columns: {', '.join(missing)}")


def check_choice(value, choices: Iterable, name: str):
    choices = tuple(choices)
    if value not in choices:
        raise ValidationError(f"{name} must be one of {choices}, got {value!r}")
    return value


def check_strict_keys(data: dict, allowed: Iterable[str], where: str) -> None:
    """Reject unknown keys so typos in configuration files fail fast."""
    if not isinstance(data, dict):
        raise ValidationError(f"{where} must be a JSON object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ValidationError(f"unknown key(s) in {where}: {', '.join(unknown)}")

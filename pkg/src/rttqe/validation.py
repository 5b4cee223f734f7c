"""Input validation helpers and the package's exception types."""

from __future__ import annotations

from typing import Sized

import numpy as np
from sklearn.utils.validation import check_array


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class UndefinedCorrelationError(ValidationError):
    """A correlation was requested on input for which it is undefined."""


class TranslationError(RuntimeError):
    """A translator or adapter failed; ``batch_index`` names the failing batch when known."""

    def __init__(self, message: str, batch_index: int | None = None):
        super().__init__(message if batch_index is None else f"batch {batch_index}: {message}")
        self.batch_index = batch_index


def check_same_length(a: Sized, b: Sized, what: str = "inputs") -> None:
    if len(a) != len(b):
        raise ValidationError(f"{what} differ in length: {len(a)} vs {len(b)}")


def check_vector(values, name: str = "values", min_length: int = 1) -> np.ndarray:
    """Return ``values`` as a finite 1-d float array of at least ``min_length`` items."""
    try:
        arr = check_array(np.asarray(values, dtype=float).reshape(-1, 1), ensure_min_samples=min_length)
    except ValueError as exc:
        raise ValidationError(f"{name}: {exc}") from None
    return arr.ravel()


def check_pair(x, y, min_length: int = 1) -> tuple[np.ndarray, np.ndarray]:
    x = check_vector(x, "x", min_length)
    y = check_vector(y, "y", min_length)
    check_same_length(x, y, "x and y")
    return x, y

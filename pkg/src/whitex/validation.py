"""Input validation helpers shared across the package.

Mirrors the spirit of ``sklearn.utils.validation``: every public entry point
funnels raw array-likes through one of these checks so numerical code can
assume clean float64 inputs.
"""

from __future__ import annotations

import numpy as np

from whitex.exceptions import ValidationError


def check_matrix(x, name: str = "X") -> np.ndarray:
    """Coerce ``x`` to a finite float64 matrix of shape (n_samples, n_features).

    1-D input is treated as a single sample and reshaped to (1, d).

    Raises:
        ValidationError: on empty input, >2 dims, or non-finite entries.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 1-D or 2-D, got {arr.ndim} dims")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or Inf entries")
    return arr


def check_vector(y, name: str = "y") -> np.ndarray:
    """Coerce ``y`` to a finite float64 1-D vector."""
    arr = np.asarray(y, dtype=np.float64).reshape(-1)
    if arr.size < 1:
        raise ValidationError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or Inf entries")
    return arr


def check_square_matrix(m, name: str = "m") -> np.ndarray:
    """Coerce ``m`` to a finite float64 square matrix."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or Inf entries")
    return arr


def check_dim(x: np.ndarray, dim: int, name: str = "X") -> None:
    """Check that the feature dimension of ``x`` matches ``dim``."""
    if x.shape[1] != dim:
        raise ValidationError(
            f"{name} has dimension {x.shape[1]}, expected {dim}"
        )

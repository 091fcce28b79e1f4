"""Flat 64-bit float vectors, small elementwise helpers, and seeded RNG.

All optimizer math in this package runs on plain 1-D numpy float64 arrays.
The helpers here centralize shape and finiteness checking so the step
functions stay readable.

Randomness is always drawn from PCG64 generators created by :func:`make_rng`;
the algorithm is fixed so that a seed produces the same stream on every
platform.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = [
    "DimensionError",
    "NumericError",
    "as_vector",
    "check_finite",
    "check_same_length",
    "axpy",
    "norm2",
    "make_rng",
]


class DimensionError(ValueError):
    """Vector shapes make the requested operation meaningless."""


class NumericError(ValueError):
    """A vector contains NaN or infinity where finite values are required."""


def as_vector(values) -> np.ndarray:
    """Copy ``values`` into a fresh 1-D float64 array."""
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {arr.shape}")
    return arr


def check_finite(x: np.ndarray, what: str = "vector") -> None:
    if not np.all(np.isfinite(x)):
        raise NumericError(f"{what} contains non-finite values")


def check_same_length(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.shape} vs {y.shape}")


def axpy(alpha: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return ``y + alpha * x`` without modifying either input."""
    if not math.isfinite(alpha):
        raise NumericError(f"alpha must be finite, got {alpha}")
    check_same_length(x, y)
    return y + alpha * x


def norm2(x: np.ndarray) -> float:
    """Euclidean norm of a nonempty vector."""
    if x.size == 0:
        raise DimensionError("norm2 of an empty vector is undefined")
    return float(np.linalg.norm(x))


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; equal seeds give equal streams everywhere."""
    return np.random.Generator(np.random.PCG64(seed))

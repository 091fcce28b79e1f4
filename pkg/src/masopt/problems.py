"""Differentiable toy objectives and a finite-difference gradient oracle.

Every problem exposes a loss and an analytic gradient over a flat parameter
vector; tests cross-check each gradient against central finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .vectors import make_rng

__all__ = [
    "Problem",
    "factored_surface",
    "rosenbrock",
    "l1_cone",
    "quadratic_problem",
    "random_quadratic",
    "finite_diff_grad",
]


@dataclass
class Problem:
    """A differentiable objective over a flat parameter vector.

    ``batch``, when present, evaluates loss and gradient restricted to a set
    of sample indices (mini-batching); ``meta`` carries problem-specific
    extras such as the quadratic's minimizer.  Instances are immutable in
    spirit: nothing here mutates after construction, so problems are safe to
    share across concurrent runs.
    """

    name: str
    dim: int
    loss: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    batch: Optional[Callable[[np.ndarray, np.ndarray], tuple[float, np.ndarray]]] = None
    n_samples: Optional[int] = None
    meta: dict = field(default_factory=dict)


def factored_surface(linear_form: bool = False) -> Problem:
    """Two-parameter factored-prediction surface.

    Predictions are ``p_i = w1 * (w2 * x_i)`` with ``x = [1, 2]`` and targets
    ``y = [2, 4]``.  The canonical loss is the squared error
    ``sum((p_i - y_i)**2)``, minimized (at zero) on the hyperbola
    ``w1 * w2 = 2``.

    ``linear_form=True`` instead gives the linear residual variant
    ``sum(p_i - y_i**2)``, which is unbounded below and has no minimum; it is
    shipped for inspection only.
    """
    x = np.array([1.0, 2.0])
    y = np.array([2.0, 4.0])

    if linear_form:

        def loss(w):
            return float(np.sum(w[0] * w[1] * x - y**2))

        def grad(w):
            return np.array([w[1] * np.sum(x), w[0] * np.sum(x)])

        return Problem("factored_linear", 2, loss, grad)

    def loss(w):
        r = w[0] * w[1] * x - y
        return float(np.sum(r * r))

    def grad(w):
        r = w[0] * w[1] * x - y
        return np.array([
            float(np.sum(2.0 * r * w[1] * x)),
            float(np.sum(2.0 * r * w[0] * x)),
        ])

    return Problem("factored", 2, loss, grad)


def rosenbrock(a: float = 1.0, b: float = 100.0) -> Problem:
    """Two-parameter valley ``z = (a - y)**2 + b * (y - x**2)**2``.

    Note the ``(a - y)`` term: this variant vanishes wherever ``y == a`` and
    ``y == x**2`` (e.g. at ``(+-1, 1)`` for ``a=1``), unlike the classical
    form with ``(a - x)``.
    """
    if not b > 0:
        raise ValueError(f"b must be positive, got {b}")

    def loss(w):
        x, y = w
        return float((a - y) ** 2 + b * (y - x * x) ** 2)

    def grad(w):
        x, y = w
        return np.array([
            -4.0 * b * x * (y - x * x),
            -2.0 * (a - y) + 2.0 * b * (y - x * x),
        ])

    return Problem("rosenbrock", 2, loss, grad, meta={"a": a, "b": b})


def l1_cone() -> Problem:
    """``z = |x| / 10 + |y|``; the subgradient of ``|t|`` at 0 is taken as 0."""

    def loss(w):
        return float(abs(w[0]) / 10.0 + abs(w[1]))

    def grad(w):
        return np.array([np.sign(w[0]) / 10.0, np.sign(w[1])])

    return Problem("l1_cone", 2, loss, grad)


def quadratic_problem(A: np.ndarray, w_star: np.ndarray) -> Problem:
    """``loss = 0.5 * (w - w*)^T A (w - w*)`` with symmetric positive definite A."""
    A = np.asarray(A, dtype=np.float64)
    w_star = np.asarray(w_star, dtype=np.float64)

    def loss(w):
        r = w - w_star
        return float(0.5 * r @ (A @ r))

    def grad(w):
        return A @ (w - w_star)

    return Problem("quadratic", len(w_star), loss, grad, meta={"A": A, "w_star": w_star})


def random_quadratic(dim: int, rng: np.random.Generator) -> Problem:
    """Random SPD quadratic with recorded minimizer ``meta['w_star']``."""
    if dim < 1:
        raise ValueError(f"dim must be at least 1, got {dim}")
    M = rng.standard_normal((dim, dim))
    # Gram matrix plus a ridge keeps the spectrum comfortably positive
    A = M @ M.T / dim + 0.5 * np.eye(dim)
    w_star = rng.standard_normal(dim)
    return quadratic_problem(A, w_star)


def finite_diff_grad(p: Problem, w: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient oracle: ``(L(w + h e_i) - L(w - h e_i)) / 2h``."""
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    w = np.asarray(w, dtype=np.float64)
    out = np.empty_like(w)
    for i in range(w.size):
        wp = w.copy()
        wm = w.copy()
        wp[i] += h
        wm[i] -= h
        out[i] = (p.loss(wp) - p.loss(wm)) / (2.0 * h)
    return out

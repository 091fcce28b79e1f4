"""SGD, ADAM, and the MAS (Mixing ADAM and SGD) update rules.

Each optimizer is a stateful step function over a flat parameter vector and
its gradient.  The two building blocks are:

* ``delta_sgd`` -- momentum/dampening/Nesterov increment ``v``; the update is
  ``w' = w - eta * v``.
* ``delta_adam`` -- moment-tracked increment ``d`` together with the effective
  learning rate ``eta_a = eta / (1 - beta1)``; the update is
  ``w' = w - eta_a * d``.

MAS merges the two raw increments and the two learning rates::

    merged = lambda_s * v + lambda_a * d
    eta_m  = lambda_s * eta + lambda_a * eta_a
    w'     = w - eta_m * merged

Two deliberate quirks of the transcribed rules, kept verbatim:

* The ADAM bias correction is the constant ``sqrt(1 - beta2) / (1 - beta1)``,
  not the usual per-step ``sqrt(1 - beta2**k) / (1 - beta1**k)``.
* On the very first momentum step the buffer is seeded with the raw gradient,
  without the ``(1 - dampening)`` factor.

The canonical ADAM increment is ``sqrt(1-beta2) * m / (sqrt(v) + eps)``.
``AdamHyper.alg_denominator`` switches to the variant that folds eps into the
constant instead: ``d = m / (sqrt(v) / (sqrt(1-beta2) + eps))``.  The two
differ only by O(eps); the variant is undefined at an exactly-zero second
moment and exists for comparison only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .vectors import DimensionError, NumericError, check_finite, check_same_length

__all__ = [
    "SgdHyper",
    "AdamHyper",
    "MasHyper",
    "SgdState",
    "AdamState",
    "MasState",
    "StepReport",
    "apply_weight_decay",
    "delta_sgd",
    "sgd_step",
    "delta_adam",
    "adam_step",
    "mas_step",
    "Sgd",
    "Adam",
    "Mas",
    "make_optimizer",
]

LAMBDA_SUM_TOL = 1e-12


@dataclass(frozen=True)
class SgdHyper:
    """Hyper-parameters of the SGD component.

    ``nesterov`` requires nonzero momentum, and is rejected together with a
    nonzero dampening unless ``allow_nesterov_dampening`` is set: the
    composed rule reads the post-dampening buffer, which is a combination
    with no agreed-upon meaning.
    """

    eta: float
    gamma: float = 0.0
    mu: float = 0.0
    dampening: float = 0.0
    nesterov: bool = False
    allow_nesterov_dampening: bool = False

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"learning rate must be positive, got {self.eta}")
        if self.gamma < 0:
            raise ValueError(f"weight decay must be nonnegative, got {self.gamma}")
        if not 0.0 <= self.mu < 1.0:
            raise ValueError(f"momentum must be in [0, 1), got {self.mu}")
        if not 0.0 <= self.dampening < 1.0:
            raise ValueError(f"dampening must be in [0, 1), got {self.dampening}")
        if self.nesterov:
            if self.mu == 0.0:
                raise ValueError("nesterov requires momentum > 0")
            if self.dampening != 0.0 and not self.allow_nesterov_dampening:
                raise ValueError(
                    "nesterov with nonzero dampening is rejected by default; "
                    "set allow_nesterov_dampening=True to override"
                )


@dataclass(frozen=True)
class AdamHyper:
    eta: float
    gamma: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    amsgrad: bool = False
    alg_denominator: bool = False

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"learning rate must be positive, got {self.eta}")
        if self.gamma < 0:
            raise ValueError(f"weight decay must be nonnegative, got {self.gamma}")
        if not 0.0 <= self.beta1 < 1.0:
            raise ValueError(f"beta1 must be in [0, 1), got {self.beta1}")
        if not 0.0 <= self.beta2 < 1.0:
            raise ValueError(f"beta2 must be in [0, 1), got {self.beta2}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")


@dataclass(frozen=True)
class MasHyper:
    """Mixing weights plus the full hyper-parameter sets of both components.

    By default construction enforces ``lambda_a + lambda_s == 1`` (within
    1e-12); the weights keep the merged learning rate on the same order as
    the component learning rates.  Pass ``unconstrained=True`` to experiment
    with arbitrary nonnegative pairs.
    """

    lambda_a: float
    lambda_s: float
    sgd: SgdHyper
    adam: AdamHyper
    unconstrained: bool = False

    def __post_init__(self):
        if self.lambda_a < 0 or self.lambda_s < 0:
            raise ValueError(
                f"mixing weights must be nonnegative, got ({self.lambda_a}, {self.lambda_s})"
            )
        if not self.unconstrained:
            total = self.lambda_a + self.lambda_s
            if abs(total - 1.0) > LAMBDA_SUM_TOL:
                raise ValueError(
                    f"lambda_a + lambda_s must equal 1 (got {total}); "
                    "construct with unconstrained=True to allow other pairs"
                )

    @classmethod
    def from_single_lr(
        cls,
        eta: float,
        lambda_a: float,
        lambda_s: float,
        *,
        gamma: float = 0.0,
        mu: float = 0.0,
        dampening: float = 0.0,
        nesterov: bool = False,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        amsgrad: bool = False,
        unconstrained: bool = False,
    ) -> "MasHyper":
        """Build a MasHyper sharing one learning rate between both parts."""
        return cls(
            lambda_a=lambda_a,
            lambda_s=lambda_s,
            sgd=SgdHyper(eta=eta, gamma=gamma, mu=mu, dampening=dampening, nesterov=nesterov),
            adam=AdamHyper(
                eta=eta, gamma=gamma, beta1=beta1, beta2=beta2, eps=eps, amsgrad=amsgrad
            ),
            unconstrained=unconstrained,
        )


class SgdState:
    """Momentum buffer ``v`` (zeros before the first step) and step counter."""

    def __init__(self, dim: int):
        self.v = np.zeros(dim, dtype=np.float64)
        self.k = 0


class AdamState:
    """Moment buffers ``m``/``va`` and the AMSGrad running max ``vhat``."""

    def __init__(self, dim: int):
        self.m = np.zeros(dim, dtype=np.float64)
        self.va = np.zeros(dim, dtype=np.float64)
        self.vhat = np.zeros(dim, dtype=np.float64)
        self.k = 0


class MasState:
    def __init__(self, dim: int):
        self.sgd = SgdState(dim)
        self.adam = AdamState(dim)


@dataclass
class StepReport:
    """What a step actually did: ``new_w == old_w - effective_lr * raw_increment``."""

    step_direction: np.ndarray
    effective_lr: float
    raw_increment: np.ndarray


def apply_weight_decay(grad: np.ndarray, w: np.ndarray, gamma: float) -> np.ndarray:
    """Fold L2 weight decay into the gradient: ``grad + w * gamma``."""
    check_same_length(grad, w)
    if gamma < 0:
        raise ValueError(f"weight decay must be nonnegative, got {gamma}")
    return grad + w * gamma


def _check_step_inputs(w: np.ndarray, grad: np.ndarray, buf: np.ndarray) -> None:
    check_same_length(grad, w)
    check_same_length(buf, w)
    check_finite(grad, "gradient")


def delta_sgd(state: SgdState, w: np.ndarray, grad: np.ndarray, h: SgdHyper) -> np.ndarray:
    """Momentum increment; mutates ``state`` and advances its step counter.

    With zero momentum the decayed gradient passes through untouched and the
    buffer stays at zero.  With Nesterov the returned value is the look-ahead
    ``grad_hat + mu * v`` while the buffer keeps the pre-look-ahead ``v``.
    """
    _check_step_inputs(w, grad, state.v)
    g = apply_weight_decay(grad, w, h.gamma)
    if h.mu != 0.0:
        if state.k == 0:
            # first step seeds the buffer with the raw decayed gradient,
            # deliberately skipping the (1 - dampening) factor
            state.v = g.copy()
        else:
            state.v = state.v * h.mu + g * (1.0 - h.dampening)
        if h.nesterov:
            out = g + state.v * h.mu
        else:
            out = state.v.copy()
    else:
        out = g
    state.k += 1
    return out


def sgd_step(
    state: SgdState, w: np.ndarray, grad: np.ndarray, h: SgdHyper
) -> tuple[np.ndarray, StepReport]:
    inc = delta_sgd(state, w, grad, h)
    direction = h.eta * inc
    return w - direction, StepReport(direction, h.eta, inc)


def delta_adam(
    state: AdamState, w: np.ndarray, grad: np.ndarray, h: AdamHyper
) -> tuple[np.ndarray, float]:
    """ADAM increment ``d`` and effective learning rate ``eta_a``.

    Mutates the moment buffers (and the running max when ``amsgrad``) and
    advances the step counter.
    """
    _check_step_inputs(w, grad, state.m)
    g = apply_weight_decay(grad, w, h.gamma)
    state.m = state.m * h.beta1 + g * (1.0 - h.beta1)
    state.va = state.va * h.beta2 + g * g * (1.0 - h.beta2)
    if h.amsgrad:
        state.vhat = np.maximum(state.vhat, state.va)
        second = state.vhat
    else:
        second = state.va
    if h.alg_denominator:
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = np.sqrt(second) / (math.sqrt(1.0 - h.beta2) + h.eps)
            d = state.m / denom
    else:
        d = math.sqrt(1.0 - h.beta2) * state.m / (np.sqrt(second) + h.eps)
    eta_a = h.eta / (1.0 - h.beta1)
    state.k += 1
    return d, eta_a


def adam_step(
    state: AdamState, w: np.ndarray, grad: np.ndarray, h: AdamHyper
) -> tuple[np.ndarray, StepReport]:
    d, eta_a = delta_adam(state, w, grad, h)
    direction = eta_a * d
    return w - direction, StepReport(direction, eta_a, d)


def mas_step(
    state: MasState, w: np.ndarray, grad: np.ndarray, h: MasHyper
) -> tuple[np.ndarray, StepReport]:
    """One merged step; the same gradient feeds both sub-optimizers."""
    d, eta_a = delta_adam(state.adam, w, grad, h.adam)
    v = delta_sgd(state.sgd, w, grad, h.sgd)
    merged = h.lambda_s * v + h.lambda_a * d
    eta_m = h.lambda_s * h.sgd.eta + h.lambda_a * eta_a
    direction = eta_m * merged
    return w - direction, StepReport(direction, eta_m, merged)


class Sgd:
    """Stateful wrapper pairing SgdHyper with its buffers."""

    kind = "sgd"

    def __init__(self, hyper: SgdHyper, dim: int):
        self.hyper = hyper
        self.state = SgdState(dim)

    def step(self, w: np.ndarray, grad: np.ndarray) -> tuple[np.ndarray, StepReport]:
        return sgd_step(self.state, w, grad, self.hyper)


class Adam:
    kind = "adam"

    def __init__(self, hyper: AdamHyper, dim: int):
        self.hyper = hyper
        self.state = AdamState(dim)

    def step(self, w: np.ndarray, grad: np.ndarray) -> tuple[np.ndarray, StepReport]:
        return adam_step(self.state, w, grad, self.hyper)


class Mas:
    kind = "mas"

    def __init__(self, hyper: MasHyper, dim: int):
        self.hyper = hyper
        self.state = MasState(dim)

    def step(self, w: np.ndarray, grad: np.ndarray) -> tuple[np.ndarray, StepReport]:
        return mas_step(self.state, w, grad, self.hyper)


def make_optimizer(kind: str, hyper, dim: int):
    if kind == "sgd":
        return Sgd(hyper, dim)
    if kind == "adam":
        return Adam(hyper, dim)
    if kind == "mas":
        return Mas(hyper, dim)
    raise ValueError(f"unknown optimizer kind {kind!r}")

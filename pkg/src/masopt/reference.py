"""Naive reference optimizers used as test oracles.

These are second, independent transcriptions of the same three update rules,
written with python lists and scalar arithmetic only -- no numpy, no shared
code with :mod:`masopt.optimizers`.  They are deliberately slow.  Tests drive
both implementations over long random step sequences and require agreement
to 1e-12.
"""
from __future__ import annotations

import math

__all__ = ["NaiveSgd", "NaiveAdam", "NaiveMas", "make_naive", "naive_reference_step"]


class NaiveSgd:
    def __init__(self, eta, gamma=0.0, mu=0.0, dampening=0.0, nesterov=False):
        self.eta = eta
        self.gamma = gamma
        self.mu = mu
        self.dampening = dampening
        self.nesterov = nesterov
        self.v = None
        self.k = 0

    def increment(self, w, grad):
        n = len(w)
        if self.v is None:
            self.v = [0.0] * n
        g = [grad[i] + w[i] * self.gamma for i in range(n)]
        if self.mu != 0.0:
            if self.k == 0:
                self.v = [g[i] for i in range(n)]
            else:
                self.v = [
                    self.v[i] * self.mu + g[i] * (1.0 - self.dampening) for i in range(n)
                ]
            if self.nesterov:
                out = [g[i] + self.v[i] * self.mu for i in range(n)]
            else:
                out = [self.v[i] for i in range(n)]
        else:
            out = g
        self.k += 1
        return out

    def step(self, w, grad):
        out = self.increment(w, grad)
        return [w[i] - self.eta * out[i] for i in range(len(w))]


class NaiveAdam:
    def __init__(self, eta, gamma=0.0, beta1=0.9, beta2=0.999, eps=1e-8, amsgrad=False):
        self.eta = eta
        self.gamma = gamma
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.amsgrad = amsgrad
        self.m = None
        self.va = None
        self.vhat = None
        self.k = 0

    def increment(self, w, grad):
        n = len(w)
        if self.m is None:
            self.m = [0.0] * n
            self.va = [0.0] * n
            self.vhat = [0.0] * n
        g = [grad[i] + w[i] * self.gamma for i in range(n)]
        for i in range(n):
            self.m[i] = self.m[i] * self.beta1 + g[i] * (1.0 - self.beta1)
            self.va[i] = self.va[i] * self.beta2 + g[i] * g[i] * (1.0 - self.beta2)
        if self.amsgrad:
            for i in range(n):
                if self.va[i] > self.vhat[i]:
                    self.vhat[i] = self.va[i]
            second = self.vhat
        else:
            second = self.va
        d = [
            math.sqrt(1.0 - self.beta2) * self.m[i] / (math.sqrt(second[i]) + self.eps)
            for i in range(n)
        ]
        eta_a = self.eta / (1.0 - self.beta1)
        self.k += 1
        return d, eta_a

    def step(self, w, grad):
        d, eta_a = self.increment(w, grad)
        return [w[i] - eta_a * d[i] for i in range(len(w))]


class NaiveMas:
    def __init__(self, lambda_a, lambda_s, sgd: NaiveSgd, adam: NaiveAdam):
        self.lambda_a = lambda_a
        self.lambda_s = lambda_s
        self.sgd = sgd
        self.adam = adam

    def step(self, w, grad):
        d, eta_a = self.adam.increment(w, grad)
        v = self.sgd.increment(w, grad)
        n = len(w)
        merged = [self.lambda_s * v[i] + self.lambda_a * d[i] for i in range(n)]
        eta_m = self.lambda_s * self.sgd.eta + self.lambda_a * eta_a
        return [w[i] - eta_m * merged[i] for i in range(n)]


def make_naive(kind, **hyper):
    """Build a naive optimizer: kind is 'sgd', 'adam', or 'mas'."""
    if kind == "sgd":
        return NaiveSgd(**hyper)
    if kind == "adam":
        return NaiveAdam(**hyper)
    if kind == "mas":
        lambda_a = hyper.pop("lambda_a")
        lambda_s = hyper.pop("lambda_s")
        eta = hyper.pop("eta")
        gamma = hyper.pop("gamma", 0.0)
        sgd_keys = {k: hyper.pop(k) for k in ("mu", "dampening", "nesterov") if k in hyper}
        return NaiveMas(
            lambda_a,
            lambda_s,
            NaiveSgd(eta, gamma=gamma, **sgd_keys),
            NaiveAdam(eta, gamma=gamma, **hyper),
        )
    raise ValueError(f"unknown optimizer kind {kind!r}")


def naive_reference_step(optimizer, w, grad):
    """One oracle step; ``optimizer`` comes from :func:`make_naive`."""
    return optimizer.step(list(w), list(grad))

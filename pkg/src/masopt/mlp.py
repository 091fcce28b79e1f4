"""Synthetic classification data and a small from-scratch MLP problem.

The network is one tanh hidden layer followed by softmax cross-entropy, with
all weights flattened into a single parameter vector and an analytic backprop
gradient.  tanh keeps the surface smooth everywhere so finite-difference
checks are clean.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import Problem
from .vectors import make_rng

__all__ = [
    "SyntheticDataset",
    "make_dataset",
    "export_dataset",
    "make_mlp_problem",
    "mlp_forward",
    "mlp_accuracy",
]


@dataclass
class SyntheticDataset:
    """Gaussian-blob classification data; regeneration from ``seed`` is exact."""

    inputs: np.ndarray  # (n, f)
    labels: np.ndarray  # (n,) ints in [0, n_classes)
    n_classes: int
    seed: int

    def __len__(self):
        return len(self.labels)


def make_dataset(n: int, n_features: int, n_classes: int, seed: int, spread: float = 1.0) -> SyntheticDataset:
    """Balanced Gaussian blobs: class counts differ by at most one."""
    if n < n_classes:
        raise ValueError(f"need at least one sample per class ({n} < {n_classes})")
    rng = make_rng(seed)
    means = rng.normal(0.0, 2.0, (n_classes, n_features))
    counts = [n // n_classes + (1 if c < n % n_classes else 0) for c in range(n_classes)]
    xs, ys = [], []
    for c, count in enumerate(counts):
        xs.append(means[c] + rng.normal(0.0, spread, (count, n_features)))
        ys.append(np.full(count, c, dtype=np.int64))
    inputs = np.concatenate(xs)
    labels = np.concatenate(ys)
    perm = rng.permutation(n)
    return SyntheticDataset(inputs[perm], labels[perm], n_classes, seed)


def export_dataset(dataset: SyntheticDataset, path) -> None:
    """Write one comma-separated row per sample: feature columns then the label."""
    with open(path, "w") as fh:
        for x, y in zip(dataset.inputs, dataset.labels):
            fh.write(",".join(repr(float(v)) for v in x) + f",{int(y)}\n")


def _unpack(w: np.ndarray, f: int, h: int, c: int):
    i = 0
    W1 = w[i : i + f * h].reshape(f, h)
    i += f * h
    b1 = w[i : i + h]
    i += h
    W2 = w[i : i + h * c].reshape(h, c)
    i += h * c
    b2 = w[i : i + c]
    return W1, b1, W2, b2


def mlp_forward(w: np.ndarray, X: np.ndarray, f: int, h: int, c: int):
    """Return (hidden activations, softmax probabilities)."""
    W1, b1, W2, b2 = _unpack(w, f, h, c)
    a1 = np.tanh(X @ W1 + b1)
    z2 = a1 @ W2 + b2
    z2 = z2 - z2.max(axis=1, keepdims=True)
    e = np.exp(z2)
    probs = e / e.sum(axis=1, keepdims=True)
    return a1, probs


def make_mlp_problem(dataset: SyntheticDataset, hidden: int, rng: np.random.Generator) -> Problem:
    """Batched MLP problem over ``dataset`` with a deterministic init in ``meta['w0']``."""
    if hidden < 1:
        raise ValueError(f"hidden size must be at least 1, got {hidden}")
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    X, y = dataset.inputs, dataset.labels
    f = X.shape[1]
    h = hidden
    c = dataset.n_classes
    dim = f * h + h + h * c + c
    w0 = rng.normal(0.0, 0.05, dim)

    def loss_grad(w, idx):
        Xb, yb = X[idx], y[idx]
        n = len(yb)
        a1, probs = mlp_forward(w, Xb, f, h, c)
        ll = -np.log(probs[np.arange(n), yb])
        loss = float(ll.mean())
        dz2 = probs.copy()
        dz2[np.arange(n), yb] -= 1.0
        dz2 /= n
        W2 = _unpack(w, f, h, c)[2]
        gW2 = a1.T @ dz2
        gb2 = dz2.sum(axis=0)
        dz1 = (dz2 @ W2.T) * (1.0 - a1 * a1)
        gW1 = Xb.T @ dz1
        gb1 = dz1.sum(axis=0)
        return loss, np.concatenate([gW1.ravel(), gb1, gW2.ravel(), gb2])

    all_idx = np.arange(len(y))

    def loss(w):
        return loss_grad(w, all_idx)[0]

    def grad(w):
        return loss_grad(w, all_idx)[1]

    return Problem(
        "mlp",
        dim,
        loss,
        grad,
        batch=loss_grad,
        n_samples=len(y),
        meta={"w0": w0, "shape": (f, h, c), "dataset": dataset},
    )


def mlp_accuracy(problem: Problem, w: np.ndarray, inputs: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of samples whose argmax class matches the label."""
    f, h, c = problem.meta["shape"]
    _, probs = mlp_forward(w, inputs, f, h, c)
    return float(np.mean(probs.argmax(axis=1) == labels))

"""Main optimizers vs the naive list-based transcriptions, over long random
step sequences with randomized hyper-parameters."""
import numpy as np
import pytest

from masopt.optimizers import AdamHyper, MasHyper, SgdHyper, make_optimizer
from masopt.reference import make_naive
from masopt.vectors import make_rng

TOL = 1e-12
DIM = 6


def drive(opt, naive, rng, steps):
    w_main = rng.standard_normal(DIM)
    w_ref = list(w_main)
    for _ in range(steps):
        g = rng.standard_normal(DIM)
        w_main, _ = opt.step(w_main, g)
        w_ref = naive.step(w_ref, list(g))
        assert np.all(np.abs(w_main - np.array(w_ref)) <= TOL)


@pytest.mark.parametrize(
    "kw",
    [
        dict(eta=0.05),
        dict(eta=0.02, mu=0.9),
        dict(eta=0.02, mu=0.9, dampening=0.3),
        dict(eta=0.01, mu=0.8, nesterov=True),
        dict(eta=0.03, mu=0.5, gamma=0.01),
    ],
)
def test_sgd_matches_naive(kw):
    opt = make_optimizer("sgd", SgdHyper(**kw), DIM)
    drive(opt, make_naive("sgd", **kw), make_rng(101), steps=200)


@pytest.mark.parametrize(
    "kw",
    [
        dict(eta=0.01),
        dict(eta=0.01, amsgrad=True),
        dict(eta=0.005, beta1=0.5, beta2=0.99, gamma=0.02),
    ],
)
def test_adam_matches_naive(kw):
    opt = make_optimizer("adam", AdamHyper(**kw), DIM)
    drive(opt, make_naive("adam", **kw), make_rng(202), steps=200)


@pytest.mark.parametrize(
    "kw",
    [
        dict(eta=0.01, lambda_a=0.5, lambda_s=0.5),
        dict(eta=0.01, lambda_a=0.3, lambda_s=0.7, mu=0.9),
        dict(eta=0.02, lambda_a=0.7, lambda_s=0.3, amsgrad=True, gamma=0.01),
        dict(eta=0.01, lambda_a=1.0, lambda_s=0.0),
        dict(eta=0.01, lambda_a=0.0, lambda_s=1.0),
    ],
)
def test_mas_matches_naive(kw):
    hyper = MasHyper.from_single_lr(**kw)
    opt = make_optimizer("mas", hyper, DIM)
    drive(opt, make_naive("mas", **kw), make_rng(303), steps=200)


def test_long_random_sequences():
    # 1000 steps per optimizer with one fixed hyper draw
    rng = make_rng(99)
    drive(
        make_optimizer("sgd", SgdHyper(eta=0.01, mu=0.85, dampening=0.1), DIM),
        make_naive("sgd", eta=0.01, mu=0.85, dampening=0.1),
        rng,
        steps=1000,
    )
    drive(
        make_optimizer("adam", AdamHyper(eta=0.005, amsgrad=True), DIM),
        make_naive("adam", eta=0.005, amsgrad=True),
        rng,
        steps=1000,
    )
    drive(
        make_optimizer("mas", MasHyper.from_single_lr(0.01, 0.4, 0.6, mu=0.9), DIM),
        make_naive("mas", eta=0.01, lambda_a=0.4, lambda_s=0.6, mu=0.9),
        rng,
        steps=1000,
    )

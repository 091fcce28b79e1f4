"""Gradient-based optimizer library: SGD, ADAM, and the MAS mixture of both,
plus toy problems, a deterministic benchmark harness, and a CLI."""

from .optimizers import (
    Adam,
    AdamHyper,
    AdamState,
    Mas,
    MasHyper,
    MasState,
    Sgd,
    SgdHyper,
    SgdState,
    StepReport,
    adam_step,
    apply_weight_decay,
    delta_adam,
    delta_sgd,
    make_optimizer,
    mas_step,
    sgd_step,
)
from .problems import (
    Problem,
    factored_surface,
    finite_diff_grad,
    l1_cone,
    quadratic_problem,
    random_quadratic,
    rosenbrock,
)
from .harness import (
    RunSpec,
    RunResult,
    SummaryRow,
    TraceRecord,
    compare_trajectories,
    run_grid,
    run_many,
    run_single,
    run_table,
)
from .vectors import DimensionError, NumericError, axpy, make_rng, norm2

__version__ = "0.1.0"

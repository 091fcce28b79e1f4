"""Deterministic experiment runner and multi-seed summary tables.

A :class:`RunSpec` fully determines a run: equal specs produce identical
traces.  ``run_single`` executes one run and records one trace row per
optimizer step; ``run_grid``/``run_table`` sweep mixing-weight pairs over
seeds and aggregate final metrics into average/max summary rows.

A run whose loss turns non-finite is *diverged*: it stops early with a
non-finite loss marker in its trace tail and is excluded from averages (the
exclusion is counted, never silently dropped).
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import mlp as mlp_mod
from . import problems as problems_mod
from .optimizers import AdamHyper, MasHyper, SgdHyper, make_optimizer
from .vectors import NumericError, norm2

__all__ = [
    "RunSpec",
    "TraceRecord",
    "SummaryRow",
    "RunResult",
    "build_problem",
    "run_single",
    "run_many",
    "run_grid",
    "run_table",
    "compare_trajectories",
    "ComparisonReport",
    "write_trace",
    "read_trace",
    "write_summary",
    "TRACE_COLUMNS",
    "PARAM_SNAPSHOT_MAX_DIM",
]

PARAM_SNAPSHOT_MAX_DIM = 8
TRACE_COLUMNS = ["step", "epoch", "loss", "step_norm", "effective_lr"]

# defaults shared by every experiment: beta1=0.9, beta2=0.999, eps=1e-8,
# amsgrad off, dampening 0, nesterov off
@dataclass(frozen=True)
class RunSpec:
    problem: str  # factored | rosenbrock | l1_cone | quadratic | mlp
    optimizer: str  # sgd | adam | mas
    lr: float = 0.001
    momentum: float = 0.0
    weight_decay: float = 0.0
    dampening: float = 0.0
    nesterov: bool = False
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    amsgrad: bool = False
    lambda_a: float = 0.5
    lambda_s: float = 0.5
    unconstrained: bool = False
    epochs: int = 100
    batch_size: int = 0  # 0 = full-gradient (one step per epoch)
    seed: int = 0
    problem_params: tuple = ()  # sorted (key, value) pairs; see build_problem

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 0:
            raise ValueError(f"batch_size must be nonnegative, got {self.batch_size}")

    def params(self) -> dict:
        return dict(self.problem_params)

    def with_params(self, **kv) -> "RunSpec":
        merged = {**self.params(), **kv}
        return replace(self, problem_params=tuple(sorted(merged.items())))


@dataclass
class TraceRecord:
    step: int
    epoch: int
    loss: float
    step_norm: float
    effective_lr: float
    params: Optional[tuple] = None  # snapshot, emitted only for dim <= 8


@dataclass
class SummaryRow:
    label: str
    lambda_a: float
    lambda_s: float
    metric_avg: float
    metric_max: float
    n_runs: int
    n_excluded: int = 0


@dataclass
class RunResult:
    spec: RunSpec
    records: list
    final_params: np.ndarray
    diverged: bool
    final_metric: float


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


# stream ids for the independent rng consumers of one seed
_STREAM_INIT = 0
_STREAM_SHUFFLE = 1
_STREAM_PROBLEM = 2

# near the origin's flat plateau: gradient-magnitude steps crawl out of it
# while moment-normalized steps do not, which separates the three optimizers
FACTORED_START = (1e-7, 1e-7)
ROSENBROCK_START = (3.0, 1.0)
L1_CONE_START = (3.0, 2.0)

MLP_DEFAULTS = dict(n=400, features=8, classes=4, hidden=16, dataset_seed=7, test_fraction=0.2)


def build_problem(spec: RunSpec):
    """Construct the problem named by ``spec`` plus its start parameters.

    Returns ``(problem, w0, metric_fn)`` where ``metric_fn(w)`` is the
    summary metric for the run: held-out accuracy for the MLP task, final
    loss for everything else.
    """
    p = spec.params()
    if spec.problem == "factored":
        prob = problems_mod.factored_surface(linear_form=bool(p.get("linear_form", False)))
        w0 = np.array(p.get("start", FACTORED_START), dtype=np.float64)
    elif spec.problem == "rosenbrock":
        prob = problems_mod.rosenbrock(a=p.get("a", 1.0), b=p.get("b", 100.0))
        w0 = np.array(p.get("start", ROSENBROCK_START), dtype=np.float64)
    elif spec.problem == "l1_cone":
        prob = problems_mod.l1_cone()
        w0 = np.array(p.get("start", L1_CONE_START), dtype=np.float64)
    elif spec.problem == "quadratic":
        dim = int(p.get("dim", 8))
        rng = _rng(int(p.get("problem_seed", spec.seed)), _STREAM_PROBLEM)
        prob = problems_mod.random_quadratic(dim, rng)
        w0 = prob.meta["w_star"] + 2.0 * rng.standard_normal(dim)
    elif spec.problem == "mlp":
        cfg = {**MLP_DEFAULTS, **p}
        dataset = mlp_mod.make_dataset(
            int(cfg["n"]), int(cfg["features"]), int(cfg["classes"]), int(cfg["dataset_seed"])
        )
        n_test = int(round(len(dataset) * float(cfg["test_fraction"])))
        train = mlp_mod.SyntheticDataset(
            dataset.inputs[n_test:], dataset.labels[n_test:], dataset.n_classes, dataset.seed
        )
        test_inputs = dataset.inputs[:n_test]
        test_labels = dataset.labels[:n_test]
        prob = mlp_mod.make_mlp_problem(train, int(cfg["hidden"]), _rng(spec.seed, _STREAM_INIT))
        w0 = prob.meta["w0"]

        def metric(w):
            return mlp_mod.mlp_accuracy(prob, w, test_inputs, test_labels)

        return prob, w0, metric
    else:
        raise ValueError(f"unknown problem {spec.problem!r}")

    return prob, w0, prob.loss


def _build_optimizer(spec: RunSpec, dim: int):
    if spec.optimizer == "sgd":
        hyper = SgdHyper(
            eta=spec.lr,
            gamma=spec.weight_decay,
            mu=spec.momentum,
            dampening=spec.dampening,
            nesterov=spec.nesterov,
        )
    elif spec.optimizer == "adam":
        hyper = AdamHyper(
            eta=spec.lr,
            gamma=spec.weight_decay,
            beta1=spec.beta1,
            beta2=spec.beta2,
            eps=spec.eps,
            amsgrad=spec.amsgrad,
        )
    elif spec.optimizer == "mas":
        hyper = MasHyper.from_single_lr(
            spec.lr,
            spec.lambda_a,
            spec.lambda_s,
            gamma=spec.weight_decay,
            mu=spec.momentum,
            dampening=spec.dampening,
            nesterov=spec.nesterov,
            beta1=spec.beta1,
            beta2=spec.beta2,
            eps=spec.eps,
            amsgrad=spec.amsgrad,
            unconstrained=spec.unconstrained,
        )
    else:
        raise ValueError(f"unknown optimizer {spec.optimizer!r}")
    return make_optimizer(spec.optimizer, hyper, dim)


def run_single(spec: RunSpec) -> RunResult:
    """Execute one run; a pure function of ``spec``.

    Each trace row holds the loss at the pre-step parameters, the norm of the
    step taken from there, and the step's effective learning rate.
    """
    problem, w0, metric_fn = build_problem(spec)
    opt = _build_optimizer(spec, problem.dim)
    w = w0.copy()
    records: list[TraceRecord] = []
    diverged = False
    snapshot = problem.dim <= PARAM_SNAPSHOT_MAX_DIM
    batched = problem.batch is not None and spec.batch_size > 0
    if batched:
        shuffle_rng = _rng(spec.seed, _STREAM_SHUFFLE)
    step = 0
    for epoch in range(spec.epochs):
        if batched:
            perm = shuffle_rng.permutation(problem.n_samples)
            batches = [
                perm[i : i + spec.batch_size]
                for i in range(0, problem.n_samples, spec.batch_size)
            ]
        else:
            batches = [None]
        for idx in batches:
            if idx is None:
                loss = problem.loss(w)
                g = problem.grad(w)
            else:
                loss, g = problem.batch(w, idx)
            step += 1
            snap = tuple(float(v) for v in w) if snapshot else None
            if not math.isfinite(loss):
                records.append(TraceRecord(step, epoch, loss, 0.0, 0.0, snap))
                diverged = True
                break
            try:
                new_w, report = opt.step(w, g)
            except NumericError:
                records.append(TraceRecord(step, epoch, float("nan"), 0.0, 0.0, snap))
                diverged = True
                break
            records.append(
                TraceRecord(step, epoch, loss, norm2(report.step_direction), report.effective_lr, snap)
            )
            w = new_w
        if diverged:
            break
    final_metric = metric_fn(w) if np.all(np.isfinite(w)) else float("nan")
    if not math.isfinite(final_metric):
        diverged = True
    return RunResult(spec, records, w, diverged, final_metric)


def run_many(specs: Sequence[RunSpec], jobs: int = 1) -> list[RunResult]:
    """Run several specs, optionally concurrently; results keep input order."""
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_single, specs))
    return [run_single(s) for s in specs]


def aggregate_results(label: str, lambda_a: float, lambda_s: float, results: Sequence[RunResult]) -> SummaryRow:
    finals = [r.final_metric for r in results if not r.diverged]
    excluded = len(results) - len(finals)
    if finals:
        avg = sum(finals) / len(finals)
        mx = max(finals)
    else:
        avg = mx = float("nan")
    return SummaryRow(label, lambda_a, lambda_s, avg, mx, len(results), excluded)


def run_grid(
    base: RunSpec,
    lambdas: Sequence[tuple[float, float]],
    seeds: Sequence[int],
    jobs: int = 1,
) -> list[SummaryRow]:
    """One summary row per mixing pair, averaged over ``seeds``; rows keep order."""
    rows = []
    for la, ls in lambdas:
        spec = replace(base, optimizer="mas", lambda_a=la, lambda_s=ls)
        results = run_many([replace(spec, seed=s) for s in seeds], jobs=jobs)
        rows.append(aggregate_results(f"MAS({la:g},{ls:g})", la, ls, results))
    return rows


def run_table(
    base: RunSpec,
    lambdas: Sequence[tuple[float, float]],
    seeds: Sequence[int],
    jobs: int = 1,
) -> list[SummaryRow]:
    """ADAM and SGD baseline rows followed by one MAS row per mixing pair."""
    rows = []
    for label, kind, la, ls in (("Adam", "adam", 1.0, 0.0), ("SGD", "sgd", 0.0, 1.0)):
        spec = replace(base, optimizer=kind)
        results = run_many([replace(spec, seed=s) for s in seeds], jobs=jobs)
        rows.append(aggregate_results(label, la, ls, results))
    rows.extend(run_grid(base, lambdas, seeds, jobs=jobs))
    return rows


@dataclass
class ComparisonReport:
    steps_to_threshold: dict  # label -> {threshold -> step index or None}
    first_to_reach: dict  # threshold -> label or None
    final_ranking: list  # (label, final loss), best first
    truncated: bool  # lengths differed; compared over the common prefix


def _loss_sequence(trace) -> list[float]:
    return [r.loss if isinstance(r, TraceRecord) else float(r) for r in trace]


def compare_trajectories(traces: dict, thresholds: Sequence[float] = ()) -> ComparisonReport:
    """Report which trace first drives its loss below each threshold.

    ``traces`` maps a label to either a list of losses or a list of
    TraceRecord.  Mismatched lengths are compared over the common prefix and
    flagged via ``truncated``.
    """
    losses = {label: _loss_sequence(t) for label, t in traces.items()}
    if not losses:
        raise ValueError("no traces to compare")
    n = min(len(t) for t in losses.values())
    truncated = any(len(t) != n for t in losses.values())
    losses = {label: t[:n] for label, t in losses.items()}

    steps_to = {}
    for label, seq in losses.items():
        steps_to[label] = {
            thr: next((i for i, v in enumerate(seq) if v <= thr), None) for thr in thresholds
        }
    first = {}
    for thr in thresholds:
        reached = [(s[thr], label) for label, s in steps_to.items() if s[thr] is not None]
        first[thr] = min(reached)[1] if reached else None
    ranking = sorted(
        ((label, seq[-1]) for label, seq in losses.items()),
        key=lambda kv: (math.isnan(kv[1]), kv[1]),
    )
    return ComparisonReport(steps_to, first, ranking, truncated)


def _fmt(value) -> str:
    return repr(float(value))


def write_trace(records: Sequence[TraceRecord], path) -> None:
    """Delimited trace: header then one row per step, params last (p0..p7)."""
    n_params = len(records[0].params) if records and records[0].params is not None else 0
    header = TRACE_COLUMNS + [f"p{i}" for i in range(n_params)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in records:
            row = [r.step, r.epoch, _fmt(r.loss), _fmt(r.step_norm), _fmt(r.effective_lr)]
            if n_params:
                row.extend(_fmt(v) for v in r.params)
            writer.writerow(row)


def read_trace(path) -> list[TraceRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[: len(TRACE_COLUMNS)] != TRACE_COLUMNS:
            raise ValueError(f"unrecognized trace header in {path}: {header}")
        n_params = len(header) - len(TRACE_COLUMNS)
        records = []
        for row in reader:
            params = tuple(float(v) for v in row[5 : 5 + n_params]) if n_params else None
            records.append(
                TraceRecord(int(row[0]), int(row[1]), float(row[2]), float(row[3]), float(row[4]), params)
            )
    return records


def write_summary(rows: Sequence[SummaryRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["label", "lambda_a", "lambda_s", "metric_avg", "metric_max", "n_runs", "n_excluded"]
        )
        for r in rows:
            writer.writerow(
                [r.label, _fmt(r.lambda_a), _fmt(r.lambda_s), _fmt(r.metric_avg), _fmt(r.metric_max), r.n_runs, r.n_excluded]
            )

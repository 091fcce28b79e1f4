"""Command-line front end: run experiment configs, compare traces, plot.

Commands
--------
``masopt run --config FILE [--out DIR] [--seeds-override "0,1"] [--jobs N]``
    Execute every run defined by the config, write one trace file per run
    plus ``summary.csv`` under the output directory.

``masopt compare TRACE... [--thresholds "0.01,0.1"]``
    Print which trace first drives its loss below each threshold, and the
    final-loss ranking.

``masopt plot TRACE... --out IMAGE [--log-loss]``
    Render loss curves (and, for 2-parameter traces, the parameter
    trajectory) to a self-contained SVG.

Exit codes: 0 success (diverged runs are data, not failure); 2 missing or
unreadable file / no traces given; 3 invalid config; 4 trace schema mismatch.

Config files are flat ``key = value`` text; ``#`` starts a comment.  Unknown
keys are a hard error.  List-valued keys (``optimizer``, ``lambda_a``,
``lambda_s``, ``seeds``) take comma-separated values; MAS lambda lists are
paired positionally.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field, fields, replace

from .harness import (
    RunSpec,
    aggregate_results,
    compare_trajectories,
    read_trace,
    run_many,
    write_summary,
    write_trace,
)

__all__ = ["ExperimentConfig", "ConfigError", "parse_config", "format_config", "expand_rows", "main"]

EXIT_OK = 0
EXIT_MISSING = 2
EXIT_CONFIG = 3
EXIT_SCHEMA = 4


class ConfigError(ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


@dataclass
class ExperimentConfig:
    """One config file: a family of runs sharing every setting but the
    optimizer row and the seed."""

    problem: str = "quadratic"
    optimizer: list = field(default_factory=lambda: ["mas"])
    lambda_a: list = field(default_factory=lambda: [0.5])
    lambda_s: list = field(default_factory=lambda: [0.5])
    lr: float = 0.001
    momentum: float = 0.0
    weight_decay: float = 0.0
    dampening: float = 0.0
    nesterov: bool = False
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    amsgrad: bool = False
    epochs: int = 100
    batch_size: int = 0
    seeds: list = field(default_factory=lambda: [0])
    out_dir: str = "out"


_LIST_KEYS = {"optimizer", "lambda_a", "lambda_s", "seeds"}
_KNOWN_KEYS = {f.name for f in fields(ExperimentConfig)}


def _parse_bool(key, raw):
    low = raw.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {raw!r}", key)


def _parse_value(key, raw):
    raw = raw.strip()
    try:
        if key == "problem" or key == "out_dir":
            return raw
        if key == "optimizer":
            return [v.strip() for v in raw.split(",") if v.strip()]
        if key == "seeds":
            return [int(v) for v in raw.split(",")]
        if key in ("lambda_a", "lambda_s"):
            return [float(v) for v in raw.split(",")]
        if key in ("nesterov", "amsgrad"):
            return _parse_bool(key, raw)
        if key in ("epochs", "batch_size"):
            return int(raw)
        return float(raw)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: bad value {raw!r} ({exc})", key) from None


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}", key)
        setattr(cfg, key, _parse_value(key, raw))
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    for opt in cfg.optimizer:
        if opt not in ("sgd", "adam", "mas"):
            raise ConfigError(f"key 'optimizer': unknown optimizer {opt!r}", "optimizer")
    if len(cfg.lambda_a) != len(cfg.lambda_s):
        raise ConfigError(
            "keys 'lambda_a'/'lambda_s': lists must pair up "
            f"({len(cfg.lambda_a)} vs {len(cfg.lambda_s)} values)",
            "lambda_a",
        )
    if not cfg.seeds:
        raise ConfigError("key 'seeds': at least one seed is required", "seeds")


def format_config(cfg: ExperimentConfig) -> str:
    """Serialize a config; parse_config(format_config(c)) round-trips."""
    lines = []
    for f in fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        if f.name in _LIST_KEYS:
            value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def expand_rows(cfg: ExperimentConfig):
    """Yield ``(label, lambda_a, lambda_s, base RunSpec)`` per summary row."""
    base = RunSpec(
        problem=cfg.problem,
        optimizer="sgd",
        lr=cfg.lr,
        momentum=cfg.momentum,
        weight_decay=cfg.weight_decay,
        dampening=cfg.dampening,
        nesterov=cfg.nesterov,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        eps=cfg.eps,
        amsgrad=cfg.amsgrad,
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
    )
    rows = []
    for opt in cfg.optimizer:
        if opt == "adam":
            rows.append(("adam", 1.0, 0.0, replace(base, optimizer="adam")))
        elif opt == "sgd":
            rows.append(("sgd", 0.0, 1.0, replace(base, optimizer="sgd")))
        else:
            for la, ls in zip(cfg.lambda_a, cfg.lambda_s):
                rows.append(
                    (
                        f"mas_a{la:g}_s{ls:g}",
                        la,
                        ls,
                        replace(base, optimizer="mas", lambda_a=la, lambda_s=ls),
                    )
                )
    return rows


def cmd_run(args) -> int:
    if not os.path.isfile(args.config):
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_MISSING
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        cfg.out_dir = args.out
    if args.seeds_override:
        try:
            cfg.seeds = [int(v) for v in args.seeds_override.split(",")]
        except ValueError:
            print(f"error: bad --seeds-override {args.seeds_override!r}", file=sys.stderr)
            return EXIT_CONFIG
    os.makedirs(cfg.out_dir, exist_ok=True)

    summary = []
    for label, la, ls, base in expand_rows(cfg):
        specs = [replace(base, seed=s) for s in cfg.seeds]
        results = run_many(specs, jobs=args.jobs)
        for result in results:
            trace_path = os.path.join(cfg.out_dir, f"trace_{label}_seed{result.spec.seed}.csv")
            write_trace(result.records, trace_path)
        summary.append(aggregate_results(label, la, ls, results))
    summary_path = os.path.join(cfg.out_dir, "summary.csv")
    write_summary(summary, summary_path)
    for row in summary:
        note = f" ({row.n_excluded} diverged)" if row.n_excluded else ""
        print(
            f"{row.label}: avg={row.metric_avg:.6g} max={row.metric_max:.6g} "
            f"runs={row.n_runs}{note}"
        )
    print(f"wrote {summary_path}")
    return EXIT_OK


def _trace_label(path: str) -> str:
    stem = os.path.splitext(os.path.basename(path))[0]
    return stem[len("trace_") :] if stem.startswith("trace_") else stem


def _load_traces(paths):
    traces = {}
    for path in paths:
        if not os.path.isfile(path):
            raise FileNotFoundError(path)
        traces[_trace_label(path)] = read_trace(path)
    return traces


def cmd_compare(args) -> int:
    if len(args.traces) < 2:
        print("error: compare needs at least two trace files", file=sys.stderr)
        return EXIT_MISSING
    try:
        traces = _load_traces(args.traces)
    except (FileNotFoundError, OSError) as exc:
        print(f"error: cannot read trace: {exc}", file=sys.stderr)
        return EXIT_MISSING
    thresholds = [float(v) for v in args.thresholds.split(",")] if args.thresholds else []
    report = compare_trajectories(traces, thresholds)
    if report.truncated:
        print("warning: trace lengths differ; compared over the common prefix")
    for thr in thresholds:
        first = report.first_to_reach[thr]
        print(f"threshold {thr:g}: first to reach = {first if first else 'none'}")
        for label, steps in sorted(report.steps_to_threshold.items()):
            reached = "never" if steps[thr] is None else f"step {steps[thr]}"
            print(f"  {label}: {reached}")
    print("final-loss ranking:")
    for rank, (label, loss) in enumerate(report.final_ranking, start=1):
        print(f"  {rank}. {label}: {loss:.6g}")
    return EXIT_OK


def cmd_plot(args) -> int:
    if not args.traces:
        print("usage: masopt plot TRACE [TRACE ...] --out IMAGE", file=sys.stderr)
        return EXIT_MISSING
    headers = []
    for path in args.traces:
        if not os.path.isfile(path):
            print(f"error: cannot read trace: {path}", file=sys.stderr)
            return EXIT_MISSING
        with open(path) as fh:
            headers.append(fh.readline().strip())
    if len(set(headers)) > 1:
        print("error: traces have mismatched column schemas", file=sys.stderr)
        return EXIT_SCHEMA
    traces = _load_traces(args.traces)
    from .plotting import plot_traces  # deferred: pulls in matplotlib

    plot_traces(traces, args.out, log_loss=args.log_loss)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="masopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="override out_dir from the config")
    p_run.add_argument("--seeds-override", default=None, help="comma-separated seed list")
    p_run.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="rank traces by loss trajectory")
    p_cmp.add_argument("traces", nargs="*")
    p_cmp.add_argument("--thresholds", default=None, help="comma-separated loss thresholds")
    p_cmp.set_defaults(func=cmd_compare)

    p_plot = sub.add_parser("plot", help="render traces to an SVG")
    p_plot.add_argument("traces", nargs="*")
    p_plot.add_argument("--out", required=True, help="output image path (.svg)")
    p_plot.add_argument("--log-loss", action="store_true", help="log-scale loss axis")
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

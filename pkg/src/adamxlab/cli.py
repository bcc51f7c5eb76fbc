"""Command-line front end: run experiments, verify guarantees, plot traces.

Exit codes: 0 success, 1 a verification check failed, 2 usage or
configuration error, 3 numeric fault during a run.

``run`` writes one CSV row per step with the post-update iterate, so
row t carries x_{t+1}; floats are serialized with repr, the shortest
string that round-trips the exact double, so re-parsing a trace
reproduces the in-memory values bit for bit.
"""

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional
from xml.sax.saxutils import escape

from .errors import BoundUndefined, NumericFault
from .harness import (average_regret, quadratic_problem, run_oco,
                      synthetic_problem, toy_training_problem)
from .optimizers import HyperParams, Schedule
from .verify import SUITES, run_suite

PROBLEMS = ("synthetic", "quadratic", "logistic")
OPTIMIZERS = ("adam", "amsgrad", "adamx")
SCHEDULES = tuple(s.value for s in Schedule)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


@dataclass
class ExperimentConfig:
    problem: str = "synthetic"
    optimizer: str = "amsgrad"
    schedule: str = "exp"
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    lam: float = 0.001
    epsilon: float = 0.0
    steps: int = 1000
    seed: int = 0
    dim: int = 2
    record_full: bool = False
    alpha_constant: bool = False
    bias_correction: bool = False
    output_path: Optional[str] = None

    def validate(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if self.steps < 1:
            raise ValueError("steps must be ≥ 1")
        if self.dim < 1:
            raise ValueError("dim must be ≥ 1")

    def hyperparams(self):
        return HyperParams(alpha=self.alpha, beta1=self.beta1, beta2=self.beta2,
                           lam=self.lam, schedule=Schedule(self.schedule),
                           epsilon=self.epsilon, alpha_constant=self.alpha_constant,
                           bias_correction=self.bias_correction)

    def problem_instance(self):
        if self.problem == "synthetic":
            return synthetic_problem()
        if self.problem == "quadratic":
            return quadratic_problem(self.seed, self.dim)
        return toy_training_problem(self.seed)


_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)} | {"lambda"}


def _config_from(entry, overrides):
    """Build a config from a JSON dict layered under explicit flag values."""
    merged = {}
    for key, value in entry.items():
        if key not in _CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r}")
        merged["lam" if key == "lambda" else key] = value
    merged.update(overrides)
    try:
        config = ExperimentConfig(**merged)
    except TypeError as err:
        raise ValueError(str(err)) from err
    config.validate()
    return config


def _fmt(value):
    return repr(float(value))


def _write_trace_csv(stream, trace):
    writer = csv.writer(stream, lineterminator="\n")
    d = trace.iterates.shape[1]
    writer.writerow(["t", "f_xt", "f_xstar", "regret", "avg_regret"]
                    + [f"x_{i}" for i in range(d)])
    avg = average_regret(trace)
    for t in range(1, trace.T + 1):
        row = [str(t), _fmt(trace.losses[t - 1]), _fmt(trace.comparator_losses[t - 1]),
               _fmt(trace.cumulative_regret[t - 1]), _fmt(avg[t - 1])]
        row.extend(_fmt(v) for v in trace.iterates[t])
        writer.writerow(row)


def _summary_line(trace):
    total = float(trace.cumulative_regret[-1])
    return f"T={trace.T} R(T)={_fmt(total)} R(T)/T={_fmt(total / trace.T)}"


def _execute_run(config):
    """Run one config; returns (exit_code, summary_or_error, trace)."""
    problem = config.problem_instance()
    try:
        trace = run_oco(problem, config.optimizer, config.hyperparams(),
                        config.steps, record_full=config.record_full,
                        record_iterates=True)
    except NumericFault as err:
        return EXIT_NUMERIC, f"numeric fault at step {err.step}: {err}", None
    return EXIT_OK, _summary_line(trace), trace


def cmd_run(args):
    overrides = _flag_overrides(args)
    entries = [{}]
    batch = False
    if args.config:
        try:
            with open(args.config) as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as err:
            print(f"cannot read config {args.config}: {err}", file=sys.stderr)
            return EXIT_USAGE
        if isinstance(loaded, list):
            entries, batch = loaded, True
        elif isinstance(loaded, dict):
            entries = [loaded]
        else:
            print("config file must hold an object or a list of objects", file=sys.stderr)
            return EXIT_USAGE

    try:
        configs = [_config_from(entry, overrides) for entry in entries]
    except ValueError as err:
        print(f"invalid config: {err}", file=sys.stderr)
        return EXIT_USAGE

    if batch:
        missing = [i for i, c in enumerate(configs) if not c.output_path]
        if missing:
            print(f"batch entries must set output_path (missing in entry {missing[0]})",
                  file=sys.stderr)
            return EXIT_USAGE
        threads = os.environ.get("ADAMXLAB_THREADS")
        workers = max(1, int(threads)) if threads else min(8, len(configs))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_execute_run, configs))
        status = EXIT_OK
        for config, (code, message, trace) in zip(configs, results):
            if code != EXIT_OK:
                print(message, file=sys.stderr)
                status = code
                continue
            with open(config.output_path, "w", newline="") as f:
                _write_trace_csv(f, trace)
            print(message)
        return status

    config = configs[0]
    code, message, trace = _execute_run(config)
    if code != EXIT_OK:
        print(message, file=sys.stderr)
        return code
    if config.output_path:
        with open(config.output_path, "w", newline="") as f:
            _write_trace_csv(f, trace)
        print(message)
    else:
        _write_trace_csv(sys.stdout, trace)
        print(message, file=sys.stderr)
    return EXIT_OK


def _flag_overrides(args):
    """Flag values the user actually supplied (None means untouched)."""
    mapping = [("problem", "problem"), ("optimizer", "optimizer"),
               ("schedule", "schedule"), ("alpha", "alpha"), ("beta1", "beta1"),
               ("beta2", "beta2"), ("lam", "lam"), ("epsilon", "epsilon"),
               ("steps", "steps"), ("seed", "seed"), ("dim", "dim"),
               ("record_full", "record_full"), ("alpha_constant", "alpha_constant"),
               ("bias_correction", "bias_correction"), ("output", "output_path")]
    out = {}
    for attr, key in mapping:
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = value
    return out


def cmd_verify(args):
    overrides = {k: getattr(args, k) for k in ("alpha", "beta1", "beta2", "lam", "epsilon")
                 if getattr(args, k) is not None}
    h = None
    if overrides:
        try:
            h = HyperParams(**overrides)
        except ValueError as err:
            print(f"invalid hyperparameters: {err}", file=sys.stderr)
            return EXIT_USAGE
    try:
        reports = run_suite(args.suite, h=h)
    except BoundUndefined as err:
        print(str(err), file=sys.stderr)
        return EXIT_CHECK_FAILED
    all_pass = all(r.passed for r in reports)
    payload = {
        "suite": args.suite,
        "status": "pass" if all_pass else "fail",
        "checks": [r.to_dict() for r in reports],
    }
    text = json.dumps(payload, indent=2)
    if args.output:
        with open(args.output, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return EXIT_OK if all_pass else EXIT_CHECK_FAILED


_AXIS_LABELS = {"avg_regret": "R(t)/t", "regret": "R(t)", "f_xt": "f_t(x_t)"}
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#17becf", "#bcbd22")


def _read_series(path, column):
    """Parse (t, column) pairs from a trace CSV; errors name the line."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if "t" not in header or column not in header:
            raise ValueError(f"{path}: line 1: header must contain 't' and {column!r}")
        t_idx, c_idx = header.index("t"), header.index(column)
        ts, ys = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                values = [float(cell) for cell in row]
                if len(row) != len(header):
                    raise ValueError
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: malformed row") from None
            ts.append(values[t_idx])
            ys.append(values[c_idx])
    if not ts:
        raise ValueError(f"{path}: no data rows")
    return ts, ys


def _svg_chart(series, column):
    width, height = 800, 500
    left, right, top, bottom = 70, 210, 20, 50
    plot_w, plot_h = width - left - right, height - top - bottom

    xs = [t for ts, _, _ in series for t in ts]
    ys = [y for _, vals, _ in series for y in vals]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymin, ymax = ymin - 1.0, ymax + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad

    def px(t):
        return left + (t - xmin) / (xmax - xmin) * plot_w

    def py(y):
        return top + (ymax - y) / (ymax - ymin) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
    ]
    for k in range(5):
        tx = xmin + k * (xmax - xmin) / 4
        ty = ymin + pad + k * (ymax - ymin - 2 * pad) / 4
        parts.append(f'<line x1="{px(tx):.2f}" y1="{top + plot_h}" x2="{px(tx):.2f}" '
                     f'y2="{top + plot_h + 5}" stroke="black"/>')
        parts.append(f'<text x="{px(tx):.2f}" y="{top + plot_h + 20}" font-size="12" '
                     f'text-anchor="middle">{tx:.4g}</text>')
        parts.append(f'<line x1="{left - 5}" y1="{py(ty):.2f}" x2="{left}" '
                     f'y2="{py(ty):.2f}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{py(ty) + 4:.2f}" font-size="12" '
                     f'text-anchor="end">{ty:.4g}</text>')
    label = _AXIS_LABELS.get(column, column)
    parts.append(f'<text x="{left + plot_w / 2:.2f}" y="{height - 10}" font-size="14" '
                 f'text-anchor="middle">t</text>')
    parts.append(f'<text x="18" y="{top + plot_h / 2:.2f}" font-size="14" '
                 f'text-anchor="middle" transform="rotate(-90 18 {top + plot_h / 2:.2f})">'
                 f'{escape(label)}</text>')
    for idx, (ts, vals, name) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        points = " ".join(f"{px(t):.2f},{py(y):.2f}" for t, y in zip(ts, vals))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{points}"/>')
        ly = top + 16 + idx * 18
        lx = left + plot_w + 14
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 28}" y="{ly}" font-size="12">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_plot(args):
    series = []
    for path in args.traces:
        try:
            ts, ys = _read_series(path, args.column)
        except (OSError, ValueError) as err:
            print(str(err), file=sys.stderr)
            return EXIT_USAGE
        series.append((ts, ys, os.path.basename(path)))
    svg = _svg_chart(series, args.column)
    with open(args.output, "w") as f:
        f.write(svg)
    print(f"wrote {args.output}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adamxlab",
        description="Projected adaptive-moment optimizers with regret accounting "
                    "and numeric verification of their guarantees.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment (or a batch) and emit a CSV trace")
    run.add_argument("--config", help="JSON config file: one object, or a list for batch mode")
    run.add_argument("--problem", choices=PROBLEMS)
    run.add_argument("--optimizer", choices=OPTIMIZERS)
    run.add_argument("--schedule", choices=SCHEDULES)
    run.add_argument("--alpha", type=float)
    run.add_argument("--beta1", type=float)
    run.add_argument("--beta2", type=float)
    run.add_argument("--lambda", dest="lam", type=float)
    run.add_argument("--epsilon", type=float)
    run.add_argument("--steps", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--dim", type=int, help="dimension for the quadratic problem")
    run.add_argument("--record-full", dest="record_full",
                     action=argparse.BooleanOptionalAction, default=None)
    run.add_argument("--alpha-constant", dest="alpha_constant",
                     action=argparse.BooleanOptionalAction, default=None,
                     help="keep the step size fixed instead of alpha/sqrt(t)")
    run.add_argument("--bias-correction", dest="bias_correction",
                     action=argparse.BooleanOptionalAction, default=None,
                     help="adam only: rescale moments by 1/(1-beta^t)")
    run.add_argument("--output", help="CSV path (stdout when omitted)")
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="run a verification suite, print a JSON report")
    verify.add_argument("suite", choices=SUITES)
    verify.add_argument("--alpha", type=float)
    verify.add_argument("--beta1", type=float)
    verify.add_argument("--beta2", type=float)
    verify.add_argument("--lambda", dest="lam", type=float)
    verify.add_argument("--epsilon", type=float)
    verify.add_argument("--output", help="write the JSON report here instead of stdout")
    verify.set_defaults(func=cmd_verify)

    plot = sub.add_parser("plot", help="render trace CSVs as a static SVG line chart")
    plot.add_argument("traces", nargs="+", help="trace CSV files")
    plot.add_argument("--column", default="avg_regret",
                      help="which column to plot against t (default avg_regret)")
    plot.add_argument("--output", default="plot.svg")
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except NumericFault as err:
        print(f"numeric fault at step {err.step}: {err}", file=sys.stderr)
        code = EXIT_NUMERIC
    sys.exit(code)


if __name__ == "__main__":
    main()

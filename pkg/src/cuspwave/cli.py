"""Command-line front end: config parsing, experiment runs, file emission.

Commands: kernel, branch, homotopy, verify-asymptotics, regularity, audit.
Configuration comes from defaults, then an optional JSON document
(``--config``), then explicit flags; all numeric fields are validated with
field-level messages before any computation starts.  Exit codes: 0 success,
2 config error, 3 numerical failure, 4 IO failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import wave_audit
from .continuation import (
    ContinuationConfig,
    branch_follow,
    eps_homotopy,
    verify_asymptotics,
)
from .errors import AccuracyError, ConvergenceError, SingularityError
from .kernel import KernelSpec, gamma_coefficient, kernel_eval_many
from .nonlinearity import NonlinearitySpec, n_eval
from .spectral import Grid, SymbolSpec, analyze
from .spectral import synthesize as _synth
from .steady import SteadyProblem, make_branch_point

__all__ = ["RunConfig", "main", "run"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


@dataclass
class RunConfig:
    command: str = "branch"
    alpha: float = 0.5
    symbol_family: str = "neg_order"
    kind: str = "abs"
    p: float = 2.0
    eps: float = 1e-2
    eps_schedule: tuple = (1e-1, 1e-2, 1e-3)
    k: int = 1
    M: int = 256
    N: int = 1024
    s0: float = 1e-2
    ds: float = 5e-3
    ds_min: float = 1e-7
    ds_max: float = 5e-2
    crest_margin: float = 1e-2
    newton_tol: float = 1e-11
    kernel_nodes: int = 513
    input: str = ""
    output_dir: str = "."
    seed: int = 0

    def validate(self):
        checks = [
            ("alpha", self.alpha > 0, "alpha must satisfy alpha > 0"),
            ("p", self.p > 1, "p must satisfy p > 1"),
            ("eps", self.eps >= 0, "eps must satisfy eps >= 0"),
            ("k", self.k >= 1, "k must be a positive integer"),
            ("M", self.M >= 1, "M must be a positive integer"),
            (
                "N",
                self.N >= 4 and self.N & (self.N - 1) == 0,
                "N must be a power of two >= 4",
            ),
            ("N", self.N >= 4 * self.M, "N must satisfy N >= 4*M (dealiasing)"),
            ("kind", self.kind in ("abs", "sgn"), "kind must be 'abs' or 'sgn'"),
            (
                "symbol_family",
                self.symbol_family in ("neg_order", "whitham_power", "bessel"),
                "symbol_family must be neg_order, whitham_power, or bessel",
            ),
            ("s0", self.s0 > 0, "s0 must satisfy s0 > 0"),
            (
                "ds",
                0 < self.ds_min <= self.ds <= self.ds_max,
                "need 0 < ds_min <= ds <= ds_max",
            ),
            (
                "crest_margin",
                0 < self.crest_margin < 1,
                "crest_margin must lie in (0, 1)",
            ),
            ("newton_tol", self.newton_tol > 0, "newton_tol must be positive"),
            ("kernel_nodes", self.kernel_nodes >= 3, "kernel_nodes must be >= 3"),
            ("seed", self.seed >= 0, "seed must be a nonnegative integer"),
        ]
        sched = tuple(self.eps_schedule)
        checks.append(
            (
                "eps_schedule",
                all(e > 0 for e in sched)
                and all(b < a for a, b in zip(sched, sched[1:])),
                "eps_schedule must be strictly decreasing and positive",
            )
        )
        for name, ok, message in checks:
            if not ok:
                raise ConfigError(name, message)


class ConfigError(Exception):
    def __init__(self, field_name, message):
        super().__init__(message)
        self.field = field_name


def _fmt(x):
    """Shortest round-trip decimal form (repr of a Python float)."""
    return repr(float(x))


def _write_csv(path, header, rows):
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _emit_wave_csv(path, problem, point):
    values = _synth(point.phi, problem.grid)
    rows = [
        (float(x), float(v), float(point.mu_eps - v))
        for x, v in zip(problem.grid.nodes, values)
    ]
    _write_csv(path, "x,phi,mu_minus_phi", rows)


def _emit_branch_summary(path, branch, problem):
    lines = [f"terminated_reason: {branch.terminated_reason}", "points:"]
    N = problem.grid.N
    for bp in branch.points:
        values = _synth(bp.phi, problem.grid)
        monotone = bool(
            np.all(np.diff(values[: N // 2 + 1]) >= -max(1e-12, abs(bp.phi.coeffs[-1])))
        )
        if problem.nonlinearity.kind == "sgn":
            defect = float(np.max(np.abs(values + np.roll(values, N // 2))))
        else:
            defect = math.nan
        lines.append(
            f"  - s: {_fmt(bp.s)}\n"
            f"    c: {_fmt(bp.c)}\n"
            f"    max_value: {_fmt(bp.max_value)}\n"
            f"    mu_eps: {_fmt(bp.mu_eps)}\n"
            f"    residual_norm: {_fmt(bp.residual_norm)}\n"
            f"    monotone_ok: {monotone}\n"
            f"    antisymmetry_defect: {_fmt(defect)}"
        )
    path.write_text("\n".join(lines) + "\n")


def _emit_regularity_report(path, report):
    lines = [
        f"alpha_hat: {_fmt(report.alpha_hat)}",
        f"fit_window: {_fmt(report.fit_window[0])} {_fmt(report.fit_window[1])}",
        f"ratio_min: {_fmt(report.ratio_bounds[0])}",
        f"ratio_max: {_fmt(report.ratio_bounds[1])}",
        f"speed_bound_ok: {report.speed_bound_ok}",
        f"monotone_ok: {report.monotone_ok}",
        f"antisymmetry_defect: {_fmt(report.antisymmetry_defect)}",
        f"max_gap: {_fmt(report.max_gap)}",
        f"range_ok: {report.range_ok}",
    ]
    path.write_text("\n".join(lines) + "\n")


def _problem(config):
    return SteadyProblem(
        SymbolSpec(config.symbol_family, config.alpha),
        NonlinearitySpec(config.kind, config.p, config.eps),
        Grid(config.N),
        config.M,
    )


def _continuation_config(config):
    return ContinuationConfig(
        s0=config.s0,
        ds=config.ds,
        ds_min=config.ds_min,
        ds_max=config.ds_max,
        crest_margin=config.crest_margin,
        newton_tol=config.newton_tol,
        eps_schedule=tuple(config.eps_schedule),
    )


def _cmd_kernel(config, outdir):
    spec = KernelSpec(config.alpha)
    n = config.kernel_nodes
    xs = np.linspace(-math.pi, math.pi, n + 2)[1:-1]
    xs = xs[xs != 0.0]
    K = kernel_eval_many(spec, xs)
    if 0 < config.alpha < 1:
        g = gamma_coefficient(config.alpha)
        singular = g * np.abs(xs) ** (config.alpha - 1.0)
    else:
        singular = np.zeros_like(xs)
    regular = K - singular
    rows = [
        (float(x), float(k), float(s), float(r))
        for x, k, s, r in zip(xs, K, singular, regular)
    ]
    _write_csv(outdir / "kernel.csv", "x,K_alpha,singular,regular", rows)
    return EXIT_OK


def _cmd_branch(config, outdir):
    problem = _problem(config)
    branch = branch_follow(problem, _continuation_config(config))
    _emit_branch_summary(outdir / "branch_summary.txt", branch, problem)
    if branch.points:
        _emit_wave_csv(outdir / "wave.csv", problem, branch.points[-1])
    return EXIT_OK if branch.terminated_reason == "crest_reached" else EXIT_NUMERICAL


def _cmd_homotopy(config, outdir):
    problem = _problem(config)
    finals, report = eps_homotopy(problem, _continuation_config(config))
    lines = []
    for row in report.get("rows", []):
        lines.append(
            "  ".join(f"{key}: {_fmt(val)}" for key, val in row.items())
        )
    if "failed_at_eps" in report:
        lines.append(f"failed_at_eps: {_fmt(report['failed_at_eps'])}")
        lines.append(f"error: {report['error']}")
    (outdir / "homotopy_summary.txt").write_text("\n".join(lines) + "\n")
    for bp, row in zip(finals, report.get("rows", [])):
        _emit_wave_csv(outdir / f"wave_eps_{row['eps']:g}.csv", _problem(config), bp)
    return EXIT_OK if "failed_at_eps" not in report else EXIT_NUMERICAL


def _cmd_verify_asymptotics(config, outdir):
    problem = _problem(config)
    s_top = min(config.s0, 1e-2)
    report = verify_asymptotics(
        problem, config.k, [s_top / 4.0, s_top / 2.0, s_top], tol=config.newton_tol
    )
    lines = [
        f"{key}: {_fmt(val) if isinstance(val, float) else val}"
        for key, val in report.items()
        if key not in ("speeds", "s_list")
    ]
    (outdir / "asymptotics_report.txt").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_regularity(config, outdir):
    problem = _problem(config)
    branch = branch_follow(problem, _continuation_config(config))
    if branch.terminated_reason != "crest_reached" or not branch.points:
        raise ConvergenceError(
            f"continuation terminated with {branch.terminated_reason}"
        )
    bp = branch.points[-1]
    report = wave_audit(bp, problem)
    _emit_regularity_report(outdir / "regularity_report.txt", report)
    _emit_wave_csv(outdir / "wave.csv", problem, bp)
    return EXIT_OK


def _cmd_audit(config, outdir):
    path = Path(config.input)
    raw = np.loadtxt(path, delimiter=",", skiprows=1)
    if raw.shape[0] != config.N:
        raise ConfigError("input", f"wave file has {raw.shape[0]} rows, N = {config.N}")
    problem = _problem(config)
    values = raw[:, 1]
    series = analyze(
        values, problem.grid, config.M, antisymmetric=config.kind == "sgn"
    )
    mu_minus_phi = raw[:, 2]
    mu = float(values[0] + mu_minus_phi[0])
    # the CSV stores mu_eps only through the gap column; c = (n_eps)'(mu_eps)
    # inverts mu_of_speed exactly
    c = n_eval(problem.nonlinearity, mu, order=1)
    point = make_branch_point(problem, series, c)
    report = wave_audit(point, problem)
    _emit_regularity_report(outdir / "audit_report.txt", report)
    return EXIT_OK


_COMMANDS = {
    "kernel": _cmd_kernel,
    "branch": _cmd_branch,
    "homotopy": _cmd_homotopy,
    "verify-asymptotics": _cmd_verify_asymptotics,
    "regularity": _cmd_regularity,
    "audit": _cmd_audit,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cuspwave",
        description="Periodic cusped-wave laboratory for negative-order dispersion.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", type=str, default=None, help="JSON config file")
    parser.add_argument("--output-dir", type=str, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--symbol-family", type=str, default=None)
    parser.add_argument("--kind", type=str, default=None)
    parser.add_argument("--p", type=float, default=None)
    parser.add_argument("--eps", type=float, default=None)
    parser.add_argument(
        "--eps-schedule", type=str, default=None, help="comma-separated, decreasing"
    )
    parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--M", type=int, default=None)
    parser.add_argument("--N", type=int, default=None)
    parser.add_argument("--s0", type=float, default=None)
    parser.add_argument("--ds", type=float, default=None)
    parser.add_argument("--ds-min", type=float, default=None)
    parser.add_argument("--ds-max", type=float, default=None)
    parser.add_argument("--crest-margin", type=float, default=None)
    parser.add_argument("--newton-tol", type=float, default=None)
    parser.add_argument("--kernel-nodes", type=int, default=None)
    parser.add_argument("--input", type=str, default=None, help="wave CSV for audit")
    return parser


def _load_config(args):
    config = RunConfig(command=args.command)
    if args.config is not None:
        try:
            document = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise IOError(str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from exc
        for key, value in document.items():
            if not hasattr(config, key):
                raise ConfigError(key, "unknown config field")
            setattr(config, key, tuple(value) if key == "eps_schedule" else value)
    overrides = {
        "alpha": args.alpha,
        "symbol_family": args.symbol_family,
        "kind": args.kind,
        "p": args.p,
        "eps": args.eps,
        "k": args.k,
        "M": args.M,
        "N": args.N,
        "s0": args.s0,
        "ds": args.ds,
        "ds_min": args.ds_min,
        "ds_max": args.ds_max,
        "crest_margin": args.crest_margin,
        "newton_tol": args.newton_tol,
        "kernel_nodes": args.kernel_nodes,
        "output_dir": args.output_dir,
        "seed": args.seed,
        "input": args.input,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    if args.eps_schedule is not None:
        try:
            config.eps_schedule = tuple(
                float(tok) for tok in args.eps_schedule.split(",") if tok
            )
        except ValueError as exc:
            raise ConfigError("eps_schedule", str(exc)) from exc
    config.validate()
    return config


def _error_record(stage, exc):
    return json.dumps(
        {
            "error": {
                "stage": stage,
                "type": type(exc).__name__,
                "field": getattr(exc, "field", None),
                "message": str(exc),
            }
        }
    )


def run(config):
    """Execute a validated RunConfig; returns the process exit code."""
    outdir = Path(config.output_dir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(_error_record("io", exc), file=sys.stderr)
        return EXIT_IO
    try:
        return _COMMANDS[config.command](config, outdir)
    except (ConvergenceError, AccuracyError, SingularityError, FloatingPointError) as exc:
        print(_error_record("numerical", exc), file=sys.stderr)
        return EXIT_NUMERICAL
    except ConfigError as exc:
        print(_error_record("config", exc), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(_error_record("io", exc), file=sys.stderr)
        return EXIT_IO


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
    except ConfigError as exc:
        print(_error_record("config", exc), file=sys.stderr)
        return EXIT_CONFIG
    except IOError as exc:
        print(_error_record("io", exc), file=sys.stderr)
        return EXIT_IO
    return run(config)


if __name__ == "__main__":
    sys.exit(main())

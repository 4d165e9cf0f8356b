"""Batch command-line front-end.

Subcommands ``lasso``, ``logistic``, and ``svm`` load a dataset, run the
solver, and optionally write a RunResult JSON document; ``bench`` compares
preconditioned against plain conjugate gradients on a synthetic spectrum.

Exit codes: 0 when the solve converged, 2 when the iteration budget ran
out, 1 on any usage or data error.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .admm import AdmmConfig, AdmmState, ToleranceSchedule, solve
from .datasets import read_csv, read_libsvm
from .errors import NysadmmError, ValidationError
from .linops import SymmetricPsdOperator, kernel_matrix, random_features
from .nystrom import SketchConfig, rand_nystrom_approx
from .pcg import PcgConfig, nystrom_pcg
from .precond import build_preconditioner, empirical_condition_number
from .problems import (
    ElasticNetProblem,
    LogisticProblem,
    SvmProblem,
    elastic_net_spec,
    logistic_spec,
    svm_spec,
)

__all__ = ["RunResult", "main"]


@dataclass
class RunResult:
    """Machine-readable record of one solve; round-trips through JSON
    without loss (floats serialize via shortest round-trip decimals)."""

    command: str
    config: dict
    converged: bool
    stop_reason: str
    iterations: int
    solution: list
    objective: float
    kkt: float | None
    final_primal_residual: float
    final_dual_residual: float
    primal_residual_history: list
    dual_residual_history: list
    pcg_iteration_counts: list
    total_matvecs: int
    sketch_rank: int
    sketch_rank_capped: bool
    label_mapping: str | None
    seed: int
    wall_clock_ms: float

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1; code 2 is reserved for hitting the
    # iteration budget
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(prog="nysadmm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_shared(p, with_data=True):
        if with_data:
            p.add_argument("--data", required=True, help="dataset path")
            p.add_argument(
                "--format", choices=("libsvm", "csv"), default="libsvm",
                help="dataset format (default libsvm)",
            )
            p.add_argument(
                "--label-column", type=int, default=0,
                help="label column for csv input (default 0)",
            )
        p.add_argument(
            "--rho", type=float, default=1.0,
            help="augmented-Lagrangian penalty (default 1.0)",
        )
        p.add_argument(
            "--sketch-size", type=int, default=50,
            help="preconditioner rank, clamped to the dimension (default 50)",
        )
        p.add_argument(
            "--adaptive", action="store_true",
            help="grow the sketch until the preconditioned system is "
            "provably well conditioned",
        )
        p.add_argument(
            "--adaptive-tol", type=float, default=None,
            help="condition-number target for --adaptive (> 1)",
        )
        p.add_argument(
            "--tol-abs", type=float, default=1e-4,
            help="absolute residual tolerance (default 1e-4)",
        )
        p.add_argument(
            "--tol-rel", type=float, default=1e-3,
            help="relative residual tolerance (default 1e-3)",
        )
        p.add_argument(
            "--max-iters", type=int, default=500,
            help="outer iteration budget; exit code 2 when exhausted "
            "(default 500)",
        )
        p.add_argument("--seed", type=int, default=0, help="rng seed (default 0)")
        p.add_argument(
            "--schedule", choices=("geomean", "power"), default="geomean",
            help="inner-solve tolerance schedule (default geomean)",
        )
        p.add_argument(
            "--beta", type=float, default=2.0,
            help="decay exponent for the power schedule (default 2.0)",
        )
        p.add_argument("--output", help="write the result JSON here")

    gamma_help = "l1 penalty weight"
    rf_help = "lift features to this many random cosine features before solving"
    bw_help = "gaussian kernel bandwidth (default 1.0)"

    lasso = sub.add_parser("lasso", help="l1-penalized least squares")
    add_shared(lasso)
    lasso.add_argument("--gamma", type=float, required=True, help=gamma_help)
    lasso.add_argument("--random-features", type=int, default=None, help=rf_help)
    lasso.add_argument("--bandwidth", type=float, default=1.0, help=bw_help)

    logistic = sub.add_parser("logistic", help="l1-penalized logistic regression")
    add_shared(logistic)
    logistic.add_argument("--gamma", type=float, required=True, help=gamma_help)
    logistic.add_argument("--random-features", type=int, default=None, help=rf_help)
    logistic.add_argument("--bandwidth", type=float, default=1.0, help=bw_help)

    svm = sub.add_parser("svm", help="dual kernel support vector machine")
    add_shared(svm)
    svm.add_argument(
        "--svm-c", type=float, required=True, help="box constraint upper bound"
    )
    svm.add_argument("--bandwidth", type=float, default=1.0, help=bw_help)

    bench = sub.add_parser(
        "bench", help="compare preconditioned against plain conjugate gradients"
    )
    add_shared(bench, with_data=False)
    bench.add_argument(
        "--dim", type=int, default=200,
        help="synthetic system dimension (default 200)",
    )
    bench.add_argument(
        "--condition", type=float, default=1e6,
        help="ratio of the top curvature eigenvalue to rho (default 1e6)",
    )
    return parser


def _load_dataset(args):
    if args.format == "csv":
        return read_csv(args.data, label_column=args.label_column)
    return read_libsvm(args.data)


def _map_labels(command, labels):
    values = set(np.unique(labels).tolist())
    if command == "logistic":
        if values <= {0.0, 1.0}:
            return labels, None
        if values <= {-1.0, 1.0}:
            return (labels + 1.0) / 2.0, "pm1_to_01"
        raise ValidationError(f"logistic labels must be 0/1 or -1/+1, got {sorted(values)}")
    if command == "svm":
        if values <= {-1.0, 1.0} and len(values) == 2:
            return labels, None
        if values <= {0.0, 1.0} and len(values) == 2:
            return 2.0 * labels - 1.0, "01_to_pm1"
        raise ValidationError(f"svm labels must be -1/+1 or 0/1, got {sorted(values)}")
    return labels, None


def _admm_config(args, dim):
    kind = "geometric_mean" if args.schedule == "geomean" else "power_decay"
    schedule = ToleranceSchedule(kind=kind, beta=args.beta)
    sketch = min(args.sketch_size, dim)
    kwargs = dict(
        rho=args.rho,
        eps_abs=args.tol_abs,
        eps_rel=args.tol_rel,
        max_admm_iters=args.max_iters,
        sketch_size=sketch,
        adaptive=args.adaptive,
        seed=args.seed,
        tolerance_schedule=schedule,
    )
    if args.adaptive_tol is not None:
        kwargs["adaptive_tol"] = args.adaptive_tol
    return AdmmConfig(**kwargs)


def _config_echo(args, cfg):
    echo = {
        "rho": cfg.rho,
        "sketch_size": cfg.sketch_size,
        "adaptive": cfg.adaptive,
        "adaptive_tol": cfg.adaptive_tol,
        "tol_abs": cfg.eps_abs,
        "tol_rel": cfg.eps_rel,
        "max_iters": cfg.max_admm_iters,
        "schedule": args.schedule,
        "beta": args.beta,
    }
    for name in ("data", "format", "gamma", "svm_c", "random_features", "bandwidth"):
        if hasattr(args, name):
            echo[name] = getattr(args, name)
    return echo


def _run_solver(args):
    dataset = _load_dataset(args)
    features = dataset.features
    labels, mapping = _map_labels(args.command, dataset.labels)
    if getattr(args, "random_features", None) is not None:
        features = random_features(
            features, args.random_features, args.bandwidth, args.seed
        )
    if args.command == "lasso":
        spec = elastic_net_spec(ElasticNetProblem.lasso(features, labels, args.gamma))
    elif args.command == "logistic":
        spec = logistic_spec(LogisticProblem(features, labels, args.gamma))
    else:
        kernel = kernel_matrix(features, bandwidth=args.bandwidth)
        spec = svm_spec(SvmProblem(kernel=kernel, labels=labels, c=args.svm_c))
    cfg = _admm_config(args, spec.dim)
    report = solve(spec, cfg)
    kkt = None
    if spec.kkt_metric is not None:
        kkt = float(spec.kkt_metric(report.solution))
    result = RunResult(
        command=args.command,
        config=_config_echo(args, cfg),
        converged=bool(report.converged),
        stop_reason=report.stop_reason,
        iterations=report.iterations,
        solution=[float(v) for v in report.solution],
        objective=float(spec.objective(report.solution)),
        kkt=kkt,
        final_primal_residual=float(report.final_primal_residual),
        final_dual_residual=float(report.final_dual_residual),
        primal_residual_history=[float(v) for v in report.primal_residual_history],
        dual_residual_history=[float(v) for v in report.dual_residual_history],
        pcg_iteration_counts=[int(v) for v in report.pcg_iteration_counts],
        total_matvecs=int(report.total_matvecs),
        sketch_rank=int(report.sketch_rank),
        sketch_rank_capped=bool(report.sketch_rank_capped),
        label_mapping=mapping,
        seed=args.seed,
        wall_clock_ms=report.wall_time_s * 1000.0,
    )
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(result.to_json())
            fh.write("\n")
    status = "converged" if report.converged else "stopped at iteration budget"
    print(
        f"{args.command}: {status} after {report.iterations} iterations, "
        f"objective {result.objective:.6g}"
    )
    return 0 if report.converged else 2


def _run_bench(args):
    if args.dim < 2 or args.dim < args.sketch_size:
        raise ValidationError("bench needs dim >= 2 and dim >= sketch-size")
    if args.condition <= 1:
        raise ValidationError("condition must exceed 1")
    rng = np.random.default_rng(args.seed)
    # anchor the spectrum at rho so the shifted system has condition number
    # about args.condition and the tail falls below the shift
    spectrum = args.rho * np.geomspace(args.condition, 1e-6, args.dim)
    op = SymmetricPsdOperator(args.dim, lambda v: spectrum * v)
    rhs = rng.standard_normal(args.dim)
    tol = float(1e-8 * np.linalg.norm(rhs))
    x0 = np.zeros(args.dim)
    pcg_cfg = PcgConfig(tol=tol, max_iters=10 * args.dim)
    approx = rand_nystrom_approx(op, SketchConfig(s=args.sketch_size, seed=args.seed))
    precond = build_preconditioner(approx, args.rho)
    with_pre = nystrom_pcg(op, args.rho, rhs, x0, precond, pcg_cfg)
    plain = nystrom_pcg(op, args.rho, rhs, x0, None, pcg_cfg)
    payload = {
        "command": "bench",
        "dim": args.dim,
        "condition": args.condition,
        "rho": args.rho,
        "sketch_size": args.sketch_size,
        "seed": args.seed,
        "preconditioned_iterations": int(with_pre.iterations),
        "preconditioned_converged": bool(with_pre.converged),
        "plain_iterations": int(plain.iterations),
        "plain_converged": bool(plain.converged),
        "empirical_condition_number": float(empirical_condition_number(precond)),
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
    print(text)
    return 0


def _thread_limiter():
    raw = os.environ.get("NYSADMM_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        return None
    if n < 1:
        return None
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return None
    return threadpool_limits(limits=n)


def _check_combinations(args):
    if args.command in ("lasso", "logistic"):
        if args.gamma < 0:
            raise _UsageError("--gamma must be nonnegative")
    if args.command == "svm" and args.svm_c <= 0:
        raise _UsageError("--svm-c must be positive")
    if getattr(args, "random_features", None) is not None and args.random_features < 1:
        raise _UsageError("--random-features must be >= 1")
    if getattr(args, "bandwidth", 1.0) <= 0:
        raise _UsageError("--bandwidth must be positive")


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        _check_combinations(args)
        limiter = _thread_limiter()
        try:
            if args.command == "bench":
                return _run_bench(args)
            return _run_solver(args)
        finally:
            if limiter is not None:
                limiter.__exit__(None, None, None)
    except _UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"nysadmm: error: {err}", file=sys.stderr)
        return 1
    except (NysadmmError, OSError) as err:
        print(f"nysadmm: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

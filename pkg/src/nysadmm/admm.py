"""Inexact ADMM driver with Nystrom-preconditioned CG subproblem solves.

Each iteration solves (H + rho I) x = r for the current right-hand side to
a scheduled tolerance, applies the problem's closed-form z-step, and takes
the scaled dual update u <- u + x - z. The operator H is sketched once up
front for constant-Hessian losses and refreshed on a configurable interval
for losses whose curvature moves with the iterate.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalBreakdownError, ValidationError
from .nystrom import AdaptiveConfig, SketchConfig, adaptive_nystrom_approx, rand_nystrom_approx
from .linops import SymmetricPsdOperator
from .pcg import PcgConfig, nystrom_pcg, theory_pcg_cap
from .precond import build_preconditioner

__all__ = [
    "ToleranceSchedule",
    "AdmmConfig",
    "AdmmState",
    "SubproblemSystem",
    "ProblemSpec",
    "IterationInfo",
    "SolveReport",
    "residuals",
    "stopping_check",
    "next_subproblem_tol",
    "theory_pcg_cap",
    "solve",
]

TOL_FLOOR = 1e-12

# coarse-tolerance regime default for the adaptive sketch threshold
DEFAULT_ADAPTIVE_TOL = 1.0 + 100.0 / 42.0


@dataclass(frozen=True)
class ToleranceSchedule:
    """Subproblem tolerance schedule.

    ``geometric_mean`` sets the next tolerance to sqrt(r_p * r_d) of the
    previous residuals (floored at 1e-12, capped at the initial tolerance).
    ``power_decay`` uses ||rhs|| / k^beta, summable for beta >= 2.
    """

    kind: str = "geometric_mean"
    beta: float = 2.0

    def __post_init__(self):
        if self.kind not in ("geometric_mean", "power_decay"):
            raise ValidationError(f"unknown tolerance schedule {self.kind!r}")
        if self.beta <= 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 1.0
    eps_abs: float = 1e-4
    eps_rel: float = 1e-3
    max_admm_iters: int = 500
    sketch_size: int = 50
    adaptive: bool = False
    adaptive_tol: float = DEFAULT_ADAPTIVE_TOL
    seed: int = 0
    # None defers to the problem's own default (0 = never refresh)
    hessian_refresh_interval: int | None = None
    tolerance_schedule: ToleranceSchedule = field(default_factory=ToleranceSchedule)
    pcg_max_iters: int = 500
    use_theory_cap: bool = False
    # optional alternative stopping rule: max coefficient change relative
    # to the largest coefficient of the previous iterate
    rel_change_tol: float | None = None

    def __post_init__(self):
        if self.rho <= 0:
            raise ValidationError(f"rho must be positive, got {self.rho}")
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValidationError("eps_abs and eps_rel must be positive")
        if self.max_admm_iters < 1:
            raise ValidationError("max_admm_iters must be >= 1")
        if self.sketch_size < 1:
            raise ValidationError("sketch_size must be >= 1")
        if self.adaptive_tol <= 1.0:
            raise ValidationError(f"adaptive_tol must exceed 1, got {self.adaptive_tol}")
        if self.hessian_refresh_interval is not None and self.hessian_refresh_interval < 0:
            raise ValidationError("hessian_refresh_interval must be >= 0")
        if self.pcg_max_iters < 1:
            raise ValidationError("pcg_max_iters must be >= 1")
        if self.rel_change_tol is not None and self.rel_change_tol <= 0:
            raise ValidationError("rel_change_tol must be positive")


@dataclass
class AdmmState:
    """Iterates plus per-iteration histories; histories grow once per sweep."""

    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    rho: float
    iteration: int = 0
    primal_residual_history: list = field(default_factory=list)
    dual_residual_history: list = field(default_factory=list)
    subproblem_tol_history: list = field(default_factory=list)
    pcg_iteration_counts: list = field(default_factory=list)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.z = np.asarray(self.z, dtype=np.float64)
        self.u = np.asarray(self.u, dtype=np.float64)
        if not self.x.size == self.z.size == self.u.size:
            raise ValidationError(
                f"x, z, u must share one dimension, got sizes "
                f"{self.x.size}, {self.z.size}, {self.u.size}"
            )

    @classmethod
    def zeros(cls, dim, rho):
        return cls(x=np.zeros(dim), z=np.zeros(dim), u=np.zeros(dim), rho=rho)


@dataclass
class SubproblemSystem:
    """The linear system (operator + rho I) x = rhs solved each sweep."""

    operator: SymmetricPsdOperator
    rho: float
    rhs: np.ndarray

    def __post_init__(self):
        self.rhs = np.asarray(self.rhs, dtype=np.float64)
        if self.rhs.ndim != 1 or self.rhs.size != self.operator.dim:
            raise ValidationError(
                f"rhs has size {self.rhs.size}, operator dimension is {self.operator.dim}"
            )
        if not np.isfinite(self.rhs).all():
            raise ValidationError("rhs contains non-finite entries")


@dataclass
class ProblemSpec:
    """Hooks a problem front-end hands to the driver.

    build_operator maps the current x to the smooth-curvature operator;
    build_rhs maps (x, z, u, rho) to the linear-system right-hand side;
    z_step maps (x + u, rho) to the new z; objective evaluates the full
    composite objective; kkt_metric optionally measures solution quality.
    """

    dim: int
    build_operator: object
    build_rhs: object
    z_step: object
    objective: object
    kkt_metric: object = None
    hessian_refresh_interval: int = 0
    name: str = ""


@dataclass
class IterationInfo:
    """Snapshot passed to a solve callback after each completed sweep."""

    iteration: int
    system: SubproblemSystem
    eps_k: float
    pcg_report: object
    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    x_prev: np.ndarray
    z_prev: np.ndarray
    u_prev: np.ndarray
    r_p: float
    r_d: float


@dataclass
class SolveReport:
    solution: np.ndarray
    x: np.ndarray
    u: np.ndarray
    iterations: int
    converged: bool
    stop_reason: str
    final_primal_residual: float
    final_dual_residual: float
    primal_residual_history: list
    dual_residual_history: list
    subproblem_tol_history: list
    pcg_iteration_counts: list
    total_matvecs: int
    sketch_matvecs: int
    sketch_rank: int
    sketch_rank_capped: bool
    wall_time_s: float


def residuals(state, z_prev):
    """Primal and dual residual norms after an iteration."""
    z_prev = np.asarray(z_prev, dtype=np.float64)
    if z_prev.size != state.z.size:
        raise ValidationError("z_prev dimension mismatch")
    r_p = float(np.linalg.norm(state.x - state.z))
    r_d = float(np.linalg.norm(state.rho * (z_prev - state.z)))
    return r_p, r_d


def stopping_check(r_p, r_d, state, cfg):
    """Joint absolute/relative residual test."""
    thr_p = cfg.eps_abs + cfg.eps_rel * max(
        np.linalg.norm(state.x), np.linalg.norm(state.z)
    )
    thr_d = cfg.eps_abs + cfg.eps_rel * np.linalg.norm(state.rho * state.u)
    return bool(r_p <= thr_p and r_d <= thr_d)


def next_subproblem_tol(r_p, r_d, schedule, k, rhs_norm, eps0=None):
    """Tolerance for the k-th subproblem from the previous residuals.

    ``eps0`` caps the geometric-mean schedule at the initial tolerance when
    known; the power-decay schedule ignores it.
    """
    if r_p < 0 or r_d < 0:
        raise ValidationError("residuals must be nonnegative")
    if schedule.kind == "power_decay":
        if k < 1:
            raise ValidationError("power_decay needs iteration index k >= 1")
        return rhs_norm / float(k) ** schedule.beta
    val = max(math.sqrt(r_p * r_d), TOL_FLOOR)
    if eps0 is not None:
        val = min(val, eps0)
    return val


def _counting(op, counter):
    def matvec(v):
        counter["n"] += 1
        return op.matvec(v)

    return SymmetricPsdOperator(op.dim, matvec)


def solve(problem, cfg, initial=None, callback=None):
    """Run inexact ADMM on a ProblemSpec.

    Builds the curvature operator at the starting point, sketches it (at
    fixed rank, or adaptively when cfg.adaptive), and iterates subproblem
    solve / z-step / dual update until both residual criteria hold or the
    iteration budget runs out. Non-convergence is reported, not raised.
    The reported solution is the z iterate, which the z-step keeps feasible
    (SVM) or sparse (l1 penalties).

    Raises:
        NumericalBreakdownError: a subproblem iterate went non-finite; the
            ADMM iteration index is attached.
        ValidationError: malformed problem or config.
    """
    d = problem.dim
    if d < 1:
        raise ValidationError("problem dimension must be >= 1")
    if d < cfg.sketch_size:
        raise ValidationError(
            f"sketch_size {cfg.sketch_size} exceeds problem dimension {d}"
        )
    rho = cfg.rho
    if initial is None:
        state = AdmmState.zeros(d, rho)
    else:
        for name, vec in (("x", initial.x), ("z", initial.z), ("u", initial.u)):
            if np.asarray(vec).size != d:
                raise ValidationError(f"initial state {name} has wrong dimension")
        state = AdmmState(
            x=np.array(initial.x, dtype=np.float64),
            z=np.array(initial.z, dtype=np.float64),
            u=np.array(initial.u, dtype=np.float64),
            rho=rho,
        )

    refresh = problem.hessian_refresh_interval
    if cfg.hessian_refresh_interval is not None:
        refresh = cfg.hessian_refresh_interval

    counter = {"n": 0}
    sketch_stats = {"matvecs": 0}

    def build(x_point, sketch_seed):
        op = _counting(problem.build_operator(x_point), counter)
        if op.dim != d:
            raise ValidationError(
                f"build_operator returned dimension {op.dim}, expected {d}"
            )
        before = counter["n"]
        if cfg.adaptive:
            acfg = AdaptiveConfig(
                initial_rank=cfg.sketch_size,
                max_rank=min(10 * cfg.sketch_size, d),
                rho=rho,
                tol=cfg.adaptive_tol,
                seed=sketch_seed,
            )
            approx = adaptive_nystrom_approx(op, acfg)
        else:
            approx = rand_nystrom_approx(op, SketchConfig(s=cfg.sketch_size, seed=sketch_seed))
        sketch_stats["matvecs"] += counter["n"] - before
        return op, approx, build_preconditioner(approx, rho)

    t_start = time.perf_counter()
    op, approx, precond = build(state.x, cfg.seed)

    eps0 = None
    r_p = r_d = math.inf
    converged = False
    stop_reason = "max_iters"
    running_rhs_bound = 0.0

    for k in range(cfg.max_admm_iters):
        if k > 0 and refresh > 0 and k % refresh == 0:
            op, approx, precond = build(state.x, cfg.seed + k)
        rhs = problem.build_rhs(state.x, state.z, state.u, rho)
        system = SubproblemSystem(operator=op, rho=rho, rhs=rhs)
        rhs_norm = float(np.linalg.norm(system.rhs))
        running_rhs_bound = max(running_rhs_bound, rhs_norm)
        if k == 0:
            eps0 = 1e-2 * (1.0 + rhs_norm)
            eps_k = eps0
        else:
            eps_k = next_subproblem_tol(
                r_p, r_d, cfg.tolerance_schedule, k, rhs_norm, eps0
            )
        cap = None
        if cfg.use_theory_cap:
            cap = theory_pcg_cap(max(running_rhs_bound, TOL_FLOOR), eps_k, rho)
        pcg_cfg = PcgConfig(
            tol=eps_k * rho, max_iters=cfg.pcg_max_iters, theory_cap=cap
        )
        try:
            report = nystrom_pcg(op, rho, system.rhs, state.x, precond, pcg_cfg)
        except NumericalBreakdownError as err:
            err.admm_iteration = k
            raise
        x_prev, z_prev, u_prev = state.x, state.z, state.u
        x_new = report.solution
        z_new = problem.z_step(x_new + state.u, rho)
        u_new = u_prev + (x_new - z_new)

        state.x, state.z, state.u = x_new, z_new, u_new
        state.iteration = k + 1
        r_p, r_d = residuals(state, z_prev)
        state.primal_residual_history.append(r_p)
        state.dual_residual_history.append(r_d)
        state.subproblem_tol_history.append(eps_k)
        state.pcg_iteration_counts.append(report.iterations)

        if callback is not None:
            callback(
                IterationInfo(
                    iteration=k,
                    system=system,
                    eps_k=eps_k,
                    pcg_report=report,
                    x=x_new,
                    z=z_new,
                    u=u_new,
                    x_prev=x_prev,
                    z_prev=z_prev,
                    u_prev=u_prev,
                    r_p=r_p,
                    r_d=r_d,
                )
            )
        if stopping_check(r_p, r_d, state, cfg):
            converged = True
            stop_reason = "residuals"
            break
        if cfg.rel_change_tol is not None:
            scale = float(np.linalg.norm(x_prev, np.inf))
            if scale > 0 and float(np.linalg.norm(x_new - x_prev, np.inf)) <= cfg.rel_change_tol * scale:
                converged = True
                stop_reason = "rel_change"
                break

    wall = time.perf_counter() - t_start
    return SolveReport(
        solution=state.z.copy(),
        x=state.x.copy(),
        u=state.u.copy(),
        iterations=state.iteration,
        converged=converged,
        stop_reason=stop_reason,
        final_primal_residual=r_p,
        final_dual_residual=r_d,
        primal_residual_history=list(state.primal_residual_history),
        dual_residual_history=list(state.dual_residual_history),
        subproblem_tol_history=list(state.subproblem_tol_history),
        pcg_iteration_counts=list(state.pcg_iteration_counts),
        total_matvecs=counter["n"],
        sketch_matvecs=sketch_stats["matvecs"],
        sketch_rank=approx.rank,
        sketch_rank_capped=approx.rank_capped,
        wall_time_s=wall,
    )

"""Manufactured-solution benchmarks, true errors, rates and effectivities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .accumulation import (AccumulatorState, DEFAULT_PSET, STRATEGIES,
                           total_estimate)
from .estimators import ConstantsConfig, EstimatorEngine
from .linalg import CoefficientField
from .mesh import DofMap, build_mesh, element_l2_error, interpolate_nodal
from .operators import DiscreteOperatorSet
from .timestepping import SchemeKind, Trajectory, run


@dataclass
class BenchmarkProblem:
    """Exact solution, forcing and data of one manufactured problem."""

    name: str
    u: Callable          # u(t, x, y)
    f: Callable          # f(t, x, y)
    u0: Callable         # u0(x, y)
    final_time: float
    coeff: CoefficientField


def sinusoidal_benchmark() -> BenchmarkProblem:
    """u = sin(pi t) sin(pi x) sin(pi y) on (0,1)^2, T = 15, A = I, mu = 0."""
    pi = math.pi

    def u(t, x, y):
        return np.sin(pi * t) * np.sin(pi * x) * np.sin(pi * y)

    def f(t, x, y):
        return (pi * np.cos(pi * t) + 2.0 * pi ** 2 * np.sin(pi * t)) \
            * np.sin(pi * x) * np.sin(pi * y)

    return BenchmarkProblem("sinusoidal", u, f, lambda x, y: u(0.0, x, y),
                            15.0, CoefficientField.identity())


_TIME_POLY = np.polynomial.Polynomial.fromroots([0.0, 2.0, 4.0, 6.0, 8.0, 10.0])
_TIME_POLY_D = _TIME_POLY.deriv()


def polynomial_benchmark(printed_forcing: bool = False) -> BenchmarkProblem:
    """u = x(x-1)y(y-1)/250 * t(t-2)(t-4)(t-6)(t-8)(t-10), T = 15.

    The default forcing is f = u_t - lap u computed from u; with
    printed_forcing=True the published right hand side (which omits the u_t
    contribution) is used verbatim.
    """

    def space(x, y):
        return x * (x - 1.0) * y * (y - 1.0) / 250.0

    def lap_space(x, y):
        return (x * (x - 1.0) + y * (y - 1.0)) / 125.0

    def u(t, x, y):
        return space(x, y) * _TIME_POLY(t)

    if printed_forcing:
        def f(t, x, y):
            return lap_space(x, y) * _TIME_POLY(t)
    else:
        def f(t, x, y):
            return space(x, y) * _TIME_POLY_D(t) - lap_space(x, y) * _TIME_POLY(t)

    name = "polynomial_printed" if printed_forcing else "polynomial"
    return BenchmarkProblem(name, u, f, lambda x, y: u(0.0, x, y),
                            15.0, CoefficientField.identity())


def zero_benchmark() -> BenchmarkProblem:
    zero3 = lambda t, x, y: np.zeros_like(np.asarray(x, dtype=float))
    return BenchmarkProblem("zero", zero3, zero3,
                            lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
                            15.0, CoefficientField.identity())


BENCHMARKS = {"sinusoidal": sinusoidal_benchmark,
              "polynomial": polynomial_benchmark,
              "zero": zero_benchmark}


def convergence_rate(F_i: float, F_im1: float, h_i: float, h_im1: float) -> float:
    """rate = (log F_i - log F_{i-1}) / (log h_i - log h_{i-1})."""
    if min(F_i, F_im1, h_i, h_im1) <= 0:
        raise ValueError("convergence_rate needs positive inputs")
    return (math.log(F_i) - math.log(F_im1)) / (math.log(h_i) - math.log(h_im1))


def fit_loglog_slope(t: np.ndarray, y: np.ndarray,
                     window: tuple[float, float] = (5.0, 15.0)) -> float:
    """Least-squares slope of log y vs log t over the time window."""
    t, y = np.asarray(t), np.asarray(y)
    mask = (t >= window[0]) & (t <= window[1]) & np.isfinite(y) & (y > 0)
    if mask.sum() < 2:
        raise ValueError("not enough points in the slope window")
    return float(np.polyfit(np.log(t[mask]), np.log(y[mask]), 1)[0])


def true_error_running_max(traj: Trajectory, u_exact: Callable) -> tuple[np.ndarray, np.ndarray]:
    """Running max of || u - U ||_{L2} sampled at nodes and midpoints."""
    mesh = traj.ops.mesh
    times, errs = [], []
    best = element_l2_error(mesh, traj.states[0],
                            lambda x, y: u_exact(traj.times[0], x, y))
    times.append(traj.times[0]); errs.append(best)
    for n in range(1, traj.n_steps + 1):
        for t in (0.5 * (traj.times[n - 1] + traj.times[n]), traj.times[n]):
            v = traj.linear_interpolant(n, t)
            e = element_l2_error(mesh, v, lambda x, y: u_exact(t, x, y))
            best = max(best, e)
            times.append(t); errs.append(best)
    return np.asarray(times), np.asarray(errs)


@dataclass
class RunRecord:
    """Step-end time series of one (benchmark, scheme, level) run."""

    level: int
    M: int
    h: float
    tau: float
    n_steps: int
    init_error: float
    times: np.ndarray
    err: np.ndarray
    est: dict
    term_min: dict
    term_argmin: dict
    elliptic_max: np.ndarray
    time_recon_max: np.ndarray
    residual_max: float

    def eff(self, strategy: str) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.err > 0, self.est[strategy] / self.err, np.nan)

    @property
    def final_error(self) -> float:
        return float(self.err[-1])


def effectivity_series(record: RunRecord, strategy: str) -> np.ndarray:
    return record.eff(strategy)


def run_level(problem: BenchmarkProblem, scheme: SchemeKind, level: int,
              tau_rule: str, constants: ConstantsConfig | None = None,
              pset: tuple[float, ...] = DEFAULT_PSET, samples_per_step: int = 3,
              ds_pairing: str = "verbatim", T: float | None = None) -> RunRecord:
    """Solve one refinement level and stream the estimator along the march."""
    constants = constants or ConstantsConfig()
    mesh = build_mesh(2 ** level)
    dofmap = DofMap(mesh)
    ops = DiscreteOperatorSet(mesh, dofmap, problem.coeff)
    if T is None:
        T = problem.final_time

    u0_vec = dofmap.zero_boundary(interpolate_nodal(mesh, problem.u0))
    init_error = element_l2_error(mesh, u0_vec, problem.u0)
    state = AccumulatorState(scheme=scheme, pset=pset, init_error=init_error)

    rows_t, rows_err = [], []
    est_rows = {s: [] for s in STRATEGIES}
    term_rows: dict[str, list] = {}
    argmin_rows: dict[str, list] = {}
    ell_rows, rec_rows = [], []
    ctx = {"engine": None, "err_max": init_error, "res_max": 0.0}

    def on_step(traj: Trajectory, n: int) -> None:
        if ctx["engine"] is None:
            ctx["engine"] = EstimatorEngine(traj, constants, samples_per_step,
                                            ds_pairing)
        engine: EstimatorEngine = ctx["engine"]
        est = engine.step_estimate(n)
        state.update(est, traj.tau)
        ctx["res_max"] = max(ctx["res_max"], traj.scheme_residual(n))

        t_n = traj.times[n]
        for t in (0.5 * (traj.times[n - 1] + t_n), t_n):
            v = traj.linear_interpolant(n, t)
            e = element_l2_error(traj.ops.mesh, v, lambda x, y: problem.u(t, x, y))
            ctx["err_max"] = max(ctx["err_max"], e)

        report = total_estimate(state, constants)
        rows_t.append(t_n)
        rows_err.append(ctx["err_max"])
        for s in STRATEGIES:
            est_rows[s].append(report.totals[s])
        for name, val in report.term_min.items():
            term_rows.setdefault(name, []).append(val)
            argmin_rows.setdefault(name, []).append(report.term_argmin[name])
        ell_rows.append(report.elliptic_max)
        rec_rows.append(report.time_recon_max)
        engine.drop_before(n)

    traj = run(problem, scheme, ops, tau_rule, T=T, on_step=on_step)
    return RunRecord(level=level, M=mesh.cells_per_side, h=mesh.h, tau=traj.tau,
                     n_steps=traj.n_steps, init_error=init_error,
                     times=np.asarray(rows_t), err=np.asarray(rows_err),
                     est={s: np.asarray(v) for s, v in est_rows.items()},
                     term_min={k: np.asarray(v) for k, v in term_rows.items()},
                     term_argmin={k: np.asarray(v) for k, v in argmin_rows.items()},
                     elliptic_max=np.asarray(ell_rows),
                     time_recon_max=np.asarray(rec_rows),
                     residual_max=ctx["res_max"])

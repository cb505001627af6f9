"""Backward Euler and Crank-Nicolson marchers with per-step operator caches."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .linalg import cg_solve
from .operators import DiscreteOperatorSet, assemble_load, discrete_time_derivative


class SchemeKind(enum.Enum):
    BACKWARD_EULER = "be"
    CRANK_NICOLSON = "cn"


def resolve_tau(tau_rule: str, h: float) -> float:
    """Target time step from a rule in {hsq, h, hroot, fixed:<v>}."""
    if tau_rule == "hsq":
        return h * h
    if tau_rule == "h":
        return h
    if tau_rule == "hroot":
        return math.sqrt(h)
    if tau_rule.startswith("fixed:") or tau_rule.startswith("fixed="):
        return float(tau_rule[6:])
    raise ValueError(f"unknown tau rule {tau_rule!r}")


def snap_steps(T: float, tau_target: float) -> int:
    """N = ceil(T / tau_target), guarded against float fuzz, so N*tau = T."""
    if T <= 0 or tau_target <= 0:
        raise ValueError("T and tau must be positive")
    ratio = T / tau_target
    return max(1, int(math.ceil(ratio - 1e-9 * max(1.0, ratio))))


@dataclass
class StepCache:
    """Per-node and per-step projected data reused by the estimators."""

    proj_f: np.ndarray            # P f^n
    proj_f_bc: np.ndarray         # P0 f^n
    lap_u: np.ndarray             # discrete Laplacian of U^n
    proj_f_bc_mid: np.ndarray | None = None   # P0 f^{n-1/2} (CN)
    time_jerk: np.ndarray | None = None       # w^n = dbar(lap U^n + P0 f^n) (CN)
    lap_time_jerk: np.ndarray | None = None   # discrete Laplacian of w^n (CN)


class Trajectory:
    """States U^0..U^N on the uniform grid t^n = n tau, with lazy caches."""

    def __init__(self, ops: DiscreteOperatorSet, scheme: SchemeKind, f,
                 times: np.ndarray, states: list[np.ndarray]):
        self.ops = ops
        self.scheme = scheme
        self.f = f
        self.times = times
        self.states = states
        self.tau = float(times[1] - times[0]) if len(times) > 1 else 0.0
        self._caches: dict[int, StepCache] = {}

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    def hat_weights(self, n: int, t: float) -> tuple[float, float]:
        """(ell^n(t), ell^{n-1}(t)) for t inside step n."""
        s = (t - self.times[n - 1]) / self.tau
        return s, 1.0 - s

    def linear_interpolant(self, n: int, t: float) -> np.ndarray:
        ln, lp = self.hat_weights(n, t)
        return ln * self.states[n] + lp * self.states[n - 1]

    def cache_for(self, n: int) -> StepCache:
        """Projections and discrete Laplacian at node n (built on demand);
        the neighbouring node's cache warm-starts the solves."""
        if n not in self._caches:
            ops, t = self.ops, self.times[n]
            near = self._caches.get(n - 1) or self._caches.get(n + 1)
            f_n = lambda x, y: self.f(t, x, y)
            pf = ops.l2_project(f_n, x0=None if near is None else near.proj_f)
            p0f = ops.l2_project_bc(f_n, x0=None if near is None else near.proj_f_bc)
            lap = ops.discrete_laplacian(self.states[n],
                                         x0=None if near is None else near.lap_u)
            self._caches[n] = StepCache(proj_f=pf, proj_f_bc=p0f, lap_u=lap)
        return self._caches[n]

    def cn_cache_for(self, n: int) -> StepCache:
        """Extends cache_for(n) with midpoint data and the jerk w^n (n >= 1)."""
        c = self.cache_for(n)
        if c.time_jerk is None:
            ops = self.ops
            t_mid = 0.5 * (self.times[n] + self.times[n - 1])
            c.proj_f_bc_mid = ops.l2_project_bc(lambda x, y: self.f(t_mid, x, y))
            prev = self.cache_for(n - 1)
            w = discrete_time_derivative(c.lap_u + c.proj_f_bc,
                                         prev.lap_u + prev.proj_f_bc, self.tau)
            c.time_jerk = w
            c.lap_time_jerk = ops.discrete_laplacian(w)
        return c

    def drop_caches_before(self, n: int) -> None:
        for k in [k for k in self._caches if k < n]:
            del self._caches[k]

    def scheme_residual(self, n: int) -> float:
        """M-norm of the pointwise-form residual at step n.

        Evaluated through the identity r = M0^{-1}(M0 dbar U + K0 U - b),
        which keeps the solve error relative to the (tiny) defect rather
        than to the magnitudes of the projected data.
        """
        ops = self.ops
        idx = ops.dofmap.interior
        dbar = discrete_time_derivative(self.states[n], self.states[n - 1], self.tau)
        if self.scheme is SchemeKind.BACKWARD_EULER:
            t_load = self.times[n]
            stiff_part = ops.stiffness_int @ self.states[n][idx]
        else:
            t_load = self.times[n] - 0.5 * self.tau
            stiff_part = ops.stiffness_int @ (
                0.5 * (self.states[n] + self.states[n - 1])[idx])
        from .operators import assemble_load
        b = assemble_load(ops.mesh, lambda x, y: self.f(t_load, x, y))[idx]
        defect = ops.mass_int @ dbar[idx] + stiff_part - b
        r_int = cg_solve(ops.mass_int, defect, tol=ops.tol,
                         diag=ops.mass_int.diagonal())
        return float(np.sqrt(max(r_int @ (ops.mass_int @ r_int), 0.0)))


class _Marcher:
    """Holds the factor-free step systems; interior dofs only."""

    def __init__(self, ops: DiscreteOperatorSet, scheme: SchemeKind, tau: float):
        self.ops = ops
        self.scheme = scheme
        self.tau = tau
        M0, K0 = ops.mass_int, ops.stiffness_int
        if scheme is SchemeKind.BACKWARD_EULER:
            self.lhs = (M0 + tau * K0).tocsr()
            self.rhs_mat = M0
        else:
            self.lhs = (M0 + 0.5 * tau * K0).tocsr()
            self.rhs_mat = (M0 - 0.5 * tau * K0).tocsr()
        self.lhs_diag = self.lhs.diagonal()

    def step(self, u_prev_int: np.ndarray, b_int: np.ndarray) -> np.ndarray:
        rhs = self.rhs_mat @ u_prev_int + self.tau * b_int
        u = cg_solve(self.lhs, rhs, tol=self.ops.tol, x0=u_prev_int,
                     diag=self.lhs_diag)
        # one refinement pass pushes the step defect to the rounding floor,
        # which the pointwise-form residual (amplified by 1/tau) relies on
        d = rhs - self.lhs @ u
        if np.any(d):
            u = u + cg_solve(self.lhs, d, tol=1e-4, diag=self.lhs_diag)
        return u


def step_backward_euler(ops: DiscreteOperatorSet, u_prev: np.ndarray, t_curr: float,
                        tau: float, f) -> np.ndarray:
    """One BE step: (M0 + tau K0) U = M0 U_prev + tau (f^n, phi)."""
    m = _Marcher(ops, SchemeKind.BACKWARD_EULER, tau)
    b = assemble_load(ops.mesh, lambda x, y: f(t_curr, x, y))[ops.dofmap.interior]
    return ops.dofmap.embed(m.step(u_prev[ops.dofmap.interior], b))


def step_crank_nicolson(ops: DiscreteOperatorSet, u_prev: np.ndarray, t_curr: float,
                        tau: float, f) -> np.ndarray:
    """One CN step with the midpoint load f^{n-1/2}."""
    m = _Marcher(ops, SchemeKind.CRANK_NICOLSON, tau)
    t_mid = t_curr - 0.5 * tau
    b = assemble_load(ops.mesh, lambda x, y: f(t_mid, x, y))[ops.dofmap.interior]
    return ops.dofmap.embed(m.step(u_prev[ops.dofmap.interior], b))


def run(problem, scheme: SchemeKind, ops: DiscreteOperatorSet, tau_rule: str,
        T: float | None = None, on_step=None) -> Trajectory:
    """March the scheme to time T; U^0 is the vertex interpolant of u0.

    on_step(traj, n) is invoked after each step, before old caches are
    dropped, so estimation can stream without retaining per-step caches.
    """
    from .mesh import interpolate_nodal

    if T is None:
        T = problem.final_time
    tau_target = resolve_tau(tau_rule, ops.mesh.h)
    N = snap_steps(T, tau_target)
    tau = T / N
    times = np.linspace(0.0, T, N + 1)

    u0 = ops.dofmap.zero_boundary(interpolate_nodal(ops.mesh, problem.u0))
    traj = Trajectory(ops, scheme, problem.f, times, [u0])
    traj.tau = tau
    marcher = _Marcher(ops, scheme, tau)
    idx = ops.dofmap.interior
    for n in range(1, N + 1):
        t = times[n]
        t_load = t if scheme is SchemeKind.BACKWARD_EULER else t - 0.5 * tau
        try:
            b = assemble_load(ops.mesh, lambda x, y: problem.f(t_load, x, y))[idx]
            u = ops.dofmap.embed(marcher.step(traj.states[-1][idx], b))
        except Exception as exc:
            raise RuntimeError(f"time step {n} (t={t:.6g}) failed: {exc}") from exc
        traj.states.append(u)
        if on_step is not None:
            on_step(traj, n)
            traj.drop_caches_before(n)
    return traj

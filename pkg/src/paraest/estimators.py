"""Residual estimator for the elliptic reconstruction error and the per-step
terms of the backward Euler / Crank-Nicolson error estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import DEFAULT_RULE, ERROR_RULE, QuadratureRule, UniformQuadMesh, basis_values
from .timestepping import SchemeKind, Trajectory, discrete_time_derivative


@dataclass
class ConstantsConfig:
    """Estimator constants; the derived exponential rate alpha enters the
    accumulation weights."""

    c_clem: float = 1.0
    c_elip: float = 1.0
    c_equiv: float = 1.0
    c_pf: float = 1.0
    lam: float = 0.25
    alpha_override: float | None = None

    def __post_init__(self):
        if min(self.c_clem, self.c_elip) < 0 or min(self.c_equiv, self.c_pf) <= 0:
            raise ValueError("invalid estimator constants")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")

    @property
    def alpha(self) -> float:
        if self.alpha_override is not None:
            return self.alpha_override
        return 2.0 * (1.0 - self.lam) / (self.c_equiv * self.c_pf) ** 2

    def to_dict(self) -> dict:
        return {"c_clem": self.c_clem, "c_elip": self.c_elip, "c_equiv": self.c_equiv,
                "c_pf": self.c_pf, "lambda": self.lam, "alpha": self.alpha}


@dataclass
class EstimatorSample:
    """In-step sample of every estimator term (time_recon is CN-only)."""

    t: float
    space: float
    time: float
    elliptic: float
    data_time: float
    data_space: float
    time_recon: float = 0.0


@dataclass
class StepEstimate:
    """Per-step representatives F^n: max of the in-step samples."""

    n: int
    space: float
    time: float
    data_time: float
    data_space: float
    elliptic: float       # running-max candidate
    time_recon: float     # running-max candidate (CN)

    ACCUMULATED = ("space", "time", "data_time", "data_space")


def reduce_step(samples: list[EstimatorSample]) -> StepEstimate:
    """Conservative step reduction; needs samples at both step endpoints."""
    if len(samples) < 2:
        raise ValueError("need at least the two endpoint samples")
    agg = {name: max(getattr(s, name) for s in samples)
           for name in ("space", "time", "data_time", "data_space",
                        "elliptic", "time_recon")}
    return StepEstimate(n=-1, **agg)


class EtaEvaluator:
    """Residual estimator eta(v) = C_elip (||h^2 r||_T + ||h^{3/2} [A grad v]||_S).

    On Q1 squares with constant A the strong operator reduces to
    2 A12 v_xy - mu v, so the volume residual of v with discrete Laplacian z
    and data correction c is the field z + c + mu v minus the per-element
    cross-derivative constant.
    """

    def __init__(self, mesh: UniformQuadMesh, coeff, c_elip: float,
                 rule: QuadratureRule = DEFAULT_RULE):
        self.mesh = mesh
        self.coeff = coeff
        self.c_elip = c_elip
        self.rule = rule
        self._basis = basis_values(rule.points)              # (nq, 4)
        # 2-point Gauss on [0,1] for edge integrals (exact for Q1 traces)
        g = 0.5 / np.sqrt(3.0)
        self._edge_nodes = np.array([0.5 - g, 0.5 + g])
        self._hK4 = mesh.h ** 4
        self._he3 = mesh.h_edge ** 3

    def _volume_norm_sq(self, field_vec: np.ndarray, cross_src: np.ndarray | None) -> float:
        """sum_K h_K^4 int_K r^2 with r = field - 2 A12 * cross-coef(cross_src)."""
        m = self.mesh
        vals = field_vec[m.elements] @ self._basis.T            # (nel, nq)
        a12 = self.coeff.A[0, 1]
        if cross_src is not None and a12 != 0.0:
            e = cross_src[m.elements]
            cxy = (e[:, 0] - e[:, 1] + e[:, 2] - e[:, 3]) / m.side ** 2
            vals = vals - 2.0 * a12 * cxy[:, None]
        cell = (vals ** 2) @ self.rule.weights
        return self._hK4 * m.side ** 2 * float(cell.sum())

    def jump_seminorm(self, v: np.ndarray) -> float:
        """(sum_e h_e^3 int_e [A grad v]^2)^{1/2} over interior edges."""
        m = self.mesh
        e = v[m.elements]                                       # (nel, 4)
        s = m.side
        # bilinear coefficients per element: d/dxi = bx + d*eta, d/deta = by + d*xi
        bx = e[:, 1] - e[:, 0]
        by = e[:, 3] - e[:, 0]
        d = e[:, 0] - e[:, 1] + e[:, 2] - e[:, 3]
        total = 0.0
        a11, a22 = self.coeff.A[0, 0], self.coeff.A[1, 1]
        L, R = m.vertical_edges[:, 0], m.vertical_edges[:, 1]
        for gp in self._edge_nodes:
            jump = a11 * ((bx[L] + d[L] * gp) - (bx[R] + d[R] * gp)) / s
            total += 0.5 * s * float((jump ** 2).sum())
        B, T = m.horizontal_edges[:, 0], m.horizontal_edges[:, 1]
        for gp in self._edge_nodes:
            jump = a22 * ((by[B] + d[B] * gp) - (by[T] + d[T] * gp)) / s
            total += 0.5 * s * float((jump ** 2).sum())
        return float(np.sqrt(self._he3 * total))

    def eta(self, v: np.ndarray, lap_v: np.ndarray,
            correction: np.ndarray | None = None) -> float:
        """Estimator value for v with cached discrete Laplacian lap_v."""
        field_vec = lap_v.copy()
        if correction is not None:
            field_vec += correction
        if self.coeff.mu != 0.0:
            field_vec += self.coeff.mu * v
        vol = np.sqrt(self._volume_norm_sq(field_vec, v))
        return self.c_elip * (vol + self.jump_seminorm(v))


def eta_residual(mesh: UniformQuadMesh, coeff, v: np.ndarray, lap_v: np.ndarray,
                 correction: np.ndarray | None = None, c_elip: float = 1.0) -> float:
    """One-shot residual estimator (see EtaEvaluator for the cached form)."""
    return EtaEvaluator(mesh, coeff, c_elip).eta(v, lap_v, correction)


class EstimatorEngine:
    """Evaluates Definition-level estimator terms along a trajectory.

    Node-level quantities (corrected eta values, data oscillation grids)
    are cached and reused by the two steps sharing each node.
    """

    def __init__(self, traj: Trajectory, constants: ConstantsConfig,
                 samples_per_step: int = 3, ds_pairing: str = "verbatim",
                 error_rule: QuadratureRule = ERROR_RULE):
        if samples_per_step < 3:
            raise ValueError("need at least 3 samples per step")
        if ds_pairing not in ("verbatim", "matched"):
            raise ValueError(f"unknown ds_pairing {ds_pairing!r}")
        self.traj = traj
        self.ops = traj.ops
        self.constants = constants
        self.samples_per_step = samples_per_step
        self.ds_pairing = ds_pairing
        self.rule = error_rule
        mesh = traj.ops.mesh
        self.eta_eval = EtaEvaluator(mesh, traj.ops.coeff, constants.c_elip)
        self._basis_err = basis_values(error_rule.points)
        self._pts = mesh.physical_points(error_rule)
        self._fgrid: dict[int, np.ndarray] = {}      # f at node times
        self._osc: dict[int, np.ndarray] = {}        # f^n - P f^n at quad points
        self._eta_node: dict[int, float] = {}        # corrected eta of U^n
        self._step_consts: dict[int, dict] = {}      # step-constant term pieces

    # -- cached node quantities ------------------------------------------

    def _f_grid(self, t: float) -> np.ndarray:
        f = self.traj.f
        return np.asarray(f(t, self._pts[..., 0], self._pts[..., 1]),
                          dtype=float) * np.ones(self._pts.shape[:2])

    def node_f_grid(self, n: int) -> np.ndarray:
        if n not in self._fgrid:
            self._fgrid[n] = self._f_grid(self.traj.times[n])
        return self._fgrid[n]

    def _field_grid(self, v: np.ndarray) -> np.ndarray:
        return v[self.ops.mesh.elements] @ self._basis_err.T

    def node_oscillation(self, n: int) -> np.ndarray:
        """f^n - P f^n sampled on the error-rule grid."""
        if n not in self._osc:
            pf = self.traj.cache_for(n).proj_f
            self._osc[n] = self.node_f_grid(n) - self._field_grid(pf)
        return self._osc[n]

    def _grid_l2(self, grid: np.ndarray) -> float:
        cell = (grid ** 2) @ self.rule.weights
        return float(np.sqrt(self.ops.mesh.side ** 2 * cell.sum()))

    def node_eta_corrected(self, n: int) -> float:
        """eta of U^n with the data correction P0 f^n - P f^n."""
        if n not in self._eta_node:
            c = self.traj.cache_for(n)
            corr = c.proj_f_bc - c.proj_f
            self._eta_node[n] = self.eta_eval.eta(self.traj.states[n], c.lap_u, corr)
        return self._eta_node[n]

    def drop_before(self, n: int) -> None:
        for d in (self._fgrid, self._osc, self._eta_node, self._step_consts):
            for k in [k for k in d if k < n]:
                del d[k]

    # -- per-step terms ----------------------------------------------------

    def _sample_f_grid(self, n: int, t: float) -> np.ndarray:
        if t == self.traj.times[n]:
            return self.node_f_grid(n)
        if t == self.traj.times[n - 1]:
            return self.node_f_grid(n - 1)
        return self._f_grid(t)

    def _consts(self, n: int) -> dict:
        """Step-constant pieces shared by every in-step sample."""
        if n in self._step_consts:
            return self._step_consts[n]
        traj, ops, tau = self.traj, self.ops, self.traj.tau
        cc = self.constants
        p, c = traj.cache_for(n - 1), traj.cache_for(n)
        dbar_u = discrete_time_derivative(traj.states[n], traj.states[n - 1], tau)
        dbar_lap = discrete_time_derivative(c.lap_u, p.lap_u, tau)
        dbar_corr = discrete_time_derivative(c.proj_f_bc - c.proj_f,
                                             p.proj_f_bc - p.proj_f, tau)
        out = {"eta_dbar": self.eta_eval.eta(dbar_u, dbar_lap, dbar_corr)}
        if traj.scheme is SchemeKind.BACKWARD_EULER:
            out["time"] = tau * ops.l2_norm(dbar_lap + dbar_corr)
            out["data_space"] = (cc.c_clem * ops.mesh.h
                                 * self._grid_l2(self.node_oscillation(n)))
        else:
            c = traj.cn_cache_for(n)
            w, lap_w = c.time_jerk, c.lap_time_jerk
            out["eta_w"] = self.eta_eval.eta(w, lap_w)
            out["time"] = cc.c_clem * tau ** 2 / 8.0 * (
                ops.triple_norm(w) + ops.mesh.h * ops.l2_norm(lap_w))
            out["time_recon"] = tau ** 2 / 8.0 * ops.l2_norm(w)
            out["osc_mid"] = ops.l2_norm(
                c.proj_f_bc_mid - 0.5 * (c.proj_f_bc + p.proj_f_bc))
        self._step_consts[n] = out
        return out

    def sample_be_terms(self, n: int, t: float) -> EstimatorSample:
        k = self._consts(n)
        ln, lp = self.traj.hat_weights(n, t)
        elliptic = ln * self.node_eta_corrected(n) + lp * self.node_eta_corrected(n - 1)
        data_time = self._grid_l2(self._sample_f_grid(n, t) - self.node_f_grid(n))
        return EstimatorSample(t=t, space=k["eta_dbar"], time=k["time"],
                               elliptic=elliptic, data_time=data_time,
                               data_space=k["data_space"])

    def sample_cn_terms(self, n: int, t: float) -> EstimatorSample:
        ops, cc = self.ops, self.constants
        tau = self.traj.tau
        k = self._consts(n)
        ln, lp = self.traj.hat_weights(n, t)

        # d/dt of (tau^2/2) ell^n ell^{n-1} is (tau/2)(1 - 2 ell^n)
        space = k["eta_dbar"] + 0.5 * tau * abs(1.0 - 2.0 * ln) * k["eta_w"]
        elliptic = (ln * self.node_eta_corrected(n) + lp * self.node_eta_corrected(n - 1)
                    + 0.5 * tau ** 2 * ln * lp * k["eta_w"])

        f_lin = ln * self.node_f_grid(n) + lp * self.node_f_grid(n - 1)
        data_time = self._grid_l2(self._sample_f_grid(n, t) - f_lin) + k["osc_mid"]

        if self.ds_pairing == "verbatim":
            osc = ln * self.node_oscillation(n - 1) + lp * self.node_oscillation(n)
        else:
            osc = ln * self.node_oscillation(n) + lp * self.node_oscillation(n - 1)
        data_space = cc.c_clem * ops.mesh.h * self._grid_l2(osc)
        return EstimatorSample(t=t, space=space, time=k["time"], elliptic=elliptic,
                               data_time=data_time, data_space=data_space,
                               time_recon=k["time_recon"])

    def sample(self, n: int, t: float) -> EstimatorSample:
        if self.traj.scheme is SchemeKind.BACKWARD_EULER:
            return self.sample_be_terms(n, t)
        return self.sample_cn_terms(n, t)

    def step_estimate(self, n: int) -> StepEstimate:
        """Sample the step on a uniform grid including both endpoints."""
        ts = np.linspace(self.traj.times[n - 1], self.traj.times[n],
                         self.samples_per_step)
        est = reduce_step([self.sample(n, float(t)) for t in ts])
        est.n = n
        return est

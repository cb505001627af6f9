"""Discrete operators: L2 projectors, discrete Laplacian, mesh-dependent norms."""

from __future__ import annotations

import numpy as np

from .linalg import CoefficientField, assemble_mass, assemble_stiffness, cg_solve
from .mesh import DEFAULT_RULE, DofMap, QuadratureRule, UniformQuadMesh, basis_values


def assemble_load(mesh: UniformQuadMesh, g, rule: QuadratureRule = DEFAULT_RULE) -> np.ndarray:
    """b_i = int g(x,y) phi_i by elementwise quadrature."""
    pts = mesh.physical_points(rule)
    gv = np.asarray(g(pts[..., 0], pts[..., 1]), dtype=float) * np.ones(pts.shape[:2])
    el = mesh.side ** 2 * gv @ (basis_values(rule.points) * rule.weights[:, None])
    b = np.zeros(mesh.n_vertices)
    np.add.at(b, mesh.elements, el)
    return b


def discrete_time_derivative(w_curr: np.ndarray, w_prev: np.ndarray, tau: float) -> np.ndarray:
    if tau <= 0:
        raise ValueError("tau must be positive")
    return (w_curr - w_prev) / tau


class DiscreteOperatorSet:
    """Mass/stiffness forms of one mesh plus their interior restrictions."""

    def __init__(self, mesh: UniformQuadMesh, dofmap: DofMap, coeff: CoefficientField,
                 tol: float = 1e-12):
        self.mesh = mesh
        self.dofmap = dofmap
        self.coeff = coeff
        self.tol = tol
        self.mass = assemble_mass(mesh, dofmap)
        self.stiffness = assemble_stiffness(mesh, dofmap, coeff)
        idx = dofmap.interior
        self.mass_int = self.mass.submatrix(idx)
        self.stiffness_int = self.stiffness.submatrix(idx)
        self._mass_diag = self.mass.diagonal()
        self._mass_int_diag = self.mass_int.diagonal()

    def l2_project(self, g, x0: np.ndarray | None = None) -> np.ndarray:
        """L2 projection onto the full space (no boundary condition)."""
        if callable(g):
            b = assemble_load(self.mesh, g)
        else:
            b = self.mass @ np.asarray(g, dtype=float)
        return cg_solve(self.mass, b, tol=self.tol, x0=x0, diag=self._mass_diag)

    def l2_project_bc(self, g, x0: np.ndarray | None = None) -> np.ndarray:
        """L2 projection onto the zero-boundary subspace."""
        if callable(g):
            b = assemble_load(self.mesh, g)
        else:
            b = self.mass @ np.asarray(g, dtype=float)
        b_int = b[self.dofmap.interior]
        x0_int = None if x0 is None else x0[self.dofmap.interior]
        x_int = cg_solve(self.mass_int, b_int, tol=self.tol, x0=x0_int,
                         diag=self._mass_int_diag)
        return self.dofmap.embed(x_int)

    def discrete_laplacian(self, w: np.ndarray, x0: np.ndarray | None = None) -> np.ndarray:
        """z in V0 with (z, phi) = -a(w, phi) for interior phi."""
        rhs = -(self.stiffness @ w)[self.dofmap.interior]
        x0_int = None if x0 is None else x0[self.dofmap.interior]
        z_int = cg_solve(self.mass_int, rhs, tol=self.tol, x0=x0_int,
                         diag=self._mass_int_diag)
        return self.dofmap.embed(z_int)

    def triple_norm(self, v: np.ndarray) -> float:
        """Energy norm sqrt(a(v, v)) = sqrt(v' K v)."""
        return float(np.sqrt(max(v @ (self.stiffness @ v), 0.0)))

    def l2_norm(self, v: np.ndarray) -> float:
        """L2 norm of the FE function with nodal vector v: sqrt(v' M v)."""
        return float(np.sqrt(max(v @ (self.mass @ v), 0.0)))

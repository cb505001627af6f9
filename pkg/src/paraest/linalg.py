"""Sparse symmetric forms (mass, stiffness) and a preconditioned CG solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import DofMap, UniformQuadMesh


@dataclass
class CoefficientField:
    """Constant diffusion matrix A (SPD, symmetric) and reaction mu >= 0."""

    A: np.ndarray
    mu: float = 0.0

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        if self.A.shape != (2, 2) or not np.allclose(self.A, self.A.T):
            raise ValueError("A must be a symmetric 2x2 matrix")
        if np.linalg.eigvalsh(self.A)[0] <= 0:
            raise ValueError("A must be positive definite")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")

    @classmethod
    def identity(cls, mu: float = 0.0) -> "CoefficientField":
        return cls(A=np.eye(2), mu=mu)


@dataclass
class SparseOperator:
    """Symmetric operator in compressed-row storage."""

    matrix: sp.csr_matrix
    symmetric: bool = True

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def row_offsets(self) -> np.ndarray:
        return self.matrix.indptr

    @property
    def col_indices(self) -> np.ndarray:
        return self.matrix.indices

    @property
    def values(self) -> np.ndarray:
        return self.matrix.data

    def __matmul__(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def submatrix(self, idx: np.ndarray) -> sp.csr_matrix:
        return self.matrix[np.ix_(idx, idx)].tocsr()


# reference element matrices (sympy-verified closed forms), corner order
# (0,0),(s,0),(s,s),(0,s); side length enters as noted
_MASS_REF = np.array([[4, 2, 1, 2], [2, 4, 2, 1], [1, 2, 4, 2], [2, 1, 2, 4]], dtype=float) / 36.0
_STIFF_XX = np.array([[2, -2, -1, 1], [-2, 2, 1, -1], [-1, 1, 2, -2], [1, -1, -2, 2]], dtype=float) / 6.0
_STIFF_YY = np.array([[2, 1, -1, -2], [1, 2, -2, -1], [-1, -2, 2, 1], [-2, -1, 1, 2]], dtype=float) / 6.0
_STIFF_XY = np.array([[1, 0, -1, 0], [0, -1, 0, 1], [-1, 0, 1, 0], [0, 1, 0, -1]], dtype=float) / 2.0


def element_mass_matrix(side: float) -> np.ndarray:
    """int_K phi_i phi_j on a square of the given side."""
    return side ** 2 * _MASS_REF


def element_stiffness_matrix(side: float, coeff: CoefficientField) -> np.ndarray:
    """int_K (A grad phi_j) . grad phi_i + mu phi_i phi_j; the gradient part
    is side-independent in 2D."""
    A = coeff.A
    K = A[0, 0] * _STIFF_XX + A[1, 1] * _STIFF_YY + A[0, 1] * _STIFF_XY
    if coeff.mu != 0.0:
        K = K + coeff.mu * element_mass_matrix(side)
    return K


def _scatter(mesh: UniformQuadMesh, el_mat: np.ndarray) -> sp.csr_matrix:
    nel = mesh.n_elements
    rows = np.repeat(mesh.elements, 4, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, 4)).ravel()
    data = np.tile(el_mat.ravel(), nel)
    A = sp.coo_matrix((data, (rows, cols)), shape=(mesh.n_vertices, mesh.n_vertices))
    return A.tocsr()


def assemble_mass(mesh: UniformQuadMesh, dofmap: DofMap) -> SparseOperator:
    return SparseOperator(_scatter(mesh, element_mass_matrix(mesh.side)))


def assemble_stiffness(mesh: UniformQuadMesh, dofmap: DofMap,
                       coeff: CoefficientField) -> SparseOperator:
    return SparseOperator(_scatter(mesh, element_stiffness_matrix(mesh.side, coeff)))


class CgError(RuntimeError):
    """CG failed to reach the requested tolerance."""

    def __init__(self, residual: float, iterations: int):
        super().__init__(f"CG did not converge in {iterations} iterations "
                         f"(final residual {residual:.3e})")
        self.residual = residual
        self.iterations = iterations


def cg_solve(A, b: np.ndarray, tol: float = 1e-12, maxit: int | None = None,
             x0: np.ndarray | None = None, diag: np.ndarray | None = None) -> np.ndarray:
    """Jacobi-preconditioned CG for SPD A; stops at ||Ax-b|| <= tol*||b||."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    mat = A.matrix if isinstance(A, SparseOperator) else A
    n = mat.shape[0]
    if maxit is None:
        maxit = 10 * n
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n)
    if diag is None:
        diag = mat.diagonal()
    x = np.zeros(n) if x0 is None else x0.astype(float).copy()
    r = b - mat @ x
    target = tol * bnorm
    rnorm = np.linalg.norm(r)
    if rnorm <= target:
        return x
    z = r / diag
    p = z.copy()
    rz = r @ z
    for _ in range(maxit):
        Ap = mat @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rnorm = np.linalg.norm(r)
        if rnorm <= target:
            # the recursive residual drifts; confirm against the true one
            r = b - mat @ x
            rnorm = np.linalg.norm(r)
            if rnorm <= target:
                return x
        z = r / diag
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise CgError(rnorm / bnorm, maxit)

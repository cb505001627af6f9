import numpy as np
import pytest

from paraest.linalg import (CgError, CoefficientField, assemble_mass,
                            assemble_stiffness, cg_solve, element_mass_matrix,
                            element_stiffness_matrix)
from paraest.mesh import DofMap, build_mesh
from paraest.operators import assemble_load

# frozen symbolic element matrices (cyclic corner order)
MASS_ORACLE = np.array([[4, 2, 1, 2], [2, 4, 2, 1], [1, 2, 4, 2], [2, 1, 2, 4]]) / 36.0
STIFF_ORACLE = np.array([[4, -1, -2, -1], [-1, 4, -1, -2],
                         [-2, -1, 4, -1], [-1, -2, -1, 4]]) / 6.0


def test_element_mass_matrix():
    s = 0.31
    assert np.abs(element_mass_matrix(s) - s ** 2 * MASS_ORACLE).max() < 1e-14


def test_element_stiffness_matrix_identity_coeff():
    el = element_stiffness_matrix(0.42, CoefficientField.identity())
    assert np.abs(el - STIFF_ORACLE).max() < 1e-14  # side cancels in 2D


def test_element_stiffness_quadrature_oracle():
    # generic SPD A and mu checked against direct quadrature of the integrand
    from paraest.mesh import DEFAULT_RULE, basis_gradients, basis_values
    coeff = CoefficientField(A=[[2.0, 0.3], [0.3, 1.5]], mu=0.7)
    s = 0.5
    vals = basis_values(DEFAULT_RULE.points)
    grads = basis_gradients(DEFAULT_RULE.points) / s
    K = np.zeros((4, 4))
    for q, w in enumerate(DEFAULT_RULE.weights):
        g = grads[q]
        K += w * s ** 2 * (g @ coeff.A @ g.T + coeff.mu * np.outer(vals[q], vals[q]))
    assert np.abs(K - element_stiffness_matrix(s, coeff)).max() < 1e-14


def _dense_oracle(M_cells, coeff):
    mesh = build_mesh(M_cells)
    n = mesh.n_vertices
    Md, Kd = np.zeros((n, n)), np.zeros((n, n))
    me = element_mass_matrix(mesh.side)
    ke = element_stiffness_matrix(mesh.side, coeff)
    for el in mesh.elements:
        for a in range(4):
            for b in range(4):
                Md[el[a], el[b]] += me[a, b]
                Kd[el[a], el[b]] += ke[a, b]
    return Md, Kd


def test_global_assembly_matches_dense_scatter():
    coeff = CoefficientField(A=[[1.0, 0.2], [0.2, 2.0]], mu=0.5)
    mesh = build_mesh(2)
    dm = DofMap(mesh)
    Md, Kd = _dense_oracle(2, coeff)
    assert np.abs(assemble_mass(mesh, dm).matrix.toarray() - Md).max() < 1e-14
    assert np.abs(assemble_stiffness(mesh, dm, coeff).matrix.toarray() - Kd).max() < 1e-14


def test_mass_row_sums_and_total():
    mesh = build_mesh(3)
    dm = DofMap(mesh)
    M = assemble_mass(mesh, dm)
    row_sums = np.asarray(M.matrix.sum(axis=1)).ravel()
    phi_integrals = assemble_load(mesh, lambda x, y: 1.0 + 0 * x)
    assert np.abs(row_sums - phi_integrals).max() < 1e-14
    one = np.ones(mesh.n_vertices)
    assert one @ (M @ one) == pytest.approx(1.0, abs=1e-13)


def test_stiffness_kernel_and_coercivity():
    mesh = build_mesh(3)
    dm = DofMap(mesh)
    coeff = CoefficientField.identity(mu=0.7)
    K = assemble_stiffness(mesh, dm, coeff)
    M = assemble_mass(mesh, dm)
    one = np.ones(mesh.n_vertices)
    assert np.abs(K @ one - 0.7 * (M @ one)).max() < 1e-14
    rng = np.random.default_rng(3)
    v = np.zeros(mesh.n_vertices)
    v[dm.interior] = rng.standard_normal(dm.n_interior_dofs)
    assert v @ (K @ v) > 0


def test_symmetry():
    mesh = build_mesh(4)
    dm = DofMap(mesh)
    coeff = CoefficientField(A=[[1.0, 0.4], [0.4, 3.0]], mu=0.2)
    for op in (assemble_mass(mesh, dm), assemble_stiffness(mesh, dm, coeff)):
        d = op.matrix - op.matrix.T
        assert np.abs(d.toarray()).max() < 1e-14


def test_cg_unit_vector_and_zero():
    mesh = build_mesh(3)
    dm = DofMap(mesh)
    A = assemble_mass(mesh, dm)
    e = np.zeros(A.n)
    e[5] = 1.0
    x = cg_solve(A, A @ e, tol=1e-13)
    assert np.abs(x - e).max() < 1e-10
    assert np.all(cg_solve(A, np.zeros(A.n)) == 0.0)


def test_cg_matches_dense_solve():
    rng = np.random.default_rng(42)
    B = rng.standard_normal((10, 10))
    A = B @ B.T + 10 * np.eye(10)
    b = rng.standard_normal(10)
    import scipy.sparse as sp
    x = cg_solve(sp.csr_matrix(A), b, tol=1e-14)
    assert np.abs(x - np.linalg.solve(A, b)).max() < 1e-10


def test_cg_nonconvergence_raises():
    rng = np.random.default_rng(0)
    B = rng.standard_normal((30, 30))
    A = B @ B.T + 1e-3 * np.eye(30)
    import scipy.sparse as sp
    with pytest.raises(CgError) as err:
        cg_solve(sp.csr_matrix(A), rng.standard_normal(30), tol=1e-14, maxit=2)
    assert err.value.residual > 0


def test_coefficient_field_validation():
    with pytest.raises(ValueError):
        CoefficientField(A=[[1.0, 0.5], [0.0, 1.0]])     # not symmetric
    with pytest.raises(ValueError):
        CoefficientField(A=[[1.0, 2.0], [2.0, 1.0]])     # indefinite
    with pytest.raises(ValueError):
        CoefficientField(A=np.eye(2), mu=-1.0)

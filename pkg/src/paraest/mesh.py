"""Uniform Q1 mesh of the unit square, dof bookkeeping and quadrature."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss rule on the reference square [0,1]^2."""

    points: np.ndarray  # (nq, 2)
    weights: np.ndarray  # (nq,), sums to 1

    @classmethod
    def gauss(cls, npts_per_dim: int) -> "QuadratureRule":
        x, w = np.polynomial.legendre.leggauss(npts_per_dim)
        x = 0.5 * (x + 1.0)
        w = 0.5 * w
        X, Y = np.meshgrid(x, x, indexing="ij")
        W = np.outer(w, w)
        return cls(points=np.column_stack([X.ravel(), Y.ravel()]),
                   weights=W.ravel())


DEFAULT_RULE = QuadratureRule.gauss(3)   # order 5, exact for bilinear x bilinear
ERROR_RULE = QuadratureRule.gauss(5)     # used against analytic solutions


def basis_values(points: np.ndarray) -> np.ndarray:
    """Q1 shape functions at reference points, corners ordered cyclically
    (0,0),(1,0),(1,1),(0,1). Returns (nq, 4)."""
    x, y = points[:, 0], points[:, 1]
    return np.column_stack([(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y])


def basis_gradients(points: np.ndarray) -> np.ndarray:
    """Reference gradients of the Q1 shape functions, shape (nq, 4, 2)."""
    x, y = points[:, 0], points[:, 1]
    g = np.empty((points.shape[0], 4, 2))
    g[:, 0, 0], g[:, 0, 1] = -(1 - y), -(1 - x)
    g[:, 1, 0], g[:, 1, 1] = (1 - y), -x
    g[:, 2, 0], g[:, 2, 1] = y, x
    g[:, 3, 0], g[:, 3, 1] = -y, (1 - x)
    return g


class UniformQuadMesh:
    """M x M uniform square elements on (0,1)^2.

    Vertices are numbered row-major, vertex (i,j) -> j*(M+1)+i at
    (i/M, j/M); element (i,j) collects its corners counterclockwise.
    """

    def __init__(self, cells_per_side: int):
        if cells_per_side < 1:
            raise ValueError(f"cells_per_side must be >= 1, got {cells_per_side}")
        M = cells_per_side
        self.cells_per_side = M
        self.side = 1.0 / M                 # element edge length
        self.h = np.sqrt(2.0) / M           # element diameter
        self.h_edge = 1.0 / M               # edge diameter
        self.n_vertices = (M + 1) ** 2
        self.n_elements = M * M

        # row-major vertex coordinates: index v = j*(M+1)+i
        vi = np.arange(M + 1)
        X, Y = np.meshgrid(vi / M, vi / M, indexing="xy")
        self.vertices = np.column_stack([X.ravel(), Y.ravel()])

        ei, ej = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
        ei, ej = ei.ravel(), ej.ravel()
        v00 = ej * (M + 1) + ei
        self.elements = np.column_stack([v00, v00 + 1, v00 + M + 2, v00 + M + 1])
        self._elem_grid = np.arange(M * M).reshape(M, M)  # [i, j] layout

        bx = (self.vertices[:, 0] == 0.0) | (self.vertices[:, 0] == 1.0)
        by = (self.vertices[:, 1] == 0.0) | (self.vertices[:, 1] == 1.0)
        self.boundary_vertex = bx | by

        # interior edges as (element-, element+) pairs sharing a face;
        # vertical edges separate horizontally adjacent elements
        g = self._elem_grid
        self.vertical_edges = np.column_stack([g[:-1, :].ravel(), g[1:, :].ravel()])
        self.horizontal_edges = np.column_stack([g[:, :-1].ravel(), g[:, 1:].ravel()])

        # physical quadrature points cached per rule id
        self._phys_cache: dict[int, np.ndarray] = {}

    @property
    def interior_edges(self) -> list[tuple[int, int, str]]:
        """(element-, element+, orientation) for every interior edge."""
        out = [(int(a), int(b), "vertical") for a, b in self.vertical_edges]
        out += [(int(a), int(b), "horizontal") for a, b in self.horizontal_edges]
        return out

    def element_origins(self) -> np.ndarray:
        """Lower-left corner of each element, shape (nel, 2)."""
        return self.vertices[self.elements[:, 0]]

    def physical_points(self, rule: QuadratureRule) -> np.ndarray:
        """Quadrature points mapped to every element, shape (nel, nq, 2)."""
        key = id(rule)
        if key not in self._phys_cache:
            orig = self.element_origins()[:, None, :]
            self._phys_cache[key] = orig + self.side * rule.points[None, :, :]
        return self._phys_cache[key]


def build_mesh(cells_per_side: int) -> UniformQuadMesh:
    return UniformQuadMesh(cells_per_side)


class DofMap:
    """One dof per vertex; interior dofs are the non-boundary vertices."""

    def __init__(self, mesh: UniformQuadMesh):
        self.mesh = mesh
        self.n_dofs = mesh.n_vertices
        self.interior_mask = ~mesh.boundary_vertex
        self.interior = np.flatnonzero(self.interior_mask)
        self.n_interior_dofs = self.interior.size

    def zero_boundary(self, v: np.ndarray) -> np.ndarray:
        out = v.copy()
        out[~self.interior_mask] = 0.0
        return out

    def embed(self, v_int: np.ndarray) -> np.ndarray:
        """Interior vector -> full vector with zero boundary entries."""
        out = np.zeros(self.n_dofs)
        out[self.interior] = v_int
        return out


def interpolate_nodal(mesh: UniformQuadMesh, g: Callable) -> np.ndarray:
    """Vertex interpolant of g(x, y)."""
    v = mesh.vertices
    return np.asarray(g(v[:, 0], v[:, 1]), dtype=float) * np.ones(mesh.n_vertices)


def _field_at(mesh: UniformQuadMesh, v: np.ndarray, rule: QuadratureRule) -> np.ndarray:
    """FE field values at the rule's points of every element, (nel, nq)."""
    return v[mesh.elements] @ basis_values(rule.points).T


def element_l2_error(mesh: UniformQuadMesh, v: np.ndarray | None, g: Callable,
                     rule: QuadratureRule = ERROR_RULE) -> float:
    """|| v_h - g ||_{L2} by elementwise quadrature (v_h = 0 if v is None)."""
    pts = mesh.physical_points(rule)
    gv = g(pts[..., 0], pts[..., 1])
    diff = -np.asarray(gv, dtype=float) * np.ones(pts.shape[:2])
    if v is not None:
        diff += _field_at(mesh, v, rule)
    cell = (diff ** 2) @ rule.weights
    return float(np.sqrt(mesh.side ** 2 * cell.sum()))

"""Mesh construction and form assembly in a nutshell.

Builds a small uniform Q1 mesh of the unit square, assembles the mass and
stiffness forms, and verifies a few structural identities by hand.
"""

import numpy as np

from paraest import (CoefficientField, DofMap, assemble_mass, assemble_stiffness,
                     build_mesh, element_mass_matrix, element_stiffness_matrix)

mesh = build_mesh(4)
dofmap = DofMap(mesh)
print(f"mesh: {mesh.n_elements} elements, {mesh.n_vertices} vertices, "
      f"{dofmap.n_interior_dofs} interior dofs, h = {mesh.h:.4f}")

coeff = CoefficientField.identity()
M = assemble_mass(mesh, dofmap)
K = assemble_stiffness(mesh, dofmap, coeff)

one = np.ones(mesh.n_vertices)
print(f"\nconstants integrate to the domain area: 1'M1 = {one @ (M @ one):.15f}")
print(f"constants lie in the stiffness kernel:  |K1|_max = {np.abs(K @ one).max():.2e}")

print("\nsingle-element mass matrix (x 36/s^2):")
print(np.round(element_mass_matrix(mesh.side) * 36 / mesh.side ** 2).astype(int))
print("single-element stiffness matrix (x 6):")
print(np.round(element_stiffness_matrix(mesh.side, coeff) * 6).astype(int))

print(f"\ninterior edges: {len(mesh.interior_edges)} "
      f"(expected 2 M (M-1) = {2 * 4 * 3})")

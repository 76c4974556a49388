"""Discrete Hodge stars: assembly, definiteness, duality, approximate inverses.

The stars are sparse with ultra-local stencils (only simplices sharing a
tet couple), symmetric and positive definite for admissible materials.
Their exact inverses are dense, but the inverse entries decay with graph
distance, so a least-squares fit on a k-level neighbor pattern converges
quickly: the Frobenius residual drops by an order of magnitude per level
on a uniform box.
"""

import numpy as np

from declat import generators
from declat.hodge import (
    MaterialMap,
    assemble_galerkin_dual,
    assemble_hodge,
    check_spd,
    spai_inverse,
)

mesh = generators.box_mesh(4)
print(f"4x4x4 box: {mesh.n_edges} edges, {mesh.n_faces} faces")

Heps = assemble_hodge(mesh, MaterialMap(eps=2.0), "eps")
Hmu = assemble_hodge(mesh, MaterialMap(mu=1.5), "mu_inv")
for name, H in (("eps star (edges)", Heps), ("mu-inverse star (faces)", Hmu)):
    sym, min_eig = check_spd(H)
    nnz_row = H.nnz / H.shape[0]
    print(f"{name}: {H.shape[0]} dofs, {nnz_row:.1f} nnz/row, "
          f"symmetry dev {sym:.1e}, min eigenvalue {min_eig:.3e}")

# The swapped assignment (fields on the other lattice) assembles the
# complementary pair of stars over the same simplices.
h_eps_inv, h_mu = assemble_galerkin_dual(mesh, MaterialMap(eps=2.0, mu=1.5))
print(f"swapped-assignment stars: inverse-eps on faces {h_eps_inv.shape}, "
      f"mu on edges {h_mu.shape}")

# Approximate inverse: residual versus neighbor level.
print("\napproximate inverse of the eps star:")
for level in range(4):
    M, res = spai_inverse(Heps, level)
    print(f"  level {level}: ||I - M H||_F = {res:.3e}, nnz(M) = {M.nnz}")

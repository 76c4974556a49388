"""Barycentric dual complex.

Every primal p-simplex gets a dual (3-p)-cell assembled from simplices of
the barycentric subdivision: chains of barycenters of nested simplices
containing it.  Concretely,

* vertex  -> union of sub-tets      (vertex, edge mid, face center, tet center)
* edge    -> union of sub-triangles (edge mid, face center, tet center)
* face    -> union of sub-segments  (face center, tet center)
* tet     -> its barycenter

Dual incidence matrices are the transposes of the primal ones on interior
elements; the sub-simplices carry enough structure to re-derive that
adjacency geometrically, which is what the reciprocity audit checks.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np
from scipy import sparse

from .mesh import SimplicialComplex

__all__ = ["DualComplex", "barycentric_dual"]

_EDGE_SLOT = {
    (0, 1): 0, (0, 2): 1, (0, 3): 2, (1, 2): 3, (1, 3): 4, (2, 3): 5,
}


class DualComplex:
    """Barycentric dual cells of a tetrahedral complex, piece by piece.

    Pieces are stored flat with owner indices, ready for vectorized
    subdivision quadrature:

    ``vertex_pieces``   (24 M, 4, 3) sub-tet corner coordinates
    ``edge_pieces``     (12 M, 3, 3) sub-triangle corners, plus a sign that
                        orients each triangle's normal along its primal edge
    ``face_pieces``     (<=2 F, 2, 3) sub-segments, plus a sign along the
                        primal face normal
    """

    def __init__(self, complex: SimplicialComplex):
        cx = complex
        self.complex = cx
        verts = cx.vertices
        tv = verts[cx.tets]  # (M, 4, 3)
        self.tet_centers = tv.mean(axis=1)
        self.face_centers = verts[cx.faces].mean(axis=1)
        self.edge_midpoints = verts[cx.edges].mean(axis=1)

        m = cx.n_tets
        perms = list(permutations(range(4)))  # 24 flags per tet
        owner_v = []
        pieces_v = []
        for (i, j, k, l) in perms:
            v = tv[:, i]
            e_mid = 0.5 * (tv[:, i] + tv[:, j])
            f_ctr = (tv[:, i] + tv[:, j] + tv[:, k]) / 3.0
            pieces_v.append(np.stack([v, e_mid, f_ctr, self.tet_centers], axis=1))
            owner_v.append(cx.tets[:, i])
        self.vertex_pieces = np.concatenate(pieces_v, axis=0)
        self.vertex_piece_owner = np.concatenate(owner_v, axis=0)
        self.vertex_piece_tet = np.tile(np.arange(m), len(perms))

        # Edge duals: one triangle per (tet, edge of tet, face of tet
        # containing that edge); exactly two faces qualify per edge per tet.
        owner_e = []
        pieces_e = []
        tet_e = []
        face_e = []
        for (a, b) in _EDGE_SLOT:
            slot = _EDGE_SLOT[(a, b)]
            gedge = cx.tet_edges[:, slot]
            e_mid = 0.5 * (tv[:, a] + tv[:, b])
            others = [c for c in range(4) if c not in (a, b)]
            for c in others:
                f_ctr = (tv[:, a] + tv[:, b] + tv[:, c]) / 3.0
                pieces_e.append(np.stack([e_mid, f_ctr, self.tet_centers], axis=1))
                owner_e.append(gedge)
                tet_e.append(np.arange(m))
                missing = ({0, 1, 2, 3} - {a, b, c}).pop()
                face_e.append(cx.tet_faces[:, missing])
        self.edge_pieces = np.concatenate(pieces_e, axis=0)
        self.edge_piece_owner = np.concatenate(owner_e, axis=0)
        self.edge_piece_tet = np.concatenate(tet_e, axis=0)
        self.edge_piece_face = np.concatenate(face_e, axis=0)
        edir = verts[cx.edges[:, 1]] - verts[cx.edges[:, 0]]
        tri = self.edge_pieces
        nrm = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        sgn = np.einsum("kd,kd->k", nrm, edir[self.edge_piece_owner])
        self.edge_piece_sign = np.where(sgn >= 0.0, 1.0, -1.0)

        # Face duals: a segment from face center to each incident tet center.
        ft = cx.face_tets
        owner_f = []
        segs = []
        tet_f = []
        for col in range(2):
            present = np.flatnonzero(ft[:, col] >= 0)
            t = ft[present, col]
            segs.append(
                np.stack([self.face_centers[present], self.tet_centers[t]], axis=1)
            )
            owner_f.append(present)
            tet_f.append(t)
        self.face_pieces = np.concatenate(segs, axis=0)
        self.face_piece_owner = np.concatenate(owner_f, axis=0)
        self.face_piece_tet = np.concatenate(tet_f, axis=0)
        fv = cx.faces
        fnrm = 0.5 * np.cross(
            verts[fv[:, 1]] - verts[fv[:, 0]], verts[fv[:, 2]] - verts[fv[:, 0]]
        )
        seg = self.face_pieces[:, 1] - self.face_pieces[:, 0]
        sgn = np.einsum("kd,kd->k", seg, fnrm[self.face_piece_owner])
        self.face_piece_sign = np.where(sgn >= 0.0, 1.0, -1.0)

    # -- measures -----------------------------------------------------------

    def vertex_cell_volumes(self) -> np.ndarray:
        """Volume of each dual 3-cell; these partition the mesh volume."""
        p = self.vertex_pieces
        vols = (
            np.abs(
                np.einsum(
                    "kd,kd->k",
                    np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]),
                    p[:, 3] - p[:, 0],
                )
            )
            / 6.0
        )
        out = np.zeros(self.complex.n_vertices)
        np.add.at(out, self.vertex_piece_owner, vols)
        return out

    def edge_cell_areas(self) -> np.ndarray:
        tri = self.edge_pieces
        areas = 0.5 * np.linalg.norm(
            np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1
        )
        out = np.zeros(self.complex.n_edges)
        np.add.at(out, self.edge_piece_owner, areas)
        return out

    def face_cell_lengths(self) -> np.ndarray:
        seg = self.face_pieces
        lens = np.linalg.norm(seg[:, 1] - seg[:, 0], axis=1)
        out = np.zeros(self.complex.n_faces)
        np.add.at(out, self.face_piece_owner, lens)
        return out

    # -- combinatorics -------------------------------------------------------

    def incidence(self, p: int) -> sparse.csr_matrix:
        """Dual incidence: transpose of the primal matrix of degree 2-p.

        Valid on interior elements; boundary rows/columns carry the primal
        convention without the boundary closure.
        """
        if p not in (0, 1, 2):
            raise ValueError("dual incidence degree must be 0, 1 or 2")
        return self.complex.incidence(2 - p).T.tocsr()

    def geometric_edge_face_adjacency(self) -> dict[int, set[int]]:
        """For each primal edge, the faces whose dual segments bound its dual cell.

        Derived purely from the subdivision pieces (each triangle of an edge
        cell contains one face center), independent of the incidence
        matrices.
        """
        cx = self.complex
        out: dict[int, set[int]] = {int(e): set() for e in range(cx.n_edges)}
        for e, f in zip(self.edge_piece_owner.tolist(), self.edge_piece_face.tolist()):
            out[e].add(f)
        return out


def barycentric_dual(complex: SimplicialComplex) -> DualComplex:
    """Build the barycentric dual complex."""
    return DualComplex(complex)

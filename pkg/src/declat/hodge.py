"""Discrete Hodge star matrices from Whitney forms and material weights.

The degree-1 star pairs edge basis forms through the permittivity tensor,
the degree-2 star pairs face basis forms through the inverse permeability;
the Galerkin-dual pair swaps the roles (inverse permittivity on faces,
permeability on edges).  Entries couple only simplices sharing a tet, so
the matrices are sparse with ultra-local stencils; they are symmetric and
positive definite for admissible materials.

The numerical inverse of a star is dense in general but its entries decay
away from the diagonal, which justifies the sparse approximate inverse
built here: a per-column Frobenius-norm least-squares fit restricted to a
neighbor-pattern of prescribed level.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .dual import DualComplex
from .mesh import SimplicialComplex
from .whitney import WhitneyBasis, _TET4, _TRI3, _GAUSS2_EDGE

__all__ = [
    "MaterialMap",
    "SparsityPattern",
    "assemble_hodge",
    "assemble_galerkin_dual",
    "spai_inverse",
    "check_spd",
    "dual_pairing_check",
    "write_coo",
    "read_coo",
]


def _per_tet_tensor(value, n_tets: int, name: str) -> np.ndarray:
    """Broadcast a scalar / per-tet scalar / per-tet 3x3 field to (M, 3, 3)."""
    arr = np.asarray(value, dtype=complex if np.iscomplexobj(value) else float)
    eye = np.eye(3)
    if arr.ndim == 0:
        out = arr * np.broadcast_to(eye, (n_tets, 3, 3))
    elif arr.ndim == 1:
        if arr.shape[0] != n_tets:
            raise ValueError(f"{name}: per-tet array must have length {n_tets}")
        out = arr[:, None, None] * eye
    elif arr.shape == (3, 3):
        out = np.broadcast_to(arr, (n_tets, 3, 3)).copy()
    elif arr.shape == (n_tets, 3, 3):
        out = arr.copy()
    else:
        raise ValueError(f"{name}: unsupported material shape {arr.shape}")
    return out


@dataclass
class MaterialMap:
    """Per-tet permittivity and permeability (scalars or symmetric tensors)."""

    eps: object = 1.0
    mu: object = 1.0

    def tensors(self, complex: SimplicialComplex) -> tuple[np.ndarray, np.ndarray]:
        m = complex.n_tets
        eps = _per_tet_tensor(self.eps, m, "eps")
        mu = _per_tet_tensor(self.mu, m, "mu")
        for name, t in (("eps", eps), ("mu", mu)):
            if not np.allclose(t, np.transpose(t, (0, 2, 1)), rtol=0, atol=1e-12):
                raise ValueError(f"{name} tensor must be symmetric")
            if not np.iscomplexobj(t):
                eig = np.linalg.eigvalsh(t)
                if eig.min() <= 0:
                    raise ValueError(f"{name} tensor must be positive definite")
        return eps, mu


def _mass_matrix(
    complex: SimplicialComplex,
    p: int,
    weight: np.ndarray,
    basis: WhitneyBasis | None = None,
) -> sparse.csr_matrix:
    """Weighted L2 pairing of the degree-p basis, degree-2 tet quadrature.

    ``weight`` is (M, 3, 3) per tet or (M, Q, 3, 3) per quadrature point.
    """
    basis = basis or WhitneyBasis(complex)
    cx = complex
    m = cx.n_tets
    tids = np.arange(m)
    vals_q = []
    for lam_t in _TET4:
        lam = np.broadcast_to(lam_t, (m, 4))
        vals_q.append(basis.eval(p, tids, lam))
    w = np.stack(vals_q, axis=1)  # (M, Q, n_loc, 3)

    if weight.ndim == 3:
        local = np.einsum("mqad,mde,mqbe->mab", w, weight, w)
    else:
        local = np.einsum("mqad,mqde,mqbe->mab", w, weight, w)
    local = local * (cx.volumes / len(_TET4))[:, None, None]

    ids = basis.local_indices(p, tids)  # (M, n_loc)
    n_loc = ids.shape[1]
    rows = np.repeat(ids, n_loc, axis=1).reshape(-1)
    cols = np.tile(ids, (1, n_loc)).reshape(-1)
    n = cx.n_simplices(p)
    mat = sparse.coo_matrix(
        (local.reshape(-1), (rows, cols)), shape=(n, n)
    ).tocsr()
    mat.sum_duplicates()
    return mat


def assemble_hodge(
    complex: SimplicialComplex,
    materials: MaterialMap | None = None,
    which: str = "eps",
    basis: WhitneyBasis | None = None,
) -> sparse.csr_matrix:
    """Assemble a discrete Hodge star matrix.

    ``which`` selects the star: ``"eps"`` (primal 1-cochains, permittivity
    weight) or ``"mu_inv"`` (primal 2-cochains, inverse permeability).
    """
    materials = materials or MaterialMap()
    eps, mu = materials.tensors(complex)
    if which == "eps":
        return _mass_matrix(complex, 1, eps, basis)
    if which == "mu_inv":
        return _mass_matrix(complex, 2, np.linalg.inv(mu), basis)
    raise ValueError("which must be 'eps' or 'mu_inv'")


def assemble_galerkin_dual(
    complex: SimplicialComplex,
    materials: MaterialMap | None = None,
    basis: WhitneyBasis | None = None,
) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """The swapped-assignment pair: (inverse-eps star on faces, mu star on edges)."""
    materials = materials or MaterialMap()
    eps, mu = materials.tensors(complex)
    h_eps_inv = _mass_matrix(complex, 2, np.linalg.inv(eps), basis)
    h_mu = _mass_matrix(complex, 1, mu, basis)
    return h_eps_inv, h_mu


# -- sparse approximate inverse ----------------------------------------------


@dataclass
class SparsityPattern:
    """Admitted positions for the approximate inverse, by neighbor level.

    Level 0 is the pattern of the matrix itself plus the diagonal; level k
    multiplies that pattern k more times, so patterns are nested and encode
    successive k-level neighbors.
    """

    level: int
    pattern: sparse.csr_matrix

    @classmethod
    def build(cls, H: sparse.spmatrix, level: int) -> "SparsityPattern":
        if level < 0:
            raise ValueError("pattern level must be >= 0")
        base = (abs(H) > 0).astype(np.int8) + sparse.eye(H.shape[0], dtype=np.int8)
        base = (base > 0).astype(np.int8).tocsr()
        pat = base
        for _ in range(level):
            pat = (pat @ base > 0).astype(np.int8).tocsr()
        return cls(level, pat)


def spai_inverse(
    H: sparse.spmatrix,
    pattern: SparsityPattern | int = 0,
    drop_tol: float = 0.0,
) -> tuple[sparse.csr_matrix, float]:
    """Sparse approximate inverse M with M H close to the identity.

    Row j of M solves a dense least-squares problem restricted to the
    pattern positions, which minimizes the Frobenius deviation
    ||I - M H||_F position by position (H symmetric).  Entries below
    ``drop_tol`` times the row maximum are pruned afterwards.
    Returns (M, residual).
    """
    if not sparse.issparse(H):
        H = sparse.csr_matrix(H)
    if isinstance(pattern, int):
        pattern = SparsityPattern.build(H, pattern)
    n = H.shape[0]
    Hc = H.tocsc()
    Pc = pattern.pattern.tocsc()

    rows_out = []
    cols_out = []
    vals_out = []
    for j in range(n):
        J = Pc.indices[Pc.indptr[j] : Pc.indptr[j + 1]]
        sub = Hc[:, J]
        I = np.unique(sub.indices)
        A = sub.tocsr()[I].toarray()
        b = np.zeros(len(I))
        pos = np.searchsorted(I, j)
        if pos >= len(I) or I[pos] != j:
            raise np.linalg.LinAlgError(
                f"column {j}: unit vector outside restricted row set"
            )
        b[pos] = 1.0
        x, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
        if rank < len(J):
            raise np.linalg.LinAlgError(
                f"column {j}: singular restricted least-squares block"
            )
        if drop_tol > 0.0:
            keep = np.abs(x) >= drop_tol * np.abs(x).max()
        else:
            keep = np.ones(len(J), dtype=bool)
        rows_out.append(np.full(keep.sum(), j))
        cols_out.append(J[keep])
        vals_out.append(x[keep])

    # Rows of M are the solved columns of the left inverse: M[j, J] = x.
    M = sparse.coo_matrix(
        (np.concatenate(vals_out), (np.concatenate(rows_out), np.concatenate(cols_out))),
        shape=(n, n),
    ).tocsr()
    R = M @ H - sparse.eye(n, format="csr")
    residual = float(np.sqrt((R.multiply(R.conjugate())).sum().real))
    return M, residual


def check_spd(
    H: sparse.spmatrix, tol: float = 1e-10, max_iter: int = 1000
) -> tuple[float, float]:
    """Relative symmetry deviation and a converged smallest-eigenvalue estimate.

    The estimate comes from inverse power iteration (sparse LU per solve),
    iterated until the Rayleigh quotient settles to ``tol`` relative.
    """
    H = H.tocsr()
    d = H - H.T
    hnorm = np.sqrt(abs((H.multiply(H.conjugate())).sum()))
    sym_dev = float(np.sqrt(abs((d.multiply(d.conjugate())).sum())) / hnorm)

    n = H.shape[0]
    if n == 0:
        return sym_dev, float("nan")
    lu = splu(H.tocsc())
    rng = np.random.default_rng(1234)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = None
    for _ in range(max_iter):
        w = lu.solve(v)
        w_norm = np.linalg.norm(w)
        if not np.isfinite(w_norm) or w_norm == 0.0:
            break
        v = w / w_norm
        new_lam = float(v @ (H @ v))
        if lam is not None and abs(new_lam - lam) <= tol * abs(new_lam):
            return sym_dev, new_lam
        lam = new_lam
    return sym_dev, float(lam if lam is not None else np.nan)


# -- dual-cell pairing --------------------------------------------------------


def dual_pairing_check(
    complex: SimplicialComplex,
    dual: DualComplex,
    p: int,
    basis: WhitneyBasis | None = None,
    pairs: str = "shared",
) -> tuple[float, dict[tuple[int, int], float]]:
    """Integrate the metric Hodge dual of each degree-p basis form over the
    dual (3-p)-cells by subdivision quadrature.

    Returns the max deviation of the pairing matrix from the Kronecker
    delta over the sampled pairs, together with the sampled entries.  The
    deviation is reported as measured; see the degree-0 closed form in the
    tests for what this pairing actually evaluates to on a single tet.
    """
    basis = basis or WhitneyBasis(complex)
    cx = complex
    entries: dict[tuple[int, int], float] = {}

    if p == 0:
        # Hodge dual of a 0-form is the volume density with the same value:
        # integrate basis-0 values over the dual 3-cells, sub-tet by sub-tet.
        pieces = dual.vertex_pieces
        owners = dual.vertex_piece_owner
        tets = dual.vertex_piece_tet
        vol = (
            np.abs(
                np.einsum(
                    "kd,kd->k",
                    np.cross(pieces[:, 1] - pieces[:, 0], pieces[:, 2] - pieces[:, 0]),
                    pieces[:, 3] - pieces[:, 0],
                )
            )
            / 6.0
        )
        for lam_t in _TET4:
            pts = np.einsum("q,kqd->kd", lam_t, pieces)
            lam = basis.bary(tets, pts)
            vals = basis.eval0(tets, lam)  # (K, 4)
            contrib = vals * (vol / len(_TET4))[:, None]
            gv = cx.tets[tets]  # (K, 4) global vertex per local slot
            for s in range(4):
                for i, j, c in zip(owners.tolist(), gv[:, s].tolist(), contrib[:, s]):
                    entries[(i, j)] = entries.get((i, j), 0.0) + float(c)
    elif p == 1:
        # Hodge dual of a 1-form is the 2-form with the same vector proxy:
        # flux through the dual-face triangles, oriented along the edge.
        tri = dual.edge_pieces
        owners = dual.edge_piece_owner
        tets = dual.edge_piece_tet
        sign = dual.edge_piece_sign
        nvec = 0.5 * np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        nvec *= sign[:, None]
        for lam_t in _TRI3:
            pts = np.einsum("q,kqd->kd", lam_t, tri)
            lam = basis.bary(tets, pts)
            vals = basis.eval1(tets, lam)  # (K, 6, 3)
            contrib = np.einsum("ksd,kd->ks", vals, nvec) / 3.0
            ge = cx.tet_edges[tets]
            for s in range(6):
                for i, j, c in zip(owners.tolist(), ge[:, s].tolist(), contrib[:, s]):
                    entries[(i, j)] = entries.get((i, j), 0.0) + float(c)
    elif p == 2:
        # Hodge dual of a 2-form is the 1-form with the same proxy:
        # line integral along the dual segments, oriented by the face normal.
        seg = dual.face_pieces
        owners = dual.face_piece_owner
        tets = dual.face_piece_tet
        sign = dual.face_piece_sign
        tang = (seg[:, 1] - seg[:, 0]) * sign[:, None]
        for t in _GAUSS2_EDGE:
            pts = seg[:, 0] + t * (seg[:, 1] - seg[:, 0])
            lam = basis.bary(tets, pts)
            vals = basis.eval2(tets, lam)  # (K, 4, 3)
            contrib = 0.5 * np.einsum("ksd,kd->ks", vals, tang)
            gf = cx.tet_faces[tets]
            for s in range(4):
                for i, j, c in zip(owners.tolist(), gf[:, s].tolist(), contrib[:, s]):
                    entries[(i, j)] = entries.get((i, j), 0.0) + float(c)
    elif p == 3:
        # Hodge dual of the tet density, evaluated at the dual nodes.
        for t in range(cx.n_tets):
            entries[(t, t)] = float(1.0 / cx.volumes[t])
    else:
        raise ValueError("degree must be in 0..3")

    dev = 0.0
    for (i, j), v in entries.items():
        want = 1.0 if i == j else 0.0
        dev = max(dev, abs(v - want))
    return dev, entries


# -- coordinate-format text dump ----------------------------------------------


def write_coo(mat: sparse.spmatrix, path: str | Path) -> None:
    """Write ``declat-coo <rows> <cols> <nnz>`` followed by one entry per line."""
    coo = sparse.coo_matrix(mat)
    lines = [f"declat-coo {coo.shape[0]} {coo.shape[1]} {coo.nnz}"]
    order = np.lexsort((coo.col, coo.row))
    cplx = np.iscomplexobj(coo.data)
    for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
        val = repr(complex(v)).strip("()") if cplx else repr(float(v))
        lines.append(f"{r} {c} {val}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_coo(path: str | Path) -> sparse.csr_matrix:
    text = Path(path).read_text().strip().splitlines()
    head = text[0].split()
    if head[:1] != ["declat-coo"]:
        raise ValueError("missing declat-coo header")
    nr, nc, nnz = int(head[1]), int(head[2]), int(head[3])
    rows, cols, vals = [], [], []
    for line in text[1 : 1 + nnz]:
        r, c, v = line.split()
        rows.append(int(r))
        cols.append(int(c))
        vals.append(complex(v) if "j" in v else float(v))
    return sparse.coo_matrix((vals, (rows, cols)), shape=(nr, nc)).tocsr()

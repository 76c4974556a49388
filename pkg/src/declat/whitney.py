"""Lowest-order Whitney forms: evaluation, reduction, interpolation.

The degree-p basis attached to a canonical (sorted-vertex) simplex is built
from barycentric coordinates and their constant per-tet gradients:

* degree 0, node i:        lambda_i
* degree 1, edge (i, j):   lambda_i grad(lambda_j) - lambda_j grad(lambda_i)
* degree 2, face (i, j, k): 2 (lambda_i grad(lambda_j) x grad(lambda_k) + cyclic)
* degree 3, tet:           the constant density 1 / volume

Cochain extraction (integration of a smooth field over each simplex) and
its right inverse, interpolation of a cochain back to a field, both live
here, along with the numerical checks of the two structural identities:
simplex-vs-basis pairing equal to the Kronecker delta, and the exterior
derivative of a basis form equal to the basis expansion of its coboundary.

All quadrature is degree-2 exact (2-point edges, 3-point triangles,
4-point tets); products of lowest-order proxies are at most quadratic per
cell, so the structural integrals are exact up to rounding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .mesh import SimplicialComplex, _TET_EDGE_SLOTS, _TET_FACE_SLOTS

__all__ = [
    "Cochain",
    "BarycentricPoint",
    "AnalyticForm",
    "OutsideMeshError",
    "WhitneyBasis",
    "barycentric",
    "whitney_eval",
    "de_rham",
    "interpolate",
    "interpolate_at_points",
    "verify_partition_duality",
    "verify_coboundary",
]

# Degree-2 symmetric quadrature rules in barycentric coordinates.
_GAUSS2_EDGE = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
_TRI3 = np.array(
    [
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ]
)
_TET_A = (5.0 + 3.0 * np.sqrt(5.0)) / 20.0
_TET_B = (5.0 - np.sqrt(5.0)) / 20.0
_TET4 = np.full((4, 4), _TET_B) + (_TET_A - _TET_B) * np.eye(4)

_EDGE_SLOT_OF_PAIR = {tuple(sorted(p)): s for s, p in enumerate(_TET_EDGE_SLOTS)}


class OutsideMeshError(ValueError):
    """Raised when a query point lies in no tet of the complex."""


@dataclass
class Cochain:
    """Degree-p coefficient array on the primal or dual lattice."""

    degree: int
    values: np.ndarray
    lattice: str = "primal"

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.degree not in (0, 1, 2, 3):
            raise ValueError("cochain degree must be in 0..3")
        if self.lattice not in ("primal", "dual"):
            raise ValueError("lattice tag must be 'primal' or 'dual'")

    @classmethod
    def zeros(
        cls, complex: SimplicialComplex, degree: int, lattice: str = "primal",
        dtype=float,
    ) -> "Cochain":
        # Dual (3-p)-cells are in bijection with primal p-simplices, so the
        # array length is the primal count either way.
        return cls(degree, np.zeros(complex.n_simplices(degree), dtype=dtype), lattice)

    def to_json(self) -> str:
        vals = self.values
        if np.iscomplexobj(vals):
            payload = {"real": vals.real.tolist(), "imag": vals.imag.tolist()}
        else:
            payload = vals.tolist()
        return json.dumps(
            {"degree": self.degree, "lattice": self.lattice, "values": payload}
        )

    @classmethod
    def from_json(cls, text: str) -> "Cochain":
        obj = json.loads(text)
        vals = obj["values"]
        if isinstance(vals, dict):
            arr = np.asarray(vals["real"]) + 1j * np.asarray(vals["imag"])
        else:
            arr = np.asarray(vals, dtype=float)
        return cls(obj["degree"], arr, obj["lattice"])


@dataclass
class BarycentricPoint:
    """A point expressed as barycentric coordinates within one tet."""

    tet: int
    lam: np.ndarray

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        if self.lam.shape != (4,):
            raise ValueError("barycentric coordinates must have length 4")
        if self.lam.min() < -1e-12 or abs(self.lam.sum() - 1.0) > 1e-12:
            raise ValueError("invalid barycentric coordinates")


@dataclass
class AnalyticForm:
    """Smooth p-form given through its proxy (scalar for p=0,3; vector else)."""

    degree: int
    fn: object

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(points))


class WhitneyBasis:
    """Per-tet caches for barycentric gradients and local index maps."""

    def __init__(self, complex: SimplicialComplex):
        cx = complex
        self.complex = cx
        tv = cx.vertices[cx.tets]  # (M, 4, 3)
        edge_mat = tv[:, 1:] - tv[:, :1]  # rows v1-v0, v2-v0, v3-v0
        self.inv_edge = np.linalg.inv(edge_mat)  # (M, 3, 3)
        grads = np.transpose(self.inv_edge, (0, 2, 1))  # rows are grad(lam_1..3)
        self.grads = np.concatenate([-grads.sum(axis=1, keepdims=True), grads], axis=1)
        self.origin = tv[:, 0]
        self.volumes = cx.volumes

        # Local edge/face vertex positions, ordered by ascending global id so
        # that every local basis function matches its canonical simplex.
        tets = cx.tets
        epair = cx.edges[cx.tet_edges]  # (M, 6, 2) global vertex ids
        self.edge_local = np.argmax(
            tets[:, None, None, :] == epair[:, :, :, None], axis=3
        )  # (M, 6, 2)
        ftri = cx.faces[cx.tet_faces]  # (M, 4, 3)
        self.face_local = np.argmax(
            tets[:, None, None, :] == ftri[:, :, :, None], axis=3
        )  # (M, 4, 3)
        self._neighbors = None

    # -- barycentric coordinates ------------------------------------------

    def bary(self, tets: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Barycentric coordinates of ``points`` (K,3) w.r.t. tets (K,)."""
        tets = np.atleast_1d(np.asarray(tets, dtype=np.int64))
        points = np.atleast_2d(points)
        rel = points - self.origin[tets]
        # lam_i = grad(lam_i) . (x - v0) for i = 1..3; lam_0 closes the sum.
        lam123 = np.einsum("kid,kd->ki", self.grads[tets, 1:], rel)
        lam0 = 1.0 - lam123.sum(axis=1, keepdims=True)
        return np.concatenate([lam0, lam123], axis=1)

    def points_from_bary(self, tets: np.ndarray, lam: np.ndarray) -> np.ndarray:
        tv = self.complex.vertices[self.complex.tets[tets]]
        return np.einsum("kq,kqd->kd", lam, tv)

    @property
    def neighbors(self) -> np.ndarray:
        if self._neighbors is None:
            self._neighbors = self.complex.tet_neighbors()
        return self._neighbors

    def locate(self, point: np.ndarray, seed: int = 0, tol: float = 1e-10) -> tuple[int, np.ndarray]:
        """Walk from a seed tet toward ``point``; exhaustive scan fallback."""
        t = int(seed)
        m = self.complex.n_tets
        for _ in range(4 * m + 8):
            lam = self.bary(np.array([t]), point.reshape(1, 3))[0]
            worst = int(np.argmin(lam))
            if lam[worst] >= -tol:
                return t, np.clip(lam, 0.0, None) / np.clip(lam, 0.0, None).sum()
            # Walking crosses the face opposite the most negative coordinate.
            nxt = self.neighbors[t, worst]
            if nxt < 0:
                break
            t = int(nxt)
        return self._scan(point, tol)

    def _scan(self, point: np.ndarray, tol: float) -> tuple[int, np.ndarray]:
        rel = point.reshape(1, 3) - self.origin
        lam123 = np.einsum("mid,md->mi", self.grads[:, 1:], rel)
        lam0 = 1.0 - lam123.sum(axis=1, keepdims=True)
        lam = np.concatenate([lam0, lam123], axis=1)
        worst = lam.min(axis=1)
        best = int(np.argmax(worst))
        if worst[best] < -tol:
            raise OutsideMeshError(f"point {point.tolist()} lies outside the mesh")
        lamb = np.clip(lam[best], 0.0, None)
        return best, lamb / lamb.sum()

    # -- basis values -------------------------------------------------------

    def eval0(self, tets: np.ndarray, lam: np.ndarray) -> np.ndarray:
        return np.asarray(lam)

    def eval1(self, tets: np.ndarray, lam: np.ndarray) -> np.ndarray:
        g = self.grads[tets]  # (K, 4, 3)
        a = self.edge_local[tets, :, 0]
        b = self.edge_local[tets, :, 1]
        k = np.arange(len(tets))[:, None]
        la, lb = lam[k, a], lam[k, b]
        ga, gb = g[k, a], g[k, b]
        return la[..., None] * gb - lb[..., None] * ga  # (K, 6, 3)

    def eval2(self, tets: np.ndarray, lam: np.ndarray) -> np.ndarray:
        g = self.grads[tets]
        k = np.arange(len(tets))[:, None]
        out = 0.0
        for (ia, ib, ic) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            pa = self.face_local[tets, :, ia]
            pb = self.face_local[tets, :, ib]
            pc = self.face_local[tets, :, ic]
            out = out + lam[k, pa][..., None] * np.cross(g[k, pb], g[k, pc])
        return 2.0 * out  # (K, 4, 3)

    def eval3(self, tets: np.ndarray) -> np.ndarray:
        return 1.0 / self.volumes[tets]

    def eval(self, p: int, tets: np.ndarray, lam: np.ndarray) -> np.ndarray:
        if p == 0:
            return self.eval0(tets, lam)
        if p == 1:
            return self.eval1(tets, lam)
        if p == 2:
            return self.eval2(tets, lam)
        if p == 3:
            return self.eval3(tets)
        raise ValueError("degree must be in 0..3")

    def local_indices(self, p: int, tets: np.ndarray) -> np.ndarray:
        """Global simplex ids backing each local basis slot."""
        cx = self.complex
        if p == 0:
            return cx.tets[tets]
        if p == 1:
            return cx.tet_edges[tets]
        if p == 2:
            return cx.tet_faces[tets]
        return np.asarray(tets).reshape(-1, 1)

    # -- local incidence helpers (signs consistent with the global matrices)

    def local_grad_signs(self) -> np.ndarray:
        """(M, 6, 4) entries of C^0 restricted to each tet's edges/vertices."""
        m = self.complex.n_tets
        out = np.zeros((m, 6, 4), dtype=np.int64)
        rows = np.arange(m)[:, None]
        slots = np.arange(6)[None, :]
        out[rows, slots, self.edge_local[:, :, 0]] = -1
        out[rows, slots, self.edge_local[:, :, 1]] = 1
        return out

    def local_curl_signs(self) -> np.ndarray:
        """(M, 4, 6) entries of C^1 restricted to each tet's faces/edges."""
        cx = self.complex
        m = cx.n_tets
        ftri = cx.faces[cx.tet_faces]  # ascending global triples
        pair_slots = np.array([(1, 2), (0, 2), (0, 1)])
        signs = np.array([1, -1, 1], dtype=np.int64)
        fpairs = ftri[:, :, pair_slots]  # (M, 4, 3, 2) global vertex pairs
        epairs = cx.edges[cx.tet_edges]  # (M, 6, 2)
        match = np.all(
            fpairs[:, :, :, None, :] == epairs[:, None, None, :, :], axis=-1
        )  # (M, 4, 3, 6)
        out = np.einsum("mfps,p->mfs", match.astype(np.int64), signs)
        return out


def barycentric(
    complex: SimplicialComplex, point, basis: WhitneyBasis | None = None, seed: int = 0
) -> BarycentricPoint:
    """Locate a point and return its tet index and barycentric coordinates."""
    basis = basis or WhitneyBasis(complex)
    t, lam = basis.locate(np.asarray(point, dtype=float), seed=seed)
    return BarycentricPoint(t, lam)


def whitney_eval(
    complex_or_basis, p: int, element: int, at: BarycentricPoint
) -> np.ndarray | float:
    """Value of the degree-p basis form of ``element`` at a located point.

    Returns 0 when the element is not a face of the point's tet (compact
    support).
    """
    basis = (
        complex_or_basis
        if isinstance(complex_or_basis, WhitneyBasis)
        else WhitneyBasis(complex_or_basis)
    )
    tids = np.array([at.tet])
    lam = at.lam.reshape(1, 4)
    local = basis.local_indices(p, tids)[0]
    hits = np.flatnonzero(local == element)
    if len(hits) == 0:
        return 0.0 if p in (0, 3) else np.zeros(3)
    vals = basis.eval(p, tids, lam)
    if p in (0, 3):
        return float(vals[0, hits[0]]) if p == 0 else float(vals[0])
    return vals[0, hits[0]]


def _as_callable(form) -> AnalyticForm:
    if isinstance(form, AnalyticForm):
        return form
    raise TypeError("expected an AnalyticForm")


def de_rham(
    form: AnalyticForm,
    complex: SimplicialComplex,
    p: int | None = None,
    basis: WhitneyBasis | None = None,
) -> Cochain:
    """Reduce a smooth form to a primal cochain by integrating simplex-wise.

    Degree-2 Gaussian rules per simplex; exact for polynomial proxies up to
    quadratic, so reducing an interpolated lowest-order field is exact.
    """
    form = _as_callable(form)
    p = form.degree if p is None else p
    if p != form.degree:
        raise ValueError("form degree does not match requested cochain degree")
    cx = complex
    if p == 0:
        return Cochain(0, np.asarray(form(cx.vertices), dtype=None))
    if p == 1:
        a = cx.vertices[cx.edges[:, 0]]
        b = cx.vertices[cx.edges[:, 1]]
        tang = b - a
        vals = 0.0
        for t in _GAUSS2_EDGE:
            pts = a + t * tang
            vals = vals + 0.5 * np.einsum("kd,kd->k", np.asarray(form(pts)), tang)
        return Cochain(1, vals)
    if p == 2:
        va = cx.vertices[cx.faces[:, 0]]
        vb = cx.vertices[cx.faces[:, 1]]
        vc = cx.vertices[cx.faces[:, 2]]
        nvec = 0.5 * np.cross(vb - va, vc - va)  # area-weighted canonical normal
        vals = 0.0
        for lam in _TRI3:
            pts = lam[0] * va + lam[1] * vb + lam[2] * vc
            vals = vals + np.einsum("kd,kd->k", np.asarray(form(pts)), nvec) / 3.0
        return Cochain(2, vals)
    if p == 3:
        tv = cx.vertices[cx.tets]
        vals = 0.0
        for lam in _TET4:
            pts = np.einsum("q,kqd->kd", lam, tv)
            vals = vals + 0.25 * np.asarray(form(pts))
        return Cochain(3, vals * cx.volumes)
    raise ValueError("degree must be in 0..3")


def interpolate(
    complex_or_basis, cochain: Cochain, at: BarycentricPoint
) -> np.ndarray | float:
    """Whitney interpolation of a primal cochain at a located point."""
    basis = (
        complex_or_basis
        if isinstance(complex_or_basis, WhitneyBasis)
        else WhitneyBasis(complex_or_basis)
    )
    if cochain.lattice != "primal":
        raise ValueError("interpolation expects a primal cochain")
    tids = np.array([at.tet])
    lam = at.lam.reshape(1, 4)
    coeffs = cochain.values[basis.local_indices(cochain.degree, tids)]
    vals = basis.eval(cochain.degree, tids, lam)
    if cochain.degree in (0,):
        return complex(np.einsum("kq,kq->k", coeffs, vals)[0]) if np.iscomplexobj(
            coeffs
        ) else float(np.einsum("kq,kq->k", coeffs, vals)[0])
    if cochain.degree == 3:
        out = coeffs[:, 0] * vals
        return complex(out[0]) if np.iscomplexobj(coeffs) else float(out[0])
    return np.einsum("kq,kqd->kd", coeffs, vals)[0]


def interpolate_at_points(
    basis: WhitneyBasis, cochain: Cochain, points: np.ndarray, seed: int = 0
) -> np.ndarray:
    """Interpolate at many points, walking between consecutive locations."""
    points = np.atleast_2d(points)
    out = []
    t = seed
    for x in points:
        t, lam = basis.locate(x, seed=t)
        out.append(interpolate(basis, cochain, BarycentricPoint(t, lam)))
    return np.asarray(out)


# -- structural identity checks ---------------------------------------------


def _pair_owners(local_ids: np.ndarray) -> dict[tuple[int, int], tuple[int, int, int]]:
    """First owning tet for every (i, j) sharing one, with local slots."""
    owners: dict[tuple[int, int], tuple[int, int, int]] = {}
    n_loc = local_ids.shape[1]
    for t in range(local_ids.shape[0]):
        ids = local_ids[t]
        for si in range(n_loc):
            for sj in range(n_loc):
                key = (int(ids[si]), int(ids[sj]))
                if key not in owners:
                    owners[key] = (t, si, sj)
    return owners


def verify_partition_duality(
    complex: SimplicialComplex, p: int, basis: WhitneyBasis | None = None
) -> float:
    """Max deviation of the pairing <simplex_i, basis_j> from the identity.

    Scans every (i, j) pair sharing at least one tet; the pairing vanishes
    identically elsewhere because the basis has compact support and its
    trace on outside simplices is zero.
    """
    basis = basis or WhitneyBasis(complex)
    cx = complex
    local = basis.local_indices(p, np.arange(cx.n_tets))
    owners = _pair_owners(local)

    dev = 0.0
    by_tet: dict[int, list[tuple[int, int, int, int]]] = {}
    for (gi, gj), (t, si, sj) in owners.items():
        by_tet.setdefault(t, []).append((gi, gj, si, sj))

    for t, items in by_tet.items():
        tid = np.array([t])
        ids = basis.local_indices(p, tid)[0]
        if p == 0:
            verts = cx.vertices[cx.tets[t]]
            lam = basis.bary(np.repeat(tid, 4), verts)
            vals = basis.eval0(np.repeat(tid, 4), lam)  # (4, 4)
            integ = vals
        elif p == 1:
            epair = cx.edges[ids]
            a = cx.vertices[epair[:, 0]]
            b = cx.vertices[epair[:, 1]]
            tang = b - a
            integ = np.zeros((6, 6))
            for s in _GAUSS2_EDGE:
                pts = a + s * tang
                lam = basis.bary(np.repeat(tid, 6), pts)
                w = basis.eval1(np.repeat(tid, 6), lam)  # (6, 6, 3)
                integ += 0.5 * np.einsum("ijd,id->ij", w, tang)
        elif p == 2:
            ftri = cx.faces[ids]
            va, vb, vc = (cx.vertices[ftri[:, k]] for k in range(3))
            nvec = 0.5 * np.cross(vb - va, vc - va)
            integ = np.zeros((4, 4))
            for lam_t in _TRI3:
                pts = lam_t[0] * va + lam_t[1] * vb + lam_t[2] * vc
                lam = basis.bary(np.repeat(tid, 4), pts)
                w = basis.eval2(np.repeat(tid, 4), lam)  # (4, 4, 3)
                integ += np.einsum("ijd,id->ij", w, nvec) / 3.0
        else:
            raise ValueError("pairing check covers degrees 0, 1, 2")

        for gi, gj, si, sj in items:
            want = 1.0 if gi == gj else 0.0
            dev = max(dev, abs(float(integ[si, sj]) - want))
    return dev


def verify_coboundary(
    complex: SimplicialComplex, p: int, basis: WhitneyBasis | None = None
) -> float:
    """Max pointwise deviation of d(basis^{p-1}) from its coboundary expansion.

    Both sides are evaluated at the degree-2 tet quadrature nodes and the
    barycenter of every tet.
    """
    basis = basis or WhitneyBasis(complex)
    cx = complex
    tids = np.arange(cx.n_tets)
    lam_nodes = np.vstack([_TET4, np.full((1, 4), 0.25)])

    dev = 0.0
    if p == 1:
        signs = basis.local_grad_signs().astype(float)  # (M, 6, 4)
        for lam_t in lam_nodes:
            lam = np.broadcast_to(lam_t, (cx.n_tets, 4))
            w1 = basis.eval1(tids, lam)  # (M, 6, 3)
            rhs = np.einsum("msv,msd->mvd", signs, w1)
            dev = max(dev, float(np.abs(rhs - basis.grads).max()))
        return dev
    if p == 2:
        curls = np.zeros((cx.n_tets, 6, 3))
        g = basis.grads
        k = np.arange(cx.n_tets)[:, None]
        a = basis.edge_local[:, :, 0]
        b = basis.edge_local[:, :, 1]
        curls = 2.0 * np.cross(g[k, a], g[k, b])  # d of the edge basis
        signs = basis.local_curl_signs().astype(float)  # (M, 4, 6)
        for lam_t in lam_nodes:
            lam = np.broadcast_to(lam_t, (cx.n_tets, 4))
            w2 = basis.eval2(tids, lam)  # (M, 4, 3)
            rhs = np.einsum("mfs,mfd->msd", signs, w2)
            dev = max(dev, float(np.abs(rhs - curls).max()))
        return dev
    if p == 3:
        g = basis.grads
        k = np.arange(cx.n_tets)[:, None]
        fa = basis.face_local[:, :, 0]
        fb = basis.face_local[:, :, 1]
        fc = basis.face_local[:, :, 2]
        divs = 6.0 * np.einsum(
            "mfd,mfd->mf", g[k, fa], np.cross(g[k, fb], g[k, fc])
        )  # (M, 4), d of the face basis
        rhs = cx.tet_face_signs / cx.volumes[:, None]
        return float(np.abs(rhs - divs).max())
    raise ValueError("coboundary check covers degrees 1, 2, 3")

"""Exact (no floating tolerance) linear algebra over the integers and GF(2).

Rank computations back the homology and degree-of-freedom bookkeeping.
Two routes are provided: fraction-free integer elimination (Bareiss) for
desk-scale matrices, and a bitset elimination over GF(2) that scales to
meshes with tens of thousands of elements.  A GF(2) rank is always a lower
bound on the rational rank, which is what makes the certificates in
:mod:`declat.dof` exact rather than probabilistic.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

__all__ = ["integer_rank", "gf2_rank", "grounded_components"]


def _to_int_rows(mat) -> list[list[int]]:
    if sparse.issparse(mat):
        mat = mat.toarray()
    arr = np.asarray(mat)
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.round(arr)):
            raise ValueError("integer_rank requires an integer matrix")
        arr = arr.astype(np.int64)
    return [[int(x) for x in row] for row in arr]


def integer_rank(mat) -> int:
    """Exact rank over the rationals via Bareiss fraction-free elimination.

    Entries are Python integers throughout, so no pivots are lost to
    rounding.  Cost is cubic; keep inputs at desk scale.
    """
    a = _to_int_rows(mat)
    if not a or not a[0]:
        return 0
    m, n = len(a), len(a[0])
    rank = 0
    prev = 1
    row = 0
    for col in range(n):
        pivot_row = None
        for r in range(row, m):
            if a[r][col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        a[row], a[pivot_row] = a[pivot_row], a[row]
        piv = a[row][col]
        for r in range(row + 1, m):
            arc = a[r][col]
            if arc == 0 and prev == 1:
                continue
            ar = a[r]
            ap = a[row]
            for c in range(col + 1, n):
                ar[c] = (piv * ar[c] - arc * ap[c]) // prev
            ar[col] = 0
        prev = piv
        rank += 1
        row += 1
        if row == m:
            break
    return rank


def gf2_rank(mat) -> int:
    """Rank over GF(2), rows as arbitrary-precision bitsets.

    For an integer matrix this is a lower bound on the rational rank
    (specialization can only lose rank).  Rows are reduced against a pivot
    table keyed by lowest set bit, which behaves well on mesh incidence
    matrices ordered by construction.
    """
    if sparse.issparse(mat):
        coo = mat.tocoo()
        odd = (np.asarray(coo.data) % 2) != 0
        rows_idx = coo.row[odd]
        cols_idx = coo.col[odd]
        nrows = mat.shape[0]
        packed = [0] * nrows
        for r, c in zip(rows_idx.tolist(), cols_idx.tolist()):
            packed[r] ^= 1 << c
    else:
        arr = (np.asarray(mat) % 2).astype(np.uint8)
        packed = []
        for row in arr:
            x = 0
            for c in np.flatnonzero(row).tolist():
                x |= 1 << c
            packed.append(x)

    pivots: dict[int, int] = {}
    rank = 0
    for x in packed:
        while x:
            low = (x & -x).bit_length() - 1
            piv = pivots.get(low)
            if piv is None:
                pivots[low] = x
                rank += 1
                break
            x ^= piv
    return rank


def grounded_components(
    n_vertices: int,
    edges: np.ndarray,
    interior_vertices: np.ndarray,
    interior_edges: np.ndarray,
) -> tuple[bool, int]:
    """Certify that every interior vertex reaches the boundary by interior edges.

    Returns ``(grounded, n_floating)``.  When ``grounded`` is True, the
    vertex-to-edge incidence restricted to interior rows and columns has
    full column rank over every field: a nonzero function on interior
    vertices (extended by zero to the boundary) cannot have zero gradient
    on all interior edges.
    """
    parent = list(range(n_vertices))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    interior_vertex_mask = np.zeros(n_vertices, dtype=bool)
    interior_vertex_mask[interior_vertices] = True
    for a, b in edges[interior_edges]:
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[ra] = rb

    touches_boundary: dict[int, bool] = {}
    for v in range(n_vertices):
        root = find(v)
        if not interior_vertex_mask[v]:
            touches_boundary[root] = True
        else:
            touches_boundary.setdefault(root, False)

    floating = sum(
        1 for v in interior_vertices.tolist() if not touches_boundary[find(int(v))]
    )
    return (floating == 0, floating)

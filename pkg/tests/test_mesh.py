import numpy as np
import pytest

from declat import generators
from declat.mesh import (
    MeshError,
    SimplicialComplex,
    betti_numbers,
    classify_boundary,
    euler_audit,
    load_mesh,
    parse_mesh,
    write_mesh,
)

from _oracles import boundary_faces, enumerate_skeleton


def test_single_tet_counts(single_tet):
    assert single_tet.counts() == (4, 6, 4, 1)


def test_kuhn_counts_against_enumeration(kuhn):
    edges, faces = enumerate_skeleton(kuhn.tets.tolist())
    assert kuhn.counts() == (8, len(edges), len(faces), 6)
    assert kuhn.counts() == (8, 19, 18, 6)
    assert {tuple(e) for e in kuhn.edges.tolist()} == edges
    assert {tuple(f) for f in kuhn.faces.tolist()} == faces


def test_vertex_out_of_range():
    with pytest.raises(MeshError, match="out of range"):
        SimplicialComplex(np.zeros((3, 3)), np.array([[0, 1, 2, 3]]))


def test_degenerate_tet_rejected():
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0.5, 0.5, 0.0]], dtype=float)
    with pytest.raises(MeshError, match="degenerate"):
        SimplicialComplex(verts, np.array([[0, 1, 2, 3]]))


def test_repeated_vertex_rejected():
    verts = np.eye(4, 3)
    with pytest.raises(MeshError, match="repeated"):
        SimplicialComplex(verts, np.array([[0, 1, 2, 2]]))


def test_duplicate_tets_merged(single_tet):
    doubled = SimplicialComplex(
        single_tet.vertices, np.vstack([single_tet.tets, single_tet.tets[:, ::-1]])
    )
    assert doubled.n_tets == 1


def test_parse_and_roundtrip(tmp_path, kuhn):
    path = tmp_path / "kuhn.mesh"
    write_mesh(kuhn, path)
    back = load_mesh(path)
    assert back.counts() == kuhn.counts()
    assert np.array_equal(back.tets, kuhn.tets)
    assert np.array_equal(back.vertices, kuhn.vertices)


def test_parse_rejects_bad_header():
    with pytest.raises(MeshError, match="header"):
        parse_mesh("declat-mesh 2\nvertices 0\ntets 0\n")


def test_parse_handles_comments():
    text = """# a comment
declat-mesh 1
vertices 4   # four of them
0 0 0
1 0 0
0 1 0
0 0 1
tets 1
0 1 2 3
"""
    mesh = parse_mesh(text)
    assert mesh.counts() == (4, 6, 4, 1)


def test_parse_truncated_sections():
    with pytest.raises(MeshError):
        parse_mesh("declat-mesh 1\nvertices 2\n0 0 0\n")


def test_incidence_row_sizes(all_meshes):
    for mesh in all_meshes.values():
        for p, expected in ((0, 2), (1, 3), (2, 4)):
            C = mesh.incidence(p)
            counts = np.diff(C.indptr)
            assert np.all(counts == expected)
            assert np.all(np.isin(C.data, (-1, 1)))


def test_triangle_boundary_alternating_sum(single_tet):
    # Face (0,1,2): +[1,2] - [0,2] + [0,1] in the sorted-index convention.
    C1 = single_tet.incidence(1)
    faces = [tuple(f) for f in single_tet.faces.tolist()]
    edges = [tuple(e) for e in single_tet.edges.tolist()]
    row = C1[faces.index((0, 1, 2))].toarray().ravel()
    assert row[edges.index((1, 2))] == 1
    assert row[edges.index((0, 2))] == -1
    assert row[edges.index((0, 1))] == 1


def test_nilpotency_exact(all_meshes):
    for name, mesh in all_meshes.items():
        for p in (0, 1):
            comp = mesh.incidence(p + 1) @ mesh.incidence(p)
            assert abs(comp).max() == 0, name


def test_orientation_invariance_under_permutation(box3, rng):
    tets = box3.tets.copy()
    for row in tets:
        rng.shuffle(row)
    rng.shuffle(tets)
    rebuilt = SimplicialComplex(box3.vertices, tets)
    for p in range(3):
        a = box3.incidence(p)
        b = rebuilt.incidence(p)
        assert (a != b).nnz == 0


def test_boundary_single_tet(single_tet):
    cls = classify_boundary(single_tet)
    assert cls.n_boundary(0) == 4
    assert cls.n_boundary(1) == 6
    assert cls.n_boundary(2) == 4
    assert cls.n_interior(2) == 0


def test_boundary_kuhn_against_coface_count(kuhn):
    cls = classify_boundary(kuhn)
    oracle = boundary_faces(kuhn.tets.tolist())
    assert cls.n_boundary(2) == len(oracle) == 12
    got = {tuple(kuhn.faces[i]) for i in cls.boundary_faces}
    assert got == oracle


def test_two_glued_tets_share_interior_face():
    verts = np.array(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=float
    )
    mesh = SimplicialComplex(verts, np.array([[0, 1, 2, 3], [1, 2, 3, 4]]))
    cls = classify_boundary(mesh)
    assert cls.n_interior(2) == 1
    assert cls.n_boundary(2) == 6


def test_nonmanifold_face_rejected():
    verts = np.array(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, -1], [1, 1, 1]],
        dtype=float,
    )
    mesh = SimplicialComplex(
        verts, np.array([[0, 1, 2, 3], [0, 1, 2, 4], [0, 1, 2, 5]])
    )
    with pytest.raises(MeshError, match="non-manifold"):
        classify_boundary(mesh)


def test_euler_single_tet(single_tet):
    rep = euler_audit(single_tet, classify_boundary(single_tet), genus=0)
    assert rep.bulk == (4 - 6, 1 - 4 + 1)
    assert rep.boundary == (4 - 6, 2 - 4)
    assert rep.passed


def test_euler_kuhn_from_enumeration(kuhn):
    edges, faces = enumerate_skeleton(kuhn.tets.tolist())
    assert 8 - len(edges) == 1 - len(faces) + 6  # -11 both sides
    rep = euler_audit(kuhn, classify_boundary(kuhn))
    assert rep.genus == 0 and rep.passed


def test_euler_annulus_needs_genus(annulus8):
    rep = euler_audit(annulus8, classify_boundary(annulus8))
    assert rep.genus == 1
    assert rep.passed
    flat = euler_audit(annulus8, classify_boundary(annulus8), genus=0)
    assert not flat.passed


@pytest.mark.parametrize(
    "maker,expected",
    [
        (generators.single_tet, (1, 0, 0)),
        (generators.kuhn_cube, (1, 0, 0)),
        (lambda: generators.annulus_mesh(8), (1, 1, 0)),
    ],
)
def test_betti_numbers(maker, expected):
    assert betti_numbers(maker()) == expected


def test_betti_annulus_against_sympy(annulus8):
    sympy = pytest.importorskip("sympy")
    ranks = [
        sympy.Matrix(annulus8.incidence(p).toarray()).rank() for p in range(3)
    ]
    n = [annulus8.n_simplices(p) for p in range(4)]
    oracle = (n[0] - ranks[0], n[1] - ranks[0] - ranks[1], n[2] - ranks[1] - ranks[2])
    assert betti_numbers(annulus8) == oracle


def test_dual_volume_partition(all_meshes):
    from declat.dual import DualComplex

    for name, mesh in all_meshes.items():
        dual = DualComplex(mesh)
        vols = dual.vertex_cell_volumes()
        assert np.all(vols > 0)
        total = mesh.volumes.sum()
        assert abs(vols.sum() - total) <= 1e-12 * total, name


def test_dual_vertex_cells_quarter_volume(single_tet):
    from declat.dual import DualComplex

    vols = DualComplex(single_tet).vertex_cell_volumes()
    np.testing.assert_allclose(vols, single_tet.volumes[0] / 4.0, rtol=1e-13)


def test_dual_face_cells_are_center_segments(kuhn):
    from declat.dual import DualComplex

    dual = DualComplex(kuhn)
    cls = classify_boundary(kuhn)
    ft = kuhn.face_tets
    for f in cls.interior_faces.tolist():
        pieces = np.flatnonzero(dual.face_piece_owner == f)
        assert len(pieces) == 2  # one segment per incident tet center
        for k in pieces:
            assert np.allclose(dual.face_pieces[k, 0], dual.face_centers[f])
            t = dual.face_piece_tet[k]
            assert t in ft[f]
            assert np.allclose(dual.face_pieces[k, 1], dual.tet_centers[t])

import numpy as np
import pytest
from scipy.spatial import Delaunay

from voronoi_nns import (DimensionError, DuplicatePointError, Triangulation,
                         generate_surface_cloud, new_triangulation)


def qhull_neighbors(P, v):
    indptr, indices = Delaunay(P).vertex_neighbor_vertices
    return np.sort(indices[indptr[v]: indptr[v + 1]])


def insert_all(P, seed=0):
    tri = Triangulation(P.shape[1], seed=seed)
    return tri, [tri.insert(p).encroached for p in P]


def test_triangle_example():
    tri, enc = insert_all(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    assert [e.tolist() for e in enc] == [[], [0], [0, 1]]
    assert tri.n_simplices == 1 and tri.validate()[0]


def test_square_with_center_last():
    P = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]])
    tri, enc = insert_all(P)
    assert enc[-1].tolist() == [0, 1, 2, 3]
    assert tri.validate() == (True, "ok")


@pytest.mark.parametrize("d", [2, 3])
def test_encroached_equals_qhull_adjacency_on_prefixes(rng, d):
    P = rng.random((150, d))
    tri, enc = insert_all(P)
    for j in range(d + 1, len(P)):
        assert np.array_equal(enc[j], qhull_neighbors(P[: j + 1], j)), j
    for v in range(0, len(P), 7):
        assert np.array_equal(tri.neighbors(v), qhull_neighbors(P, v))


@pytest.mark.parametrize("d", [2, 3])
def test_final_adjacency_matches_qhull(rng, d):
    P = rng.standard_normal((1000, d))
    tri, _ = insert_all(P, seed=3)
    indptr, indices = Delaunay(P).vertex_neighbor_vertices
    for v in range(len(P)):
        assert np.array_equal(tri.neighbors(v), np.sort(indices[indptr[v]: indptr[v + 1]]))
    assert tri.validate()[0]


@pytest.mark.parametrize("d", [2, 3])
def test_degenerate_grids_validate(d):
    side = 9 if d == 2 else 5
    g = np.stack(np.meshgrid(*[np.arange(side, dtype=float)] * d), -1).reshape(-1, d)
    tri, _ = insert_all(g)
    ok, msg = tri.validate()
    assert ok, msg
    # the walk never needed its full-scan fallback on this input
    assert tri.walk_fallbacks == 0


@pytest.mark.parametrize("kind", ["sphere", "jittered_line"])
def test_surface_clouds_validate(kind):
    P = generate_surface_cloud(kind, 600, seed=2, dimension=3)
    tri, _ = insert_all(P)
    assert tri.validate()[0]


def test_presimplex_over_approximation_3d():
    P = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0], [3, 1, 0],
                  [0, 0, 1]], dtype=float)
    tri = Triangulation(3)
    ranks, enc = [], []
    for p in P:
        enc.append(tri.insert(p).encroached.tolist())
        ranks.append(tri.rank)
    assert ranks == [1, 2, 2, 3, 3, 4]
    # every earlier vertex while the set is flat
    assert enc[:5] == [[], [0], [0, 1], [0, 1, 2], [0, 1, 2, 3]]
    assert enc[5] == tri.neighbors(5).tolist()
    assert tri.pre_simplex_set.size == 0 or tri.rank == 4
    assert tri.validate()[0]


def test_collinear_prefix_neighbors_3d():
    tri = Triangulation(3)
    for p in ([0, 0, 0], [1, 1, 1], [3, 3, 3]):
        tri.insert(p)
    assert tri.rank == 2 and tri.neighbors(0).tolist() == [1, 2]


def test_collinear_then_full_2d():
    P = np.array([[0, 0], [1, 0], [2, 0], [0, 1]], dtype=float)
    tri, enc = insert_all(P)
    assert [e.tolist() for e in enc] == [[], [0], [0, 1], [0, 1, 2]]
    assert tri.n_simplices == 2


def test_duplicates_rejected():
    tri = Triangulation(2)
    tri.insert([0, 0])
    with pytest.raises(DuplicatePointError):
        tri.insert([0, 0])
    for p in ([1, 0], [0, 1], [1, 1]):
        tri.insert(p)
    with pytest.raises(DuplicatePointError):
        tri.insert([1, 0])
    assert tri.n_vertices == 4 and tri.validate()[0]


def test_validate_detects_bad_quad():
    P = np.array([[0, 0], [1, 0], [0, 1], [3, 3]], dtype=float)
    good = Triangulation.from_simplices(P, [[0, 1, 2], [1, 3, 2]])
    assert good.validate() == (True, "ok")
    bad = Triangulation.from_simplices(P, [[0, 1, 3], [0, 3, 2]])
    ok, msg = bad.validate()
    assert not ok and "circumsphere" in msg


def test_locate_and_hints(rng):
    P = rng.random((300, 2))
    tri = Triangulation(2)
    for i, p in enumerate(P):
        tri.insert(p, hint=i - 1 if i else None)
    cell, outside = tri.locate([0.5, 0.5])
    verts = tri.cell_vertices(cell)
    assert not outside and (verts >= 0).all()
    from voronoi_nns import orient
    for k in range(3):
        s = P[verts].copy()
        s[k] = [0.5, 0.5]
        assert orient(s) >= 0
    _, outside = tri.locate([5.0, 5.0])
    assert outside


def test_errors():
    with pytest.raises(DimensionError):
        Triangulation(4)
    tri = new_triangulation(3)
    with pytest.raises(DimensionError):
        tri.insert([0, 0])
    with pytest.raises(ValueError):
        tri.insert([0, 0, np.inf])
    with pytest.raises(IndexError):
        tri.neighbors(0)
    with pytest.raises(RuntimeError):
        tri.locate([0, 0, 0])

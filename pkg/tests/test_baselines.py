import numpy as np
import pytest

from conftest import brute_nearest
from voronoi_nns import (DimensionError, KdTree, UniformGrid, generate_queries,
                         generate_surface_cloud, linear_nearest, linear_nearest_batch)
from voronoi_nns.baselines import grid_build, grid_nearest, kd_build, kd_nearest
from voronoi_nns.geometry import Aabb


def test_linear_prefix_and_ties():
    P = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 0.1]])
    assert linear_nearest(P, [1.0, 0.0]) == 2
    assert linear_nearest(P, [1.0, 0.0], prefix_k=2) == 0
    with pytest.raises(ValueError):
        linear_nearest(P, [0, 0], prefix_k=0)
    with pytest.raises(DimensionError):
        linear_nearest(P, [0, 0, 0])


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("kind", ["uniform_cube", "sphere", "jittered_line"])
def test_baselines_agree_with_linear(d, kind):
    P = generate_surface_cloud(kind, 2000, seed=5, dimension=d)
    Q = generate_queries(Aabb.of(P), 2.0, 300, seed=6)
    want = brute_nearest(P, Q)
    assert np.array_equal(linear_nearest_batch(P, Q), want)
    for idx in (KdTree(P), KdTree(P, leaf_size=1), UniformGrid(P)):
        got, comps = idx.query_batch(Q)
        assert np.array_equal(got, want)
        assert comps.min() >= 1 and comps.max() <= len(P)


def test_far_queries_and_grid_ties():
    g = np.stack(np.meshgrid(np.arange(20.0), np.arange(20.0)), -1).reshape(-1, 2)
    Q = np.array([[0.5, 0.5], [9.5, 3.5], [-100.0, 7.5], [1e6, -1e6], [19.5, 19.5]])
    want = brute_nearest(g, Q)
    for idx in (KdTree(g), UniformGrid(g), UniformGrid(g, cell_size=0.3)):
        assert np.array_equal(idx.query_batch(Q)[0], want)


def test_nearest_other_and_helpers(rng):
    P = rng.random((300, 3))
    tree = kd_build(P)
    for i in range(0, 300, 37):
        d2 = ((P - P[i]) ** 2).sum(1)
        d2[i] = np.inf
        assert tree.nearest_other(i) == int(np.argmin(d2))
    q = rng.random(3)
    assert kd_nearest(tree, q) == grid_nearest(grid_build(P), q) == linear_nearest(P, q)
    assert tree.nbytes() > P.nbytes


def test_grid_cell_size(rng):
    P = rng.random((4000, 2))
    grid = UniformGrid(P)
    # mean spacing of uniform points is about 0.5 / sqrt(n)
    assert 0.5 * 1.5 / 63 < grid.cell_size < 2 * 1.5 / 63
    assert 1 <= grid.n_cells <= 4000


def test_single_point_and_errors():
    for idx in (KdTree([[1.0, 2.0]]), UniformGrid([[1.0, 2.0]])):
        assert idx.nearest([5.0, 5.0])[0] == 0
    with pytest.raises(ValueError):
        KdTree(np.empty((0, 2)))
    with pytest.raises(ValueError):
        KdTree([[0.0, 0.0]], leaf_size=0)
    with pytest.raises(ValueError):
        UniformGrid(np.empty((0, 3)))

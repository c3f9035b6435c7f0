import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_fps
from voronoi_nns import (DimensionError, DuplicatePointError, InsertionOrder,
                         OrderStrategy, SegmentTree, fps_order, generate_surface_cloud, identity_order, spatial_sort)
from voronoi_nns.ordering import _brio_rounds


def grid(side, d):
    return np.stack(np.meshgrid(*[np.arange(side, dtype=float)] * d), -1).reshape(-1, d)


class TestSpatialSort:
    def test_is_permutation_and_deterministic(self, rng):
        P = rng.random((5000, 3))
        a = spatial_sort(P, seed=4)
        assert a.strategy is OrderStrategy.SPATIAL
        assert np.array_equal(np.sort(a.permutation), np.arange(5000))
        assert np.array_equal(a.permutation, spatial_sort(P, seed=4).permutation)
        assert not np.array_equal(a.permutation, spatial_sort(P, seed=5).permutation)

    def test_single_point(self):
        assert spatial_sort([[1.0, 2.0]]).permutation.tolist() == [0]

    def test_round_sizes(self):
        assert _brio_rounds(4096) == [0, 16, 64, 256, 1024, 4096]
        assert _brio_rounds(10) == [0, 10]

    def test_final_round_is_local(self):
        g = grid(64, 2)
        perm = spatial_sort(g).permutation
        last = g[perm[1024:]]
        steps = np.linalg.norm(np.diff(last, axis=0), axis=1)
        assert steps.max() <= 4.0
        assert np.median(steps) == 1.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            spatial_sort(np.empty((0, 2)))


class TestFarthestPoint:
    @pytest.mark.parametrize("d", [2, 3])
    @pytest.mark.parametrize("start", [0, 17, 499])
    def test_matches_quadratic_oracle(self, rng, d, start):
        P = rng.random((500, d))
        o = fps_order(P, start_index=start)
        want, dist = brute_fps(P, start)
        assert np.array_equal(o.permutation, want)
        assert np.allclose(o.fps_min_distances, dist)

    @pytest.mark.parametrize("d", [2, 3])
    def test_ties_on_grid_follow_smallest_index(self, d):
        P = grid(7 if d == 2 else 5, d)
        o = fps_order(P, start_index=3)
        assert np.array_equal(o.permutation, brute_fps(P, 3)[0])

    def test_small_example(self):
        P = np.array([[0.0], [1.0], [0.4]])
        with pytest.raises(DimensionError):
            fps_order(P)
        P2 = np.array([[0.0, 0.0], [1.0, 0.0], [0.4, 0.0]])
        assert fps_order(P2).permutation.tolist() == [0, 1, 2]

    def test_distances_non_increasing(self):
        P = generate_surface_cloud("sphere", 3000, seed=1, dimension=3)
        d = fps_order(P).fps_min_distances
        assert np.isinf(d[0]) and np.all(np.diff(d[1:]) <= 0)

    def test_single_point(self):
        o = fps_order([[0.5, 0.5, 0.5]])
        assert o.permutation.tolist() == [0] and np.isinf(o.fps_min_distances[0])

    def test_bucket_partition_invariant(self, rng):
        # asserts internally after every insertion
        fps_order(rng.random((200, 2)), check_buckets=True)
        fps_order(rng.random((120, 3)), start_index=5, check_buckets=True)

    def test_errors(self, rng):
        with pytest.raises(DuplicatePointError):
            fps_order([[0, 0], [1, 1], [0, 0]])
        with pytest.raises(IndexError):
            fps_order(rng.random((5, 2)), start_index=5)


class TestInsertionOrder:
    def test_validation(self):
        with pytest.raises(ValueError):
            InsertionOrder([0, 0, 1], "identity")
        with pytest.raises(ValueError):
            InsertionOrder([0, 3], "identity")
        with pytest.raises(ValueError):
            InsertionOrder([0, 1], "random")
        o = InsertionOrder([1, 0], "farthest_point")
        assert o.strategy is OrderStrategy.FARTHEST_POINT and len(o) == 2
        with pytest.raises(ValueError):
            o.permutation[0] = 0
        assert identity_order(3).permutation.tolist() == [0, 1, 2]


class TestSegmentTree:
    def test_basic(self):
        t = SegmentTree([3.0, 1.0, 3.0, 2.0])
        assert t.argmax() == (3.0, 0)
        t.update(0, -1.0)
        assert t.argmax() == (3.0, 2)
        t.update(2, -np.inf)
        assert t.argmax() == (2.0, 3)
        assert len(t) == 4 and t.keys.tolist() == [-1.0, 1.0, -np.inf, 2.0]

    def test_errors(self):
        with pytest.raises(ValueError):
            SegmentTree([])
        with pytest.raises(ValueError):
            SegmentTree([1.0, np.nan])
        t = SegmentTree([1.0])
        with pytest.raises(IndexError):
            t.update(1, 0.0)
        with pytest.raises(ValueError):
            t.update(0, np.nan)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=40),
           st.lists(st.tuples(st.integers(0, 39), st.integers(-5, 5)), max_size=60))
    def test_matches_argmax(self, keys, updates):
        keys = np.array(keys, dtype=float)
        t = SegmentTree(keys)
        for i, v in updates:
            i %= len(keys)
            keys[i] = v
            t.update(i, v)
            assert t.argmax() == (keys.max(), int(np.argmax(keys)))

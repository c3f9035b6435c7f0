"""Insertion orders: identity, BRIO with Hilbert rounds, and farthest-point.

The farthest-point order is computed together with the Delaunay
triangulation: each uninserted point is kept in the bucket of its nearest
inserted site, and after an insertion only the buckets of the encroached
vertices can change. The triangulation and its encroachment records are kept
on the returned :class:`InsertionOrder` so that a later query-table build over
the same points can reuse them.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numba import njit

from . import _delaunay_kernels as K
from ._build import FpsRun
from .delaunay import Triangulation
from .geometry import as_points, check_distinct

__all__ = [
    "OrderStrategy",
    "InsertionOrder",
    "identity_order",
    "spatial_sort",
    "fps_order",
    "SegmentTree",
    "seg_build",
    "seg_update",
    "seg_argmax",
]


class OrderStrategy(str, Enum):
    IDENTITY = "identity"
    SPATIAL = "spatial"
    FARTHEST_POINT = "fps"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"farthest_point": "fps", "farthestpoint": "fps",
                   "spatialsort": "spatial", "spatial_sort": "spatial",
                   "brio": "spatial", "hilbert": "spatial"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(
                f"unknown ordering strategy {value!r}; "
                f"choose from {[s.value for s in cls]}") from None


@dataclass(frozen=True, eq=False)
class _FpsCache:
    points: np.ndarray
    triangulation: Triangulation
    log: object


@dataclass(frozen=True, eq=False)
class InsertionOrder:
    """A permutation of point indices together with how it was produced.

    Attributes
    ----------
    permutation : ndarray of int64
        ``permutation[k]`` is the original index of the ``k``-th inserted point.
    strategy : OrderStrategy
    fps_min_distances : ndarray or None
        For farthest-point orders, the distance of each selected point to the
        previously selected ones at its selection time (``inf`` for the seed).
    """

    permutation: np.ndarray
    strategy: OrderStrategy
    fps_min_distances: np.ndarray = None
    _cache: _FpsCache = field(default=None, repr=False)

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        n = perm.shape[0]
        if perm.ndim != 1 or n == 0:
            raise ValueError("a permutation must be a non-empty 1-d sequence")
        seen = np.zeros(n, dtype=bool)
        if perm.min() < 0 or perm.max() >= n:
            raise ValueError("permutation entries must lie in [0, n)")
        seen[perm] = True
        if not seen.all():
            raise ValueError("permutation repeats an index")
        perm.setflags(write=False)
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "strategy", OrderStrategy.parse(self.strategy))
        if self.fps_min_distances is not None:
            d = np.asarray(self.fps_min_distances, dtype=float)
            d.setflags(write=False)
            object.__setattr__(self, "fps_min_distances", d)

    def __len__(self):
        return int(self.permutation.shape[0])


def identity_order(n):
    """Insert points in their given order."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return InsertionOrder(np.arange(n, dtype=np.int64), OrderStrategy.IDENTITY)


# --- Hilbert / BRIO ---------------------------------------------------------

@njit(cache=True)
def _hilbert_keys(cells, bits):
    """Hilbert index of integer grid cells (Skilling's transpose method)."""
    m, d = cells.shape
    keys = np.empty(m, dtype=np.uint64)
    X = np.empty(d, dtype=np.uint64)
    M = np.uint64(1) << np.uint64(bits - 1)
    one = np.uint64(1)
    for r in range(m):
        for i in range(d):
            X[i] = cells[r, i]
        Q = M
        while Q > one:
            P = Q - one
            for i in range(d):
                if X[i] & Q:
                    X[0] ^= P
                else:
                    t = (X[0] ^ X[i]) & P
                    X[0] ^= t
                    X[i] ^= t
            Q >>= one
        for i in range(1, d):
            X[i] ^= X[i - 1]
        t = np.uint64(0)
        Q = M
        while Q > one:
            if X[d - 1] & Q:
                t ^= Q - one
            Q >>= one
        for i in range(d):
            X[i] ^= t
        key = np.uint64(0)
        for b in range(bits - 1, -1, -1):
            for i in range(d):
                key = (key << one) | ((X[i] >> np.uint64(b)) & one)
        keys[r] = key
    return keys


def _hilbert_order(points):
    """Stable Hilbert order of ``points`` over their own bounding box."""
    d = points.shape[1]
    bits = 31 if d == 2 else 20
    lo = points.min(axis=0)
    ext = points.max(axis=0) - lo
    ext[ext == 0] = 1.0
    top = float((1 << bits) - 1)
    cells = np.floor((points - lo) / ext * top)
    cells = np.clip(cells, 0, top).astype(np.uint64)
    keys = _hilbert_keys(cells, bits)
    return np.argsort(keys, kind="stable")


def _brio_rounds(n, ratio=4, min_round=16):
    """Round boundaries, smallest round first."""
    bounds = [n]
    m = n
    while m // ratio >= min_round:
        m //= ratio
        bounds.append(m)
    bounds.append(0)
    return bounds[::-1]


def spatial_sort(points, seed=0):
    """Biased randomized insertion order with Hilbert-sorted rounds.

    Points are shuffled, split into rounds whose sizes grow by a factor of
    four (the first round holds at least 16 points unless ``n`` is smaller),
    and each round is sorted along a Hilbert curve fitted to its own bounding
    box.

    Parameters
    ----------
    points : array-like of shape (n, d)
    seed : int
        Seeds the shuffle; the result is deterministic per seed.

    Returns
    -------
    InsertionOrder
    """
    pts = as_points(points)
    n = pts.shape[0]
    if n < 1:
        raise ValueError("spatial_sort needs at least one point")
    shuffled = np.random.default_rng(seed).permutation(n)
    bounds = _brio_rounds(n)
    perm = np.empty(n, dtype=np.int64)
    for a, b in zip(bounds[:-1], bounds[1:]):
        block = shuffled[a:b]
        perm[a:b] = block[_hilbert_order(pts[block])]
    return InsertionOrder(perm, OrderStrategy.SPATIAL)


# --- farthest-point ---------------------------------------------------------

def fps_order(points, start_index=0, dimension=None, seed=0, check_buckets=False):
    """Exact farthest-point order of all points, coupled with triangulation.

    Parameters
    ----------
    points : array-like of shape (n, d)
        Distinct points.
    start_index : int
        Original index of the seed point.
    dimension : int, optional
        Expected dimension; checked against ``points`` when given.
    seed : int
        Seeds the point-location walk (does not affect the order).
    check_buckets : bool
        Verify the bucket partition by brute force after every insertion.
        Quadratic; for tests.

    Returns
    -------
    InsertionOrder
        Ties in the farthest distance go to the smallest original index.
    """
    pts = as_points(points, dimension)
    n = pts.shape[0]
    if n < 1:
        raise ValueError("fps_order needs at least one point")
    if not 0 <= int(start_index) < n:
        raise IndexError(f"start_index {start_index} out of range for {n} points")
    check_distinct(pts)
    pts = pts.copy()
    tri = Triangulation(pts.shape[1], seed=seed, capacity=n + 1)
    run = FpsRun(tri, pts, start_index)
    if check_buckets:
        for k in range(1, n + 1):
            run.advance(k)
            run.check_buckets()
    else:
        run.advance(n)
    mind = run.mind
    if n > 2 and np.any(np.diff(mind[1:]) > 0):
        raise AssertionError("farthest-point distances are not non-increasing")
    cache = _FpsCache(pts, tri, run.log)
    return InsertionOrder(run.perm, OrderStrategy.FARTHEST_POINT, mind, cache)


# --- segment tree -----------------------------------------------------------

class SegmentTree:
    """Array-backed max segment tree with smallest-index tie breaking.

    Parameters
    ----------
    keys : array-like of float
        Initial values; must be non-empty.
    """

    def __init__(self, keys):
        keys = np.asarray(keys, dtype=float).reshape(-1)
        if keys.shape[0] == 0:
            raise ValueError("a segment tree needs at least one key")
        if np.isnan(keys).any():
            raise ValueError("segment tree keys must not be NaN")
        self.size = int(keys.shape[0])
        size2 = 1
        while size2 < self.size:
            size2 *= 2
        self._size2 = size2
        self._val = np.full(2 * size2, -np.inf)
        self._idx = np.zeros(2 * size2, dtype=np.int64)
        self._val[size2: size2 + self.size] = keys
        self._idx[size2:] = np.arange(size2)
        K.seg_rebuild(self._val, self._idx, size2)

    @property
    def keys(self):
        return self._val[self._size2: self._size2 + self.size].copy()

    def update(self, i, v):
        i = int(i)
        if not 0 <= i < self.size:
            raise IndexError(f"index {i} out of range for size {self.size}")
        v = float(v)
        if v != v:
            raise ValueError("segment tree keys must not be NaN")
        K.seg_set(self._val, self._idx, self._size2, i, v)

    def argmax(self):
        """``(value, index)`` of the maximum; ties go to the smaller index."""
        return float(self._val[1]), int(self._idx[1])

    def __len__(self):
        return self.size


def seg_build(keys):
    return SegmentTree(keys)


def seg_update(tree, i, v):
    tree.update(i, v)


def seg_argmax(tree):
    return tree.argmax()

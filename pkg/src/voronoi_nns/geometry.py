"""Points, boxes, distances, exact predicates and seeded data generators."""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import _predicates as P
from .exceptions import DimensionError, DuplicatePointError

__all__ = [
    "Aabb",
    "Sign",
    "as_points",
    "check_distinct",
    "squared_distance",
    "orient",
    "in_sphere",
    "generate_queries",
    "generate_surface_cloud",
    "SURFACE_KINDS",
]


class Sign(IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


@dataclass(frozen=True)
class Aabb:
    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=float)
        hi = np.asarray(self.max, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionError("box corners must be 1-d and of equal length")
        if np.any(lo > hi):
            raise ValueError(f"box min {lo} exceeds max {hi}")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @classmethod
    def of(cls, points):
        points = np.asarray(points, dtype=float)
        return cls(points.min(axis=0), points.max(axis=0))

    @property
    def center(self):
        return 0.5 * (self.min + self.max)

    def scaled(self, scale):
        half = 0.5 * (self.max - self.min) * scale
        return Aabb(self.center - half, self.center + half)

    def contains(self, points):
        points = np.atleast_2d(points)
        return np.all((points >= self.min) & (points <= self.max), axis=1)


def as_points(points, dimension=None):
    """Validate and return an ``(n, d)`` float64 C-contiguous array, d in {2, 3}."""
    arr = np.ascontiguousarray(points, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-d array of points, got shape {arr.shape}")
    if arr.shape[1] not in (2, 3):
        raise DimensionError(f"points must be 2-d or 3-d, got {arr.shape[1]}-d")
    if dimension is not None and arr.shape[1] != dimension:
        raise DimensionError(f"expected {dimension}-d points, got {arr.shape[1]}-d")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points contain NaN or infinite coordinates")
    return arr


def check_distinct(points):
    """Raise :class:`DuplicatePointError` listing every exactly repeated point."""
    points = np.asarray(points)
    if points.shape[0] < 2:
        return
    _, inverse, counts = np.unique(points, axis=0, return_inverse=True,
                                   return_counts=True)
    inverse = inverse.reshape(-1)
    dup = np.flatnonzero(counts[inverse] > 1)
    if dup.size:
        raise DuplicatePointError(
            f"{dup.size} points are exact duplicates, e.g. indices {dup[:10].tolist()}",
            indices=dup.tolist())


def squared_distance(a, b):
    """Squared Euclidean distance, summed over coordinates 0..d-1 in order."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    s = 0.0
    for x, y in zip(a.tolist(), b.tolist()):
        t = x - y
        s += t * t
    return s


def _simplex(points):
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3) or pts.shape[0] != pts.shape[1] + 1:
        raise DimensionError("a simplex needs d+1 points of dimension d (d = 2 or 3)")
    return pts


def orient(simplex):
    """Exact sign of ``det[p1 - p0, ..., pd - p0]``."""
    pts = _simplex(simplex)
    ids = np.arange(pts.shape[0], dtype=np.int64)
    return Sign(int(P.orient_ids(pts, ids)))


def in_sphere(simplex, q, perturb=False, ids=None):
    """Exact in-circumsphere test of ``q`` against a positively oriented simplex.

    With ``perturb=True`` cospherical ties are broken symbolically using
    ``ids`` (the global indices of the simplex vertices followed by the index
    of ``q``; defaults to ``0..d+1``), and the result is never ``ZERO``.
    """
    pts = _simplex(simplex)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.shape[0] != pts.shape[1]:
        raise DimensionError("query dimension does not match the simplex")
    D = pts.shape[0]
    if ids is None:
        ids = np.arange(D + 1)
    ids = np.asarray(ids, dtype=np.int64)
    if ids.shape[0] != D + 1 or len(set(ids.tolist())) != D + 1:
        raise ValueError("ids must hold d+2 distinct indices")
    coords = np.zeros((int(ids.max()) + 1, pts.shape[1]))
    coords[ids[:D]] = pts
    coords[ids[D]] = q
    cell = ids[:D].copy()
    if perturb:
        return Sign(int(P.in_sphere_sos(coords, cell, ids[D])))
    return Sign(int(P.in_sphere_raw(coords, cell, ids[D])))


def generate_queries(box, scale, count, seed):
    """``count`` points uniform in ``box`` scaled by ``scale`` about its center."""
    scale = float(scale)
    if not np.isfinite(scale):
        raise ValueError(f"scale must be finite, got {scale}")
    if count < 0:
        raise ValueError("count must be non-negative")
    big = box.scaled(scale)
    rng = np.random.default_rng(seed)
    return rng.uniform(big.min, big.max, size=(int(count), big.min.shape[0]))


SURFACE_KINDS = ("sphere", "jittered_line", "uniform_cube")


def generate_surface_cloud(kind, n, seed, dimension=3):
    """Synthetic point sets used by tests and benchmarks.

    ``sphere`` samples the unit sphere (the unit circle in 2-d),
    ``jittered_line`` places point ``i`` at ``x = i/n`` with every other
    coordinate jittered by at most 1e-6, and ``uniform_cube`` fills
    ``[0, 1]^d``.
    """
    if kind not in SURFACE_KINDS:
        raise ValueError(f"unknown cloud kind {kind!r}; choose from {SURFACE_KINDS}")
    if n < 1:
        raise ValueError("n must be at least 1")
    if dimension not in (2, 3):
        raise DimensionError("dimension must be 2 or 3")
    rng = np.random.default_rng(seed)
    if kind == "uniform_cube":
        return rng.random((n, dimension))
    if kind == "jittered_line":
        pts = np.empty((n, dimension))
        pts[:, 0] = np.arange(n) / n
        pts[:, 1:] = rng.uniform(-1e-6, 1e-6, size=(n, dimension - 1))
        return pts
    g = rng.standard_normal((n, dimension))
    return g / np.linalg.norm(g, axis=1, keepdims=True)

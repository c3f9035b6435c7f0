"""Applications built on prefix queries: density-peak deltas and FPS sampling."""

from dataclasses import dataclass, field

import numpy as np

from ._build import FpsRun
from .delaunay import Triangulation
from .geometry import as_points, check_distinct
from .ordering import InsertionOrder, OrderStrategy
from .qtable import build, nearest_batch

__all__ = ["DpcDelta", "dpc_delta", "fps_sample"]


@dataclass(frozen=True)
class DpcDelta:
    """Density-peak deltas.

    Attributes
    ----------
    delta : ndarray
        Distance from each point to its nearest denser point. The densest
        point gets the largest distance to any point.
    nearest_higher : ndarray of int64
        Original index of that denser point, ``-1`` for the densest point.
    order : ndarray of int64
        Original indices sorted by decreasing density (ties by index).
    distance_evaluations : int
        Point-to-point distances computed while finding the deltas.
    index : NnsIndex or None
        The density-ordered index the prefix queries ran on (``None`` when
        there is a single point).
    """

    delta: np.ndarray
    nearest_higher: np.ndarray
    order: np.ndarray
    distance_evaluations: int
    index: object = field(default=None, repr=False)


def density_order(rho):
    """Indices by decreasing density; equal densities keep index order."""
    rho = np.asarray(rho, dtype=float)
    return np.lexsort((np.arange(rho.shape[0]), -rho)).astype(np.int64)


def dpc_delta(points, rho):
    """Compute density-peak deltas with prefix nearest-neighbour queries.

    Points are inserted by decreasing density, so the points denser than the
    ``i``-th one are exactly the first ``i`` insertions, and its delta is a
    prefix query with ``k = i``.

    Parameters
    ----------
    points : array-like of shape (n, d)
        Distinct points.
    rho : array-like of shape (n,)
        Finite densities.

    Returns
    -------
    DpcDelta
    """
    pts = as_points(points)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("dpc_delta needs at least one point")
    rho = np.asarray(rho, dtype=float).reshape(-1)
    if rho.shape[0] != n:
        raise ValueError(f"{n} points but {rho.shape[0]} densities")
    if not np.all(np.isfinite(rho)):
        raise ValueError("densities must be finite")
    check_distinct(pts)
    order = density_order(rho)
    delta = np.empty(n)
    higher = np.full(n, -1, dtype=np.int64)
    top = order[0]
    diff = pts - pts[top]
    d2 = diff[:, 0] * diff[:, 0]
    for a in range(1, pts.shape[1]):
        d2 = d2 + diff[:, a] * diff[:, a]
    delta[top] = np.sqrt(d2.max())
    evaluations = n - 1
    index = None
    if n > 1:
        index = build(pts, InsertionOrder(order, OrderStrategy.IDENTITY))
        queries = pts[order[1:]]
        ans, stats = nearest_batch(index, queries, k=np.arange(1, n))
        dq = pts[ans] - queries
        dist2 = dq[:, 0] * dq[:, 0]
        for a in range(1, pts.shape[1]):
            dist2 = dist2 + dq[:, a] * dq[:, a]
        delta[order[1:]] = np.sqrt(dist2)
        higher[order[1:]] = ans
        # one evaluation per query for the start point plus the list scans
        evaluations += (n - 1) + int(stats["comparisons"].sum())
    return DpcDelta(delta, higher, order, evaluations, index)


def fps_sample(points, m, start_index=0, dimension=None):
    """First ``m`` points of the farthest-point order.

    Only ``m`` insertions are performed, so small samples of large clouds
    are cheap.

    Returns
    -------
    ndarray of int64
        Original indices of the sample, in selection order.
    """
    pts = as_points(points, dimension)
    n = pts.shape[0]
    m = int(m)
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in [1, {n}], got {m}")
    if not 0 <= int(start_index) < n:
        raise IndexError(f"start_index {start_index} out of range for {n} points")
    check_distinct(pts)
    tri = Triangulation(pts.shape[1], capacity=m + 1)
    run = FpsRun(tri, np.ascontiguousarray(pts), start_index)
    run.advance(m)
    return run.perm[:m].copy()

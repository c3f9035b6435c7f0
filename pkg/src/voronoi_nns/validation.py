"""End-to-end oracle checks on one dataset, used by the ``validate`` command."""

import numpy as np

from . import baselines
from .estimators import make_order
from .exceptions import OracleMismatchError
from .geometry import Aabb, generate_queries
from .ordering import OrderStrategy
from .qtable import build, nearest_batch

__all__ = ["validate_dataset"]

#: brute-force Delaunay checks are quadratic; skip them above this size
TRIANGULATION_CHECK_LIMIT = 2000


def _mismatch(label, Q, got, want):
    bad = np.flatnonzero(got != want)
    r = int(bad[0])
    return OracleMismatchError(
        f"{label}: {bad.size} of {Q.shape[0]} answers differ from the linear scan; "
        f"first at query {r} {Q[r].tolist()}: {int(got[r])} vs {int(want[r])}")


def validate_dataset(points, queries=1000, scale=2.0, seed=0, check_triangulation=True):
    """Check all indices on ``points`` against the linear scan.

    Returns a list of human-readable result lines and raises
    :class:`OracleMismatchError` on the first failure.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = points.shape[0]
    Q = generate_queries(Aabb.of(points), scale, queries, seed)
    want = baselines.linear_nearest_batch(points, Q) if queries else np.empty(0, int)
    rng = np.random.default_rng(seed)
    lines = []
    for strategy in OrderStrategy:
        order = make_order(points, strategy, seed)
        index = build(points, order, seed=seed, keep_triangulation=True)
        label = f"query-table/{strategy.value}"
        try:
            index.table.check_invariants(index.encroachment_total)
        except AssertionError as exc:
            raise OracleMismatchError(f"{label}: {exc}") from None
        note = "lists ok"
        if check_triangulation and n <= TRIANGULATION_CHECK_LIMIT:
            ok, msg = index.triangulation.validate()
            if not ok:
                raise OracleMismatchError(f"{label}: triangulation invalid: {msg}")
            note += ", triangulation ok"
        if queries:
            got, _ = nearest_batch(index, Q)
            if not np.array_equal(got, want):
                raise _mismatch(label, Q, got, want)
            ks = rng.integers(1, n + 1, size=queries)
            got, _ = nearest_batch(index, Q, ks)
            pts_ins = index.table.points_by_insertion
            ref = np.array([index.table.inv_perm[baselines.linear_nearest(pts_ins, q, k)]
                            for q, k in zip(Q, ks)], dtype=np.int64)
            if not np.array_equal(got, ref):
                raise _mismatch(label + " prefix", Q, got, ref)
        lines.append(f"{label}: {queries} queries and {queries} prefix queries exact, {note}")
    if queries:
        for label, idx in (("kd-tree", baselines.KdTree(points)),
                           ("grid", baselines.UniformGrid(points, seed=seed))):
            got, _ = idx.query_batch(Q)
            if not np.array_equal(got, want):
                raise _mismatch(label, Q, got, want)
            lines.append(f"{label}: {queries} queries exact")
    return lines

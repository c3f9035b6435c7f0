"""Query Table construction and exact nearest-neighbour queries.

During incremental Delaunay insertion, insertion ``j`` is appended to the
Query List of every earlier vertex it becomes adjacent to. A query starts at
insertion 0, scans the current list, and jumps to the first entry that is
strictly closer, restarting at the head of that entry's list. When a list is
exhausted the current point is the nearest neighbour. Because every list is
increasing, a prefix query over the first ``k`` insertions simply stops
scanning at the first entry ``>= k``.
"""

import json
import struct
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import _build
from .delaunay import Triangulation
from .exceptions import DimensionError, IndexFormatError
from .geometry import as_points, check_distinct
from .ordering import InsertionOrder, OrderStrategy

__all__ = [
    "QueryTable",
    "NnsIndex",
    "QueryStats",
    "ListStats",
    "build",
    "nearest",
    "nearest_prefix",
    "nearest_batch",
    "list_stats",
    "save_index",
    "load_index",
]

MAGIC = b"DAGN"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class QueryStats:
    """Work done by one query.

    ``comparisons`` counts distance evaluations against list entries (the
    distance to the start point is not counted), ``jumps`` counts list
    switches and ``visited_entries`` counts list entries read, including the
    entry that ends a prefix scan.
    """

    comparisons: int
    jumps: int
    visited_entries: int


@dataclass(frozen=True, eq=False)
class QueryTable:
    """Query Lists in CSR form over insertion indices.

    ``entries[offsets[i]:offsets[i+1]]`` is the list of insertion ``i``.
    ``perm`` maps original index to insertion index and ``inv_perm`` maps
    back.
    """

    offsets: np.ndarray
    entries: np.ndarray
    perm: np.ndarray
    inv_perm: np.ndarray
    points_by_insertion: np.ndarray

    def __post_init__(self):
        for name in ("offsets", "entries", "perm", "inv_perm", "points_by_insertion"):
            getattr(self, name).setflags(write=False)

    @property
    def n(self):
        return int(self.inv_perm.shape[0])

    @property
    def dimension(self):
        return int(self.points_by_insertion.shape[1])

    def lengths(self):
        return np.diff(self.offsets)

    def query_list(self, i):
        """Query List of insertion ``i`` as an array of insertion indices."""
        if not 0 <= int(i) < self.n:
            raise IndexError(f"insertion index {i} out of range")
        return self.entries[self.offsets[i]: self.offsets[i + 1]].copy()

    def check_invariants(self, encroachment_total=None):
        """Raise ``AssertionError`` unless every list is strictly increasing,
        holds only later insertions, and (optionally) the entry count matches
        ``encroachment_total``."""
        n = self.n
        lengths = self.lengths()
        assert self.offsets[0] == 0 and np.all(lengths >= 0), "bad offsets"
        assert self.offsets[-1] == self.entries.shape[0], "offsets do not cover entries"
        owner = np.repeat(np.arange(n), lengths)
        assert np.all(self.entries > owner), "a list holds a non-later insertion"
        assert np.all(self.entries < n), "a list entry is out of range"
        same = owner[1:] == owner[:-1]
        assert np.all(np.diff(self.entries)[same] > 0), "a list is not increasing"
        assert np.array_equal(self.perm[self.inv_perm], np.arange(n)), "bad permutation"
        if encroachment_total is not None:
            assert self.entries.shape[0] == encroachment_total, (
                f"{self.entries.shape[0]} list entries vs {encroachment_total} "
                "recorded encroachments")

    def nbytes(self):
        return int(sum(getattr(self, a).nbytes for a in
                       ("offsets", "entries", "perm", "inv_perm", "points_by_insertion")))


@dataclass(frozen=True, eq=False)
class NnsIndex:
    """A built Query Table plus build metadata.

    ``mean_encroached`` is the measured average number of earlier vertices a
    new point became adjacent to, i.e. the empirical Delaunay degree constant.
    """

    table: QueryTable
    dimension: int
    strategy: OrderStrategy
    seed: int = 0
    build_seconds: float = 0.0
    encroachment_total: int = 0
    triangulation: Triangulation = field(default=None, repr=False)

    @property
    def n(self):
        return self.table.n

    @property
    def mean_encroached(self):
        return self.encroachment_total / self.n

    def metadata(self):
        return {"strategy": self.strategy.value, "seed": int(self.seed),
                "build_seconds": float(self.build_seconds),
                "encroachment_total": int(self.encroachment_total)}


def build(points, order=None, dimension=None, seed=0, keep_triangulation=False):
    """Build a Query Table by inserting ``points`` in ``order``.

    Parameters
    ----------
    points : array-like of shape (n, d)
        Distinct points, d in {2, 3}.
    order : InsertionOrder, optional
        Defaults to the identity order. A farthest-point order produced by
        :func:`~voronoi_nns.ordering.fps_order` on the same points reuses the
        triangulation computed alongside it.
    dimension : int, optional
        Expected dimension.
    seed : int
        Seeds the point-location walk.
    keep_triangulation : bool
        Keep the triangulation on the index (for validation).

    Returns
    -------
    NnsIndex
    """
    pts = as_points(points, dimension)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("cannot build an index over zero points")
    if order is None:
        from .ordering import identity_order
        order = identity_order(n)
    if not isinstance(order, InsertionOrder):
        raise TypeError("order must be an InsertionOrder")
    if len(order) != n:
        raise ValueError(f"order has {len(order)} entries for {n} points")
    t0 = time.perf_counter()
    perm = order.permutation
    cache = order._cache
    if (order.strategy is OrderStrategy.FARTHEST_POINT and cache is not None
            and np.array_equal(cache.points, pts)):
        tri, log = cache.triangulation, cache.log
    else:
        check_distinct(pts)
        ordered = np.ascontiguousarray(pts[perm])
        tri = Triangulation(pts.shape[1], seed=seed, capacity=n + 1)
        hint_mode = 1 if order.strategy is OrderStrategy.FARTHEST_POINT else 0
        try:
            log = _build.insert_all(tri, ordered, hint_mode)
        except Exception as exc:
            if hasattr(exc, "indices"):
                exc.indices = [int(perm[i]) for i in exc.indices]
            raise
    offsets, entries = log.query_lists()
    inv_perm = np.array(perm, dtype=np.int64)
    fwd = np.empty(n, dtype=np.int64)
    fwd[inv_perm] = np.arange(n)
    table = QueryTable(offsets, entries, fwd, inv_perm,
                       np.ascontiguousarray(pts[inv_perm]))
    elapsed = time.perf_counter() - t0
    return NnsIndex(table, pts.shape[1], order.strategy, int(seed), elapsed,
                    log.total, tri if keep_triangulation else None)


# --- query kernels ------------------------------------------------------------

@njit(cache=True, nogil=True)
def _sqd(P, i, q):
    s = 0.0
    for a in range(P.shape[1]):
        t = P[i, a] - q[a]
        s += t * t
    return s


@njit(cache=True, nogil=True)
def _query(P, offsets, entries, q, k):
    cur = 0
    dcur = _sqd(P, 0, q)
    e = offsets[0]
    end = offsets[1]
    comps = 0
    jumps = 0
    visited = 0
    while e < end:
        j = entries[e]
        visited += 1
        if j >= k:
            break
        dj = _sqd(P, j, q)
        comps += 1
        if dj < dcur:
            cur = j
            dcur = dj
            jumps += 1
            e = offsets[j]
            end = offsets[j + 1]
        else:
            e += 1
    return cur, comps, jumps, visited


@njit(cache=True, nogil=True)
def _query_batch(P, offsets, entries, Q, ks, out, comps, jumps, visited):
    for r in range(Q.shape[0]):
        c, a, b, v = _query(P, offsets, entries, Q[r], ks[r])
        out[r] = c
        comps[r] = a
        jumps[r] = b
        visited[r] = v


def _check_query(index, q):
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.shape[0] != index.dimension:
        raise DimensionError(
            f"query has {q.shape[0]} coordinates, index is {index.dimension}-d")
    if not np.all(np.isfinite(q)):
        raise ValueError("query has non-finite coordinates")
    return q


def _traced_query(table, q, k):
    """Pure-Python query that asserts the chain is monotone."""
    P = table.points_by_insertion
    d = lambda i: float(_sqd(P, i, q))  # noqa: E731
    cur, dcur = 0, d(0)
    comps = jumps = visited = 0
    e, end = table.offsets[0], table.offsets[1]
    while e < end:
        j = int(table.entries[e])
        visited += 1
        if j >= k:
            break
        dj = d(j)
        comps += 1
        if dj < dcur:
            assert j > cur, "jump to an earlier insertion"
            cur, dcur = j, dj
            jumps += 1
            e, end = table.offsets[j], table.offsets[j + 1]
        else:
            e += 1
    return cur, comps, jumps, visited


def _run(index, q, k, debug):
    table = index.table
    if debug:
        cur, c, j, v = _traced_query(table, q, k)
    else:
        cur, c, j, v = _query(table.points_by_insertion, table.offsets,
                              table.entries, q, k)
    return int(table.inv_perm[cur]), QueryStats(int(c), int(j), int(v))


def nearest(index, q, debug=False):
    """Exact nearest neighbour of ``q``.

    Ties go to the point inserted first.

    Returns
    -------
    (int, QueryStats)
        Original index of the nearest point and the work done.
    """
    if index.n == 0:
        raise ValueError("empty index")
    q = _check_query(index, q)
    return _run(index, q, index.n, debug)


def nearest_prefix(index, q, k, debug=False):
    """Nearest neighbour of ``q`` among the first ``k`` inserted points.

    Returns ``(original index, QueryStats)``.
    """
    k = int(k)
    if not 1 <= k <= index.n:
        raise ValueError(f"k must lie in [1, {index.n}], got {k}")
    q = _check_query(index, q)
    return _run(index, q, k, debug)


def nearest_batch(index, queries, k=None):
    """Vectorized :func:`nearest` / :func:`nearest_prefix`.

    Parameters
    ----------
    queries : array-like of shape (m, d)
    k : int or array-like of int, optional
        Prefix bound per query; defaults to all points.

    Returns
    -------
    indices : ndarray of int64
        Original indices of the answers.
    stats : dict of ndarray
        Per-query ``comparisons``, ``jumps`` and ``visited_entries``.
    """
    Q = np.ascontiguousarray(queries, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q.reshape(1, -1)
    if Q.ndim != 2 or Q.shape[1] != index.dimension:
        raise DimensionError(f"queries must have shape (m, {index.dimension})")
    if not np.all(np.isfinite(Q)):
        raise ValueError("queries contain non-finite coordinates")
    m = Q.shape[0]
    if k is None:
        ks = np.full(m, index.n, dtype=np.int64)
    else:
        ks = np.broadcast_to(np.asarray(k, dtype=np.int64), (m,)).copy()
        if m and (ks.min() < 1 or ks.max() > index.n):
            raise ValueError(f"k must lie in [1, {index.n}]")
    out = np.empty(m, dtype=np.int64)
    comps = np.empty(m, dtype=np.int64)
    jumps = np.empty(m, dtype=np.int64)
    visited = np.empty(m, dtype=np.int64)
    t = index.table
    _query_batch(t.points_by_insertion, t.offsets, t.entries, Q, ks,
                 out, comps, jumps, visited)
    return t.inv_perm[out], {"comparisons": comps, "jumps": jumps,
                             "visited_entries": visited}


# --- statistics and serialization -------------------------------------------

@dataclass(frozen=True)
class ListStats:
    mean: float
    variance: float
    max: int
    histogram: np.ndarray
    total: int


def list_stats(index):
    """Mean, population variance, maximum and histogram of list lengths."""
    lengths = index.table.lengths()
    return ListStats(float(lengths.mean()), float(lengths.var()),
                     int(lengths.max()), np.bincount(lengths),
                     int(lengths.sum()))


def save_index(index, path):
    """Write ``index`` to ``path`` in the versioned little-endian format."""
    t = index.table
    meta = json.dumps(index.metadata(), sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIQ", FORMAT_VERSION, index.dimension, t.n))
        fh.write(t.inv_perm.astype("<u8").tobytes())
        fh.write(t.offsets.astype("<u8").tobytes())
        fh.write(t.entries.astype("<u8").tobytes())
        fh.write(t.points_by_insertion.astype("<f8").tobytes())
        fh.write(struct.pack("<I", len(meta)))
        fh.write(meta)


def _read(fh, count, dtype, path):
    dtype = np.dtype(dtype)
    raw = fh.read(count * dtype.itemsize)
    if len(raw) != count * dtype.itemsize:
        raise IndexFormatError(f"{path}: truncated index file")
    return np.frombuffer(raw, dtype=dtype).astype(dtype.newbyteorder("="))


def load_index(path):
    """Read an index written by :func:`save_index`."""
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise IndexFormatError(f"{path}: not an index file (bad magic)")
        head = fh.read(16)
        if len(head) != 16:
            raise IndexFormatError(f"{path}: truncated header")
        version, dim, n = struct.unpack("<IIQ", head)
        if version != FORMAT_VERSION:
            raise IndexFormatError(f"{path}: unsupported format version {version}")
        if dim not in (2, 3) or n == 0:
            raise IndexFormatError(f"{path}: corrupt header (dim={dim}, n={n})")
        inv_perm = _read(fh, n, "<u8", path).astype(np.int64)
        offsets = _read(fh, n + 1, "<u8", path).astype(np.int64)
        entries = _read(fh, int(offsets[-1]), "<u8", path).astype(np.int64)
        points = _read(fh, n * dim, "<f8", path).reshape(n, dim)
        (mlen,) = _read(fh, 1, "<u4", path)
        try:
            meta = json.loads(fh.read(int(mlen)).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise IndexFormatError(f"{path}: corrupt metadata block") from None
    if np.any(np.diff(offsets) < 0) or offsets[0] != 0:
        raise IndexFormatError(f"{path}: corrupt list offsets")
    if entries.size and (entries.min() < 0 or entries.max() >= n):
        raise IndexFormatError(f"{path}: list entry out of range")
    if not np.array_equal(np.sort(inv_perm), np.arange(n)):
        raise IndexFormatError(f"{path}: permutation is not a bijection")
    perm = np.empty(n, dtype=np.int64)
    perm[inv_perm] = np.arange(n)
    table = QueryTable(offsets, entries, perm, inv_perm, np.ascontiguousarray(points))
    return NnsIndex(table, dim, OrderStrategy.parse(meta.get("strategy", "identity")),
                    int(meta.get("seed", 0)), float(meta.get("build_seconds", 0.0)),
                    int(meta.get("encroachment_total", entries.shape[0])))

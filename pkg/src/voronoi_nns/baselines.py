"""Reference nearest-neighbour indices: linear scan, KD-tree and uniform grid.

All three share one tie rule (smallest squared distance, then smallest
index) and compute squared distances with the same left-to-right sum as the
Query Table, so their answers are bit-for-bit comparable. Each query also
reports how many point distances it evaluated.
"""

import numpy as np
from numba import njit

from .exceptions import DimensionError
from .geometry import as_points

__all__ = [
    "linear_nearest",
    "linear_nearest_batch",
    "KdTree",
    "kd_build",
    "kd_nearest",
    "UniformGrid",
    "grid_build",
    "grid_nearest",
]


@njit(cache=True, nogil=True)
def _sqd(P, i, q):
    s = 0.0
    for a in range(P.shape[1]):
        t = P[i, a] - q[a]
        s += t * t
    return s


def _query_vector(q, d):
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.shape[0] != d:
        raise DimensionError(f"query has {q.shape[0]} coordinates, expected {d}")
    if not np.all(np.isfinite(q)):
        raise ValueError("query has non-finite coordinates")
    return q


def _query_matrix(Q, d):
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q.reshape(1, -1)
    if Q.ndim != 2 or Q.shape[1] != d:
        raise DimensionError(f"queries must have shape (m, {d})")
    if not np.all(np.isfinite(Q)):
        raise ValueError("queries contain non-finite coordinates")
    return Q


# --- linear scan --------------------------------------------------------------

def linear_nearest(points, q, prefix_k=None):
    """Index of the nearest point to ``q`` among ``points[:prefix_k]``.

    This is the oracle every other index is tested against.
    """
    P = np.asarray(points, dtype=np.float64)
    if P.ndim != 2:
        raise DimensionError("points must be a 2-d array")
    k = P.shape[0] if prefix_k is None else int(prefix_k)
    if not 1 <= k <= P.shape[0]:
        raise ValueError(f"prefix must hold between 1 and {P.shape[0]} points, got {k}")
    q = _query_vector(q, P.shape[1])
    diff = P[:k] - q
    d2 = diff[:, 0] * diff[:, 0]
    for a in range(1, P.shape[1]):
        d2 = d2 + diff[:, a] * diff[:, a]
    return int(np.argmin(d2))


@njit(cache=True, nogil=True)
def _linear_batch(P, Q, out):
    for r in range(Q.shape[0]):
        best = 0
        bd = _sqd(P, 0, Q[r])
        for i in range(1, P.shape[0]):
            d = _sqd(P, i, Q[r])
            if d < bd:
                bd = d
                best = i
        out[r] = best


def linear_nearest_batch(points, queries):
    """Linear scan for many queries; returns an int64 array of indices."""
    P = as_points(points)
    Q = _query_matrix(queries, P.shape[1])
    out = np.empty(Q.shape[0], dtype=np.int64)
    _linear_batch(P, Q, out)
    return out


# --- KD-tree ------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _kd_query(P, order, dim, split, left, right, start, end, q, stack, bounds,
              exclude):
    best = -1
    bd = np.inf
    comps = 0
    stack[0] = 0
    bounds[0] = 0.0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        b = bounds[top]
        # strict test: an equally distant point with a smaller index may remain
        if b > bd:
            continue
        if left[node] < 0:
            for s in range(start[node], end[node]):
                i = order[s]
                if i == exclude:
                    continue
                d = _sqd(P, i, q)
                comps += 1
                if d < bd or (d == bd and i < best):
                    bd = d
                    best = i
            continue
        diff = q[dim[node]] - split[node]
        if diff < 0.0:
            near, far = left[node], right[node]
        else:
            near, far = right[node], left[node]
        stack[top] = far
        bounds[top] = max(b, diff * diff)
        stack[top + 1] = near
        bounds[top + 1] = b
        top += 2
    return best, comps


class KdTree:
    """Median-split KD-tree over the widest axis with buckets of ``leaf_size``.

    Parameters
    ----------
    points : array-like of shape (n, d)
    leaf_size : int
    """

    def __init__(self, points, leaf_size=10):
        P = as_points(points)
        if P.shape[0] == 0:
            raise ValueError("cannot build a KD-tree over zero points")
        if leaf_size < 1:
            raise ValueError("leaf_size must be positive")
        self.points = P
        self.leaf_size = int(leaf_size)
        n = P.shape[0]
        order = np.arange(n, dtype=np.int64)
        dims, splits, lefts, rights, starts, ends = [], [], [], [], [], []

        def new_node(lo, hi):
            dims.append(0)
            splits.append(0.0)
            lefts.append(-1)
            rights.append(-1)
            starts.append(lo)
            ends.append(hi)
            return len(dims) - 1

        todo = [new_node(0, n)]
        while todo:
            node = todo.pop()
            lo, hi = starts[node], ends[node]
            if hi - lo <= self.leaf_size:
                continue
            sub = P[order[lo:hi]]
            axis = int(np.argmax(sub.max(axis=0) - sub.min(axis=0)))
            mid = (hi - lo) // 2
            part = np.argpartition(sub[:, axis], mid)
            order[lo:hi] = order[lo:hi][part]
            dims[node] = axis
            splits[node] = float(P[order[lo + mid], axis])
            lefts[node] = new_node(lo, lo + mid)
            rights[node] = new_node(lo + mid, hi)
            todo.append(lefts[node])
            todo.append(rights[node])
        self._order = order
        self._dim = np.array(dims, dtype=np.int64)
        self._split = np.array(splits, dtype=np.float64)
        self._left = np.array(lefts, dtype=np.int64)
        self._right = np.array(rights, dtype=np.int64)
        self._start = np.array(starts, dtype=np.int64)
        self._end = np.array(ends, dtype=np.int64)
        self.n_nodes = len(dims)

    @property
    def dimension(self):
        return int(self.points.shape[1])

    def _arrays(self):
        return (self.points, self._order, self._dim, self._split, self._left,
                self._right, self._start, self._end)

    def nearest(self, q):
        """``(index, distance_evaluations)`` of the nearest point."""
        q = _query_vector(q, self.dimension)
        stack = np.empty(2 * self.n_nodes + 2, dtype=np.int64)
        bounds = np.empty(2 * self.n_nodes + 2)
        i, c = _kd_query(*self._arrays(), q, stack, bounds, -1)
        return int(i), int(c)

    def nearest_other(self, i):
        """Index of the nearest point to point ``i`` other than ``i`` itself."""
        stack = np.empty(2 * self.n_nodes + 2, dtype=np.int64)
        bounds = np.empty(2 * self.n_nodes + 2)
        j, _ = _kd_query(*self._arrays(), self.points[i], stack, bounds, int(i))
        return int(j)

    def query_batch(self, queries):
        Q = _query_matrix(queries, self.dimension)
        out = np.empty(Q.shape[0], dtype=np.int64)
        comps = np.empty(Q.shape[0], dtype=np.int64)
        _kd_batch(*self._arrays(), Q, out, comps)
        return out, comps

    def nbytes(self):
        return int(self.points.nbytes + self._order.nbytes + self._dim.nbytes
                   + self._split.nbytes + self._left.nbytes + self._right.nbytes
                   + self._start.nbytes + self._end.nbytes)


@njit(cache=True, nogil=True)
def _kd_batch(P, order, dim, split, left, right, start, end, Q, out, comps):
    m = left.shape[0]
    stack = np.empty(2 * m + 2, dtype=np.int64)
    bounds = np.empty(2 * m + 2)
    for r in range(Q.shape[0]):
        out[r], comps[r] = _kd_query(P, order, dim, split, left, right, start,
                                     end, Q[r], stack, bounds, -1)


def kd_build(points, leaf_size=10):
    return KdTree(points, leaf_size)


def kd_nearest(tree, q):
    """Index of the nearest point in ``tree`` to ``q``."""
    return tree.nearest(q)[0]


# --- uniform grid -------------------------------------------------------------

@njit(cache=True, nogil=True)
def _cell_points(keys, cstart, dense, key, P, order, q, best, bd, comps):
    if dense.shape[0] > 0:
        a = dense[key]
        b = dense[key + 1]
    else:
        pos = np.searchsorted(keys, key)
        a = 0
        b = 0
        if pos < keys.shape[0] and keys[pos] == key:
            a = cstart[pos]
            b = cstart[pos + 1]
    if a < b:
        for s in range(a, b):
            i = order[s]
            d = _sqd(P, i, q)
            comps += 1
            if d < bd or (d == bd and i < best):
                bd = d
                best = i
    return best, bd, comps


@njit(cache=True, nogil=True)
def _grid_query(P, order, keys, cstart, dense, lo, h, dims, q):
    d = P.shape[1]
    qc = np.empty(d, dtype=np.int64)
    r0 = 0
    rmax = 0
    for a in range(d):
        c = np.floor((q[a] - lo[a]) / h)
        c = min(max(c, -4.0e15), 4.0e15)
        qc[a] = np.int64(c)
        r0 = max(r0, qc[a] - (dims[a] - 1), -qc[a])
        rmax = max(rmax, max(qc[a], dims[a] - 1 - qc[a]))
    best = -1
    bd = np.inf
    comps = 0
    r = r0
    while r <= rmax:
        xl = max(qc[0] - r, 0)
        xh = min(qc[0] + r, dims[0] - 1)
        yl = max(qc[1] - r, 0)
        yh = min(qc[1] + r, dims[1] - 1)
        if d == 2:
            for x in range(xl, xh + 1):
                edge = abs(x - qc[0]) == r
                y = yl
                while y <= yh:
                    if edge or abs(y - qc[1]) == r:
                        best, bd, comps = _cell_points(
                            keys, cstart, dense, x * dims[1] + y, P, order, q, best, bd, comps)
                        y += 1
                    elif y < qc[1] + r:
                        y = qc[1] + r
                    else:
                        y += 1
        else:
            zl = max(qc[2] - r, 0)
            zh = min(qc[2] + r, dims[2] - 1)
            for x in range(xl, xh + 1):
                ex = abs(x - qc[0]) == r
                for y in range(yl, yh + 1):
                    edge = ex or abs(y - qc[1]) == r
                    z = zl
                    while z <= zh:
                        if edge or abs(z - qc[2]) == r:
                            key = (x * dims[1] + y) * dims[2] + z
                            best, bd, comps = _cell_points(
                                keys, cstart, dense, key, P, order, q, best, bd, comps)
                            z += 1
                        elif z < qc[2] + r:
                            z = qc[2] + r
                        else:
                            z += 1
        if best >= 0:
            # distance from q to the outside of the searched block of cells
            gap = np.inf
            for a in range(d):
                g1 = q[a] - (lo[a] + (qc[a] - r) * h)
                g2 = (lo[a] + (qc[a] + r + 1) * h) - q[a]
                gap = min(gap, g1, g2)
            gap = max(gap - 1e-9 * h, 0.0)
            if bd < gap * gap:
                break
        r += 1
    return best, comps


@njit(cache=True, nogil=True)
def _grid_batch(P, order, keys, cstart, dense, lo, h, dims, Q, out, comps):
    for r in range(Q.shape[0]):
        out[r], comps[r] = _grid_query(P, order, keys, cstart, dense, lo, h, dims,
                                       Q[r])


class UniformGrid:
    """Uniform grid with occupied cells kept in a sorted key table (or a dense
    table when the grid has few cells).

    The cell edge is ``factor`` times the mean nearest-neighbour spacing,
    estimated from a sample of at most ``sample`` points.
    """

    def __init__(self, points, factor=3.0, sample=1000, seed=0, cell_size=None):
        P = as_points(points)
        n = P.shape[0]
        if n == 0:
            raise ValueError("cannot build a grid over zero points")
        self.points = P
        d = P.shape[1]
        lo = P.min(axis=0)
        ext = P.max(axis=0) - lo
        if cell_size is None:
            cell_size = factor * self._spacing(P, sample, seed)
        h = float(cell_size)
        if not np.isfinite(h) or h <= 0:
            h = float(ext.max()) or 1.0
        # keep the dense cell index within int64
        while np.prod(np.floor(ext / h) + 1.0) > 2.0 ** 60:
            h *= 2.0
        self.cell_size = h
        self.lo = lo
        cells = np.floor((P - lo) / h).astype(np.int64)
        self.dims = cells.max(axis=0) + 1
        key = cells[:, 0]
        for a in range(1, d):
            key = key * self.dims[a] + cells[:, a]
        order = np.argsort(key, kind="stable").astype(np.int64)
        skey = key[order]
        first = np.flatnonzero(np.r_[True, skey[1:] != skey[:-1]])
        self._order = order
        self._keys = skey[first].copy()
        self._cstart = np.r_[first, n].astype(np.int64)
        # a dense cell table is faster to probe when it stays small
        total = int(np.prod(self.dims))
        if total <= max(8 * n, 1 << 22):
            counts = np.bincount(skey, minlength=total)
            self._dense = np.r_[0, np.cumsum(counts)].astype(np.int64)
        else:
            self._dense = np.empty(0, dtype=np.int64)

    @staticmethod
    def _spacing(P, sample, seed):
        n = P.shape[0]
        if n < 2:
            return 1.0
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(n, size=min(sample, n), replace=False))
        tree = KdTree(P)
        dist = [np.sqrt(np.sum((P[tree.nearest_other(i)] - P[i]) ** 2)) for i in pick]
        return float(np.mean(dist))

    @property
    def dimension(self):
        return int(self.points.shape[1])

    @property
    def n_cells(self):
        return int(self._keys.shape[0])

    def _arrays(self):
        return (self.points, self._order, self._keys, self._cstart, self._dense,
                self.lo, self.cell_size, self.dims)

    def nearest(self, q):
        """``(index, distance_evaluations)`` of the nearest point."""
        q = _query_vector(q, self.dimension)
        i, c = _grid_query(*self._arrays(), q)
        return int(i), int(c)

    def query_batch(self, queries):
        Q = _query_matrix(queries, self.dimension)
        out = np.empty(Q.shape[0], dtype=np.int64)
        comps = np.empty(Q.shape[0], dtype=np.int64)
        _grid_batch(*self._arrays(), Q, out, comps)
        return out, comps

    def nbytes(self):
        return int(self.points.nbytes + self._order.nbytes + self._keys.nbytes
                   + self._cstart.nbytes + self._dense.nbytes)


def grid_build(points, factor=3.0):
    return UniformGrid(points, factor=factor)


def grid_nearest(grid, q):
    """Index of the nearest point in ``grid`` to ``q``."""
    return grid.nearest(q)[0]

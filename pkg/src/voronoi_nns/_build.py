"""Python-side drivers for the batch insertion kernels.

The kernels stop with a status code whenever an array is too small; the
drivers here grow the offending storage and resume from the reported index.
"""

import numpy as np

from . import _delaunay_kernels as K
from .exceptions import DuplicatePointError


class EncroachmentLog:
    """Per-insertion encroached sets plus dynamic per-vertex linked lists.

    ``enc_vals[enc_ptr[k]:enc_ptr[k+1]]`` holds the vertices encroached by
    insertion ``k``. The linked lists (``lhead``/``lnext``/``lval``) give the
    same data grouped by encroached vertex, in insertion order, while the
    build is still running.
    """

    def __init__(self, n, dimension):
        pool = (6 if dimension == 2 else 16) * n + n + 1024
        self.n = n
        self.enc_ptr = np.zeros(n + 1, dtype=np.int64)
        self.enc_vals = np.empty(pool, dtype=np.int64)
        self.lhead = np.full(n, -1, dtype=np.int64)
        self.ltail = np.full(n, -1, dtype=np.int64)
        self.lnext = np.empty(pool, dtype=np.int64)
        self.lval = np.empty(pool, dtype=np.int64)

    def grow(self):
        for name in ("enc_vals", "lnext", "lval"):
            old = getattr(self, name)
            new = np.empty(2 * old.shape[0], dtype=np.int64)
            new[: old.shape[0]] = old
            setattr(self, name, new)

    def args(self):
        return (self.enc_ptr, self.enc_vals, self.lhead, self.ltail,
                self.lnext, self.lval)

    @property
    def total(self):
        return int(self.enc_ptr[self.n])

    def query_lists(self):
        """CSR ``(offsets, entries)`` of the Query Lists."""
        return K.csr_from_records(self.enc_ptr, self.enc_vals, self.n)


def _duplicate(k):
    return DuplicatePointError(
        f"insertion {k} duplicates an earlier point", indices=[int(k)])


def insert_all(tri, points, hint_mode):
    """Insert ``points`` (already in insertion order) into an empty ``tri``."""
    n = points.shape[0]
    tri._ensure_vertex_capacity(n + 1)
    tri._coords[:n] = points
    log = EncroachmentLog(n, tri.dimension)
    k = 0
    while True:
        status, k = K.build_kernel(tri._T, k, n, hint_mode, *log.args())
        if status == K.OK:
            return log
        if status == K.DUPLICATE:
            raise _duplicate(k)
        if status == K.GROW_POOL:
            log.grow()
        else:
            tri._handle_status(status)


class FpsRun:
    """State of a coupled farthest-point traversal over ``points``."""

    def __init__(self, tri, points, start):
        n = points.shape[0]
        self.tri = tri
        self.points = points
        self.start = int(start)
        self.n = n
        tri._ensure_vertex_capacity(n + 1)
        self.log = EncroachmentLog(n, tri.dimension)
        self.perm = np.empty(n, dtype=np.int64)
        self.mind = np.empty(n)
        self.owner = np.zeros(n, dtype=np.int64)
        self.dmin = np.empty(n)
        self.bhead = np.full(n, -1, dtype=np.int64)
        self.bnext = np.full(n, -1, dtype=np.int64)
        self.bprev = np.full(n, -1, dtype=np.int64)
        size2 = 1
        while size2 < n:
            size2 *= 2
        self.size2 = size2
        self.val = np.full(2 * size2, -np.inf)
        self.idx = np.zeros(2 * size2, dtype=np.int64)
        K.fps_init(points, self.start, self.owner, self.dmin, self.bhead,
                   self.bnext, self.bprev, self.val, self.idx, size2)
        self.k = 0

    def advance(self, kend):
        """Select and insert points until ``kend`` have been inserted."""
        kend = min(int(kend), self.n)
        while self.k < kend:
            status, k = K.fps_kernel(
                self.tri._T, self.points, self.start, self.k, kend, self.perm,
                self.mind, self.owner, self.dmin, self.bhead, self.bnext,
                self.bprev, self.val, self.idx, self.size2, *self.log.args())
            self.k = int(k)
            if status == K.OK:
                break
            if status == K.DUPLICATE:
                raise _duplicate(k)
            if status == K.GROW_POOL:
                self.log.grow()
            else:
                self.tri._handle_status(status)

    def check_buckets(self):
        """Brute-force check that the buckets partition the uninserted points
        by nearest inserted site. Raises ``AssertionError`` on failure."""
        k = self.k
        if k == 0 or k == self.n:
            return
        inserted = self.perm[:k]
        seen = np.zeros(self.n, dtype=bool)
        seen[inserted] = True
        sites = self.points[inserted]
        for s in range(k):
            y = self.bhead[s]
            while y >= 0:
                assert not seen[y], f"point {y} is in two buckets or inserted"
                seen[y] = True
                diff = sites - self.points[y]
                d2 = (diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1])
                if diff.shape[1] == 3:
                    d2 = d2 + diff[:, 2] * diff[:, 2]
                best = int(np.argmin(d2))
                assert best == s, f"point {y} sits in bucket {s}, nearest is {best}"
                assert d2[best] == self.dmin[y], f"stale distance for point {y}"
                y = self.bnext[y]
        assert seen.all(), "some uninserted point is in no bucket"

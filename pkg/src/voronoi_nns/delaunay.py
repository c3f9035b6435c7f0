"""Incremental Delaunay triangulation in 2-d and 3-d.

The heavy lifting happens in :mod:`voronoi_nns._delaunay_kernels`; this
module owns the storage, grows it on demand, and exposes the handle-based API
used by the ordering and query-table code.
"""

from dataclasses import dataclass

import numpy as np

from . import _delaunay_kernels as K
from .exceptions import DimensionError, DuplicatePointError

__all__ = ["Triangulation", "InsertionOutcome", "new_triangulation"]

_VALIDATE_MESSAGES = {
    1: "cell {a} has a dead or missing neighbour at facet {b}",
    2: "cell {a} facet {b}: neighbour does not link back",
    3: "cell {a} facet {b}: neighbour shares a different facet",
    4: "finite cell {a} is not positively oriented",
    5: "cell {a} holds more than one infinite vertex",
    6: "vertex {b} lies inside the circumsphere of cell {a}",
    7: "vertex {b} lies beyond hull facet of infinite cell {a}",
    8: "vertex {a} has no valid incident cell",
    9: "pre-simplex bookkeeping is inconsistent",
}


@dataclass(frozen=True)
class InsertionOutcome:
    """Result of a single insertion.

    ``encroached`` holds the earlier vertices adjacent to ``new_vertex`` right
    after the insertion (all earlier vertices while the point set is still
    affinely degenerate).
    """

    new_vertex: int
    encroached: np.ndarray


class Triangulation:
    """Delaunay triangulation built by Bowyer-Watson insertion.

    Vertex handles are consecutive integers in insertion order. Cospherical
    ties are resolved by symbolic perturbation keyed on the handle, so the
    structure is unique for a given point sequence.

    Parameters
    ----------
    dimension : int
        2 or 3.
    seed : int
        Seeds the facet order of the point-location walk.
    capacity : int
        Expected number of vertices; storage grows past it when needed.
    """

    def __init__(self, dimension, seed=0, capacity=16):
        if dimension not in (2, 3):
            raise DimensionError(f"dimension must be 2 or 3, got {dimension!r}")
        self.dimension = int(dimension)
        capacity = max(int(capacity), 8)
        D = self.dimension + 1
        cell_factor = 4 if dimension == 2 else 8
        self._coords = np.zeros((capacity, dimension))
        self._vcell = np.full(capacity, -1, dtype=np.int64)
        self._pre = np.zeros(capacity, dtype=np.int64)
        self._enc = np.zeros(capacity, dtype=np.int64)
        self._vmark = np.zeros(capacity + 1, dtype=np.int64)
        self._rhead = np.zeros(capacity + 1, dtype=np.int64)
        self._rstamp = np.zeros(capacity + 1, dtype=np.int64)
        ccap = cell_factor * capacity + 64
        self._cells = np.full((ccap, D), -1, dtype=np.int64)
        self._nbrs = np.full((ccap, D), -1, dtype=np.int64)
        self._alive = np.zeros(ccap, dtype=np.uint8)
        self._free = np.zeros(ccap, dtype=np.int64)
        self._cmark = np.zeros(ccap, dtype=np.int64)
        self._alloc_scratch(1024)
        self._meta = np.zeros(K.META_SIZE, dtype=np.int64)
        self._meta[K.RNG] = (int(seed) * 2654435761 + 12345) & ((1 << 62) - 1)
        self._refresh()

    # --- storage ----------------------------------------------------------

    def _alloc_scratch(self, size):
        D = self.dimension + 1
        self._stack = np.zeros(size, dtype=np.int64)
        self._clist = np.zeros(size, dtype=np.int64)
        self._bcell = np.zeros(size, dtype=np.int64)
        self._bidx = np.zeros(size, dtype=np.int64)
        rsize = size * (D - 1)
        self._rnext = np.zeros(rsize, dtype=np.int64)
        self._rcell = np.zeros(rsize, dtype=np.int64)
        self._ridx = np.zeros(rsize, dtype=np.int64)
        self._rkey = np.zeros(rsize, dtype=np.int64)

    def _refresh(self):
        self._T = (self._coords, self._cells, self._nbrs, self._alive, self._free,
                   self._vcell, self._pre, self._cmark, self._vmark, self._meta,
                   self._stack, self._clist, self._bcell, self._bidx, self._rhead,
                   self._rstamp, self._rnext, self._rcell, self._ridx, self._rkey,
                   self._enc)

    @staticmethod
    def _grown(arr, size, fill=0):
        out = np.full((size,) + arr.shape[1:], fill, dtype=arr.dtype)
        out[: arr.shape[0]] = arr
        return out

    def _grow_vertices(self, minimum):
        size = max(2 * self._coords.shape[0], minimum)
        self._coords = self._grown(self._coords, size, 0.0)
        self._vcell = self._grown(self._vcell, size, -1)
        self._pre = self._grown(self._pre, size)
        self._enc = self._grown(self._enc, size)
        # the last slot of the vertex-stamp arrays stands for the infinite vertex
        for name in ("_vmark", "_rhead", "_rstamp"):
            old = getattr(self, name)
            new = np.zeros(size + 1, dtype=np.int64)
            new[: old.shape[0] - 1] = old[:-1]
            new[size] = old[-1]
            setattr(self, name, new)
        self._refresh()

    def _grow_cells(self):
        size = 2 * self._cells.shape[0]
        self._cells = self._grown(self._cells, size, -1)
        self._nbrs = self._grown(self._nbrs, size, -1)
        self._alive = self._grown(self._alive, size)
        self._free = self._grown(self._free, size)
        self._cmark = self._grown(self._cmark, size)
        self._refresh()

    def _grow_scratch(self):
        self._alloc_scratch(2 * self._stack.shape[0])
        self._refresh()

    def _handle_status(self, status):
        if status == K.GROW_CELLS:
            self._grow_cells()
        elif status == K.GROW_SCRATCH:
            self._grow_scratch()
        else:
            raise RuntimeError(f"unexpected kernel status {status}")

    def _ensure_vertex_capacity(self, n):
        if n > self._coords.shape[0]:
            self._grow_vertices(n)
        need_cells = (4 if self.dimension == 2 else 8) * n + 64
        while self._cells.shape[0] < need_cells:
            self._grow_cells()

    # --- queries ----------------------------------------------------------

    @property
    def n_vertices(self):
        return int(self._meta[K.NVERT])

    @property
    def rank(self):
        """Affine rank of the inserted points, capped at ``dimension + 1``."""
        return int(self._meta[K.RANK])

    @property
    def pre_simplex_set(self):
        return self._pre[: self._meta[K.NPRE]].copy()

    @property
    def points(self):
        return self._coords[: self.n_vertices]

    @property
    def walk_steps(self):
        return int(self._meta[K.STEPS])

    @property
    def walk_fallbacks(self):
        return int(self._meta[K.FALLBACK])

    def _alive_ids(self):
        hw = self._meta[K.HW]
        return np.flatnonzero(self._alive[:hw])

    @property
    def simplices(self):
        """Finite cells as an ``(m, d+1)`` array of vertex handles."""
        ids = self._alive_ids()
        cells = self._cells[ids]
        return cells[(cells >= 0).all(axis=1)].copy()

    @property
    def n_simplices(self):
        return int(self.simplices.shape[0])

    def _check_point(self, p):
        p = np.asarray(p, dtype=float).reshape(-1)
        if p.shape[0] != self.dimension:
            raise DimensionError(
                f"expected a {self.dimension}-d point, got {p.shape[0]} coordinates")
        if not np.all(np.isfinite(p)):
            raise ValueError(f"point has non-finite coordinates: {p}")
        return p

    def _check_handle(self, v):
        if not 0 <= int(v) < self.n_vertices:
            raise IndexError(f"invalid vertex handle {v}")
        return int(v)

    def insert(self, p, hint=None):
        """Insert ``p`` and report the earlier vertices it became adjacent to."""
        p = self._check_point(p)
        h = -1 if hint is None else self._check_handle(hint)
        v = self.n_vertices
        self._ensure_vertex_capacity(v + 1)
        self._coords[v] = p
        while True:
            status, n = K.tri_insert(self._T, h)
            if status == K.OK:
                break
            if status == K.DUPLICATE:
                raise DuplicatePointError(
                    f"point {p.tolist()} duplicates an existing vertex", indices=[v])
            self._handle_status(status)
        return InsertionOutcome(v, np.sort(self._enc[:n]))

    def locate(self, p, hint=None):
        """Return ``(cell, outside)`` for ``p``.

        ``cell`` is the index of a finite cell whose closed region contains
        ``p``, or, when ``outside`` is true, an infinite cell whose hull facet
        is visible from ``p``. Use :meth:`cell_vertices` to read it.
        """
        if self.rank < self.dimension + 1:
            raise RuntimeError("locate needs a full-dimensional triangulation")
        p = self._check_point(p)
        h = self._meta[K.LAST] if hint is None else self._check_handle(hint)
        # scratch vertex slot past the last real vertex
        v = self.n_vertices
        self._ensure_vertex_capacity(v + 1)
        self._coords[v] = p
        c = int(K.locate_cell(self._T, v, self._vcell[h]))
        return c, bool((self._cells[c] < 0).any())

    def cell_vertices(self, c):
        """Vertex handles of cell ``c``; -1 marks the infinite vertex."""
        return self._cells[c].copy()

    def neighbors(self, v):
        """Handles of all vertices sharing an edge with ``v``."""
        v = self._check_handle(v)
        out = np.empty(max(self.n_vertices, 1), dtype=np.int64)
        n = K.vertex_neighbors(self._T, v, out)
        return np.sort(out[:n])

    def validate(self):
        """Brute-force check of adjacency and the empty-circumsphere property.

        Returns ``(ok, message)``. Costs O(n * cells); meant for tests.
        """
        code, a, b = K.validate_kernel(self._T)
        if code == 0:
            return True, "ok"
        return False, _VALIDATE_MESSAGES[int(code)].format(a=a, b=b)

    @classmethod
    def from_simplices(cls, points, simplices):
        """Assemble a triangulation from explicit finite simplices.

        No Delaunay repair is performed; this exists so that :meth:`validate`
        can be exercised on arbitrary (possibly non-Delaunay) meshes.
        """
        points = np.asarray(points, dtype=float)
        n, d = points.shape
        tri = cls(d, capacity=n)
        D = d + 1
        tri._coords[:n] = points
        cells = []
        for s in simplices:
            s = [int(x) for x in s]
            if K.orient_ids(points, np.asarray(s, dtype=np.int64)) < 0:
                s[0], s[1] = s[1], s[0]
            cells.append(s)
        facet_owner = {}
        for ci, s in enumerate(cells):
            for k in range(D):
                key = tuple(sorted(s[:k] + s[k + 1:]))
                facet_owner.setdefault(key, []).append(ci)
        for key, owners in facet_owner.items():
            if len(owners) == 1:
                s = list(cells[owners[0]])
                k = next(i for i in range(D) if s[i] not in key)
                s[k] = K.INF
                a, b = (k + 1) % D, (k + 2) % D
                s[a], s[b] = s[b], s[a]
                cells.append(s)
        m = len(cells)
        while tri._cells.shape[0] < m:
            tri._grow_cells()
        index = {}
        for ci, s in enumerate(cells):
            tri._cells[ci] = s
            tri._alive[ci] = 1
            for k in range(D):
                index.setdefault(tuple(sorted(s[:k] + s[k + 1:])), []).append((ci, k))
        for pairs in index.values():
            if len(pairs) == 2:
                (c1, k1), (c2, k2) = pairs
                tri._nbrs[c1, k1] = c2
                tri._nbrs[c2, k2] = c1
        for ci, s in enumerate(cells):
            for v in s:
                if v >= 0:
                    tri._vcell[v] = ci
        tri._meta[K.HW] = m
        tri._meta[K.NALIVE] = m
        tri._meta[K.NVERT] = n
        tri._meta[K.RANK] = D
        tri._meta[K.LAST] = n - 1
        tri._refresh()
        return tri


def new_triangulation(dimension, seed=0):
    """Empty triangulation of the given dimension (2 or 3)."""
    return Triangulation(dimension, seed=seed)

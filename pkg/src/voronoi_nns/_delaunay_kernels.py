"""Numba kernels for incremental Bowyer-Watson Delaunay triangulation.

The triangulation is stored CGAL-style: every facet of the convex hull is
closed off by an infinite cell containing the virtual vertex ``INF``. Finite
cells are positively oriented; an infinite cell is stored so that replacing
``INF`` by a point beyond its hull facet gives a positive simplex.

All state lives in a tuple of arrays (see ``state_tuple`` in ``delaunay.py``)
so kernels can be cached. Kernels never reallocate; when an array is too
small they return a ``GROW_*`` status *before* mutating the structure and the
caller retries after growing.
"""

import numpy as np
from numba import njit

from ._predicates import (
    in_sphere_sos,
    orient2,
    orient3,
    orient_ids,
    orient_replace,
)

INF = -1

OK = 0
GROW_CELLS = 1
GROW_SCRATCH = 2
GROW_POOL = 3
DUPLICATE = -1

# meta slots
HW = 0        # high-water mark of cell slots
NFREE = 1
NVERT = 2
RANK = 3
NPRE = 4
RNG = 5
STAMP = 6
LAST = 7
B0 = 8
B1 = 9
B2 = 10
NALIVE = 11
STEPS = 12
FALLBACK = 13
VSTAMP = 14
RSTAMP = 15
META_SIZE = 16

_MASK62 = (1 << 62) - 1


@njit(cache=True, inline="always")
def _rand(meta):
    x = (meta[RNG] * 6364136223846793005 + 1442695040888963407) & _MASK62
    meta[RNG] = x
    return x >> 20


@njit(cache=True, inline="always")
def sqdist(coords, i, q):
    s = 0.0
    for a in range(coords.shape[1]):
        t = coords[i, a] - q[a]
        s += t * t
    return s


@njit(cache=True)
def _inf_pos(cells, c):
    for k in range(cells.shape[1]):
        if cells[c, k] < 0:
            return k
    return -1


@njit(cache=True)
def _alloc(cells, alive, free, meta):
    nf = meta[NFREE]
    if nf > 0:
        c = free[nf - 1]
        meta[NFREE] = nf - 1
    else:
        c = meta[HW]
        meta[HW] = c + 1
    alive[c] = 1
    meta[NALIVE] += 1
    return c


@njit(cache=True)
def _in_conflict(coords, cells, nbrs, c, p):
    k = _inf_pos(cells, c)
    if k < 0:
        return in_sphere_sos(coords, cells[c], p) > 0
    o = orient_replace(coords, cells[c], k, p)
    if o != 0:
        return o > 0
    # p on the hull facet's plane: conflict iff inside the facet's circumcircle,
    # which is the finite neighbour's circumsphere restricted to that plane
    return in_sphere_sos(coords, cells[nbrs[c, k]], p) > 0


@njit(cache=True)
def _same_point(coords, u, v):
    for a in range(coords.shape[1]):
        if coords[u, a] != coords[v, a]:
            return False
    return True


@njit(cache=True)
def locate_cell(T, p, start):
    """Return a cell in conflict with vertex ``p`` (a containing finite cell or
    a strictly visible infinite cell)."""
    (coords, cells, nbrs, alive, free, vcell, pre, cmark, vmark, meta,
     stack, clist, bcell, bidx, rhead, rstamp, rnext, rcell, ridx, rkey, enc) = T
    D = cells.shape[1]
    d = D - 1
    c = start
    k = _inf_pos(cells, c)
    if k >= 0:
        c = nbrs[c, k]
    maxsteps = 10 * int(meta[NALIVE] ** (1.0 / d) + 1.0) * d
    prev = -1
    steps = 0
    while steps < maxsteps:
        steps += 1
        if _inf_pos(cells, c) >= 0:
            meta[STEPS] += steps
            return c
        r = _rand(meta) % D
        moved = False
        for t in range(D):
            k = (r + t) % D
            n = nbrs[c, k]
            if n == prev:
                continue
            if orient_replace(coords, cells[c], k, p) < 0:
                prev = c
                c = n
                moved = True
                break
        if not moved:
            meta[STEPS] += steps
            return c
    meta[FALLBACK] += 1
    hw = meta[HW]
    for c in range(hw):
        if alive[c] == 0 or _inf_pos(cells, c) >= 0:
            continue
        inside = True
        for k in range(D):
            if orient_replace(coords, cells[c], k, p) < 0:
                inside = False
                break
        if inside:
            return c
    for c in range(hw):
        if alive[c] == 0:
            continue
        k = _inf_pos(cells, c)
        if k >= 0 and orient_replace(coords, cells[c], k, p) > 0:
            return c
    return -1


@njit(cache=True)
def _insert_bw(T, p, start):
    """Bowyer-Watson insertion of vertex ``p``; returns (status, n_encroached)."""
    (coords, cells, nbrs, alive, free, vcell, pre, cmark, vmark, meta,
     stack, clist, bcell, bidx, rhead, rstamp, rnext, rcell, ridx, rkey, enc) = T
    D = cells.shape[1]
    ninf = vmark.shape[0] - 1

    c0 = locate_cell(T, p, start)
    if _inf_pos(cells, c0) < 0:
        for i in range(D):
            if _same_point(coords, cells[c0, i], p):
                return DUPLICATE, 0

    stamp = meta[STAMP] + 2
    meta[STAMP] = stamp
    conf = stamp
    non = stamp + 1
    cmark[c0] = conf
    clist[0] = c0
    ncl = 1
    stack[0] = c0
    sp = 1
    nb = 0
    while sp > 0:
        sp -= 1
        c = stack[sp]
        for k in range(D):
            n = nbrs[c, k]
            m = cmark[n]
            if m == conf:
                continue
            if m != non:
                if _in_conflict(coords, cells, nbrs, n, p):
                    cmark[n] = conf
                    if ncl >= clist.shape[0]:
                        return GROW_SCRATCH, 0
                    clist[ncl] = n
                    ncl += 1
                    stack[sp] = n
                    sp += 1
                    continue
                cmark[n] = non
            if nb >= bcell.shape[0]:
                return GROW_SCRATCH, 0
            bcell[nb] = c
            bidx[nb] = k
            nb += 1

    if nb * (D - 1) > rnext.shape[0]:
        return GROW_SCRATCH, 0
    if meta[NFREE] + cells.shape[0] - meta[HW] < nb:
        return GROW_CELLS, 0

    # new cells: each boundary facet coned to p
    for b in range(nb):
        c = bcell[b]
        k = bidx[b]
        t = _alloc(cells, alive, free, meta)
        for i in range(D):
            cells[t, i] = cells[c, i]
        cells[t, k] = p
        n = nbrs[c, k]
        nbrs[t, k] = n
        for j in range(D):
            if nbrs[n, j] == c:
                nbrs[n, j] = t
                break
        bcell[b] = t

    # glue new cells along the ridges they share (all ridges contain p)
    rs = meta[RSTAMP] + 1
    meta[RSTAMP] = rs
    ne = 0
    for b in range(nb):
        t = bcell[b]
        k = bidx[b]
        for i in range(D):
            if i == k:
                continue
            if D == 3:
                a = cells[t, 3 - k - i]
                key = a if a >= 0 else ninf
                other = -2
            else:
                j1 = -1
                j2 = -1
                for j in range(4):
                    if j != k and j != i:
                        if j1 < 0:
                            j1 = j
                        else:
                            j2 = j
                a = cells[t, j1]
                bb = cells[t, j2]
                ka = a if a >= 0 else ninf
                kb = bb if bb >= 0 else ninf
                if ka < kb:
                    key = ka
                    other = kb
                else:
                    key = kb
                    other = ka
            if rstamp[key] != rs:
                rstamp[key] = rs
                rhead[key] = -1
            prev_e = -1
            e = rhead[key]
            while e >= 0:
                if rkey[e] == other:
                    break
                prev_e = e
                e = rnext[e]
            if e >= 0:
                t2 = rcell[e]
                i2 = ridx[e]
                nbrs[t, i] = t2
                nbrs[t2, i2] = t
                if prev_e < 0:
                    rhead[key] = rnext[e]
                else:
                    rnext[prev_e] = rnext[e]
            else:
                rcell[ne] = t
                ridx[ne] = i
                rkey[ne] = other
                rnext[ne] = rhead[key]
                rhead[key] = ne
                ne += 1

    for b in range(nb):
        t = bcell[b]
        for i in range(D):
            v = cells[t, i]
            if v >= 0:
                vcell[v] = t

    for i in range(ncl):
        c = clist[i]
        alive[c] = 0
        free[meta[NFREE]] = c
        meta[NFREE] += 1
        meta[NALIVE] -= 1

    vs = meta[VSTAMP] + 1
    meta[VSTAMP] = vs
    nenc = 0
    for b in range(nb):
        t = bcell[b]
        for i in range(D):
            v = cells[t, i]
            if v >= 0 and v != p and vmark[v] != vs:
                vmark[v] = vs
                enc[nenc] = v
                nenc += 1
    return OK, nenc


@njit(cache=True)
def _collinear3(coords, a, b, c):
    pa = coords[a]
    pb = coords[b]
    pc = coords[c]
    return (orient2(pa[0], pa[1], pb[0], pb[1], pc[0], pc[1]) == 0
            and orient2(pa[1], pa[2], pb[1], pb[2], pc[1], pc[2]) == 0
            and orient2(pa[0], pa[2], pb[0], pb[2], pc[0], pc[2]) == 0)


@njit(cache=True)
def _make_first_simplex(T, ids):
    (coords, cells, nbrs, alive, free, vcell, pre, cmark, vmark, meta,
     stack, clist, bcell, bidx, rhead, rstamp, rnext, rcell, ridx, rkey, enc) = T
    D = cells.shape[1]
    if orient_ids(coords, ids) < 0:
        tmp = ids[0]
        ids[0] = ids[1]
        ids[1] = tmp
    f = _alloc(cells, alive, free, meta)
    for i in range(D):
        cells[f, i] = ids[i]
    infc = np.empty(D, dtype=np.int64)
    for k in range(D):
        c = _alloc(cells, alive, free, meta)
        for i in range(D):
            cells[c, i] = ids[i]
        cells[c, k] = INF
        a = (k + 1) % D
        b = (k + 2) % D
        tmp = cells[c, a]
        cells[c, a] = cells[c, b]
        cells[c, b] = tmp
        infc[k] = c
        nbrs[f, k] = c
    for k in range(D):
        c = infc[k]
        for i in range(D):
            w = cells[c, i]
            if w == INF:
                nbrs[c, i] = f
            else:
                j = 0
                while ids[j] != w:
                    j += 1
                nbrs[c, i] = infc[j]
    for i in range(D):
        vcell[ids[i]] = f


@njit(cache=True)
def vertex_neighbors(T, v, out):
    """Write the vertices sharing an edge with ``v`` into ``out``; return count.

    Before the first full-dimensional simplex exists, every other inserted
    vertex is reported.
    """
    (coords, cells, nbrs, alive, free, vcell, pre, cmark, vmark, meta,
     stack, clist, bcell, bidx, rhead, rstamp, rnext, rcell, ridx, rkey, enc) = T
    D = cells.shape[1]
    if meta[RANK] < D:
        n = 0
        for i in range(meta[NPRE]):
            if pre[i] != v:
                out[n] = pre[i]
                n += 1
        return n
    vs = meta[VSTAMP] + 1
    meta[VSTAMP] = vs
    stamp = meta[STAMP] + 2
    meta[STAMP] = stamp
    st = np.empty(64, dtype=np.int64)
    c = vcell[v]
    cmark[c] = stamp
    st[0] = c
    sp = 1
    n = 0
    while sp > 0:
        sp -= 1
        c = st[sp]
        j = 0
        while cells[c, j] != v:
            j += 1
        for i in range(D):
            if i == j:
                continue
            w = cells[c, i]
            if w >= 0 and vmark[w] != vs:
                vmark[w] = vs
                out[n] = w
                n += 1
            nc = nbrs[c, i]
            if cmark[nc] != stamp:
                cmark[nc] = stamp
                if sp >= st.shape[0]:
                    grown = np.empty(2 * st.shape[0], dtype=np.int64)
                    grown[:sp] = st[:sp]
                    st = grown
                st[sp] = nc
                sp += 1
    return n


@njit(cache=True)
def _insert_presimplex(T, v):
    (coords, cells, nbrs, alive, free, vcell, pre, cmark, vmark, meta,
     stack, clist, bcell, bidx, rhead, rstamp, rnext, rcell, ridx, rkey, enc) = T
    D = cells.shape[1]
    d = D - 1
    npre = meta[NPRE]
    for i in range(npre):
        if _same_point(coords, pre[i], v):
            return DUPLICATE, 0
    rank = meta[RANK]
    full = False
    if rank == 0:
        meta[B0] = v
        rank = 1
    elif rank == 1:
        meta[B1] = v
        rank = 2
    elif rank == 2:
        if d == 2:
            a = coords[meta[B0]]
            b = coords[meta[B1]]
            c = coords[v]
            full = orient2(a[0], a[1], b[0], b[1], c[0], c[1]) != 0
        elif not _collinear3(coords, meta[B0], meta[B1], v):
            meta[B2] = v
            rank = 3
    else:
        full = orient3(coords[meta[B0]], coords[meta[B1]],
                       coords[meta[B2]], coords[v]) != 0

    if not full:
        meta[RANK] = rank
        for i in range(npre):
            enc[i] = pre[i]
        pre[npre] = v
        meta[NPRE] = npre + 1
        meta[NVERT] = v + 1
        meta[LAST] = v
        return OK, npre

    need = 64 + 16 * (npre + 2) * D
    if meta[NFREE] + cells.shape[0] - meta[HW] < need:
        return GROW_CELLS, 0
    if clist.shape[0] < need or rnext.shape[0] < need * (D - 1):
        return GROW_SCRATCH, 0

    ids = np.empty(D, dtype=np.int64)
    ids[0] = meta[B0]
    ids[1] = meta[B1]
    if d == 3:
        ids[2] = meta[B2]
    ids[D - 1] = v
    _make_first_simplex(T, ids)
    for i in range(npre):
        u = pre[i]
        if u == meta[B0] or u == meta[B1] or (d == 3 and u == meta[B2]):
            continue
        status, _ = _insert_bw(T, u, vcell[meta[B0]])
        if status != OK:
            return status, 0
    meta[NPRE] = 0
    meta[RANK] = D
    meta[NVERT] = v + 1
    meta[LAST] = v
    n = vertex_neighbors(T, v, enc)
    return OK, n


@njit(cache=True)
def tri_insert(T, hint):
    """Insert vertex ``meta[NVERT]`` (coordinates already written).

    ``hint`` is a vertex whose incident cell seeds the point-location walk;
    pass -1 to start from the last inserted vertex.
    """
    cells = T[1]
    vcell = T[5]
    meta = T[9]
    D = cells.shape[1]
    v = meta[NVERT]
    if meta[RANK] < D:
        return _insert_presimplex(T, v)
    h = hint if hint >= 0 else meta[LAST]
    status, n = _insert_bw(T, v, vcell[h])
    if status == OK:
        meta[NVERT] = v + 1
        meta[LAST] = v
    return status, n


@njit(cache=True)
def validate_kernel(T):
    """Brute-force structural and empty-sphere check.

    Returns ``(code, a, b)``; code 0 means valid.
    """
    (coords, cells, nbrs, alive, free, vcell, pre, cmark, vmark, meta,
     stack, clist, bcell, bidx, rhead, rstamp, rnext, rcell, ridx, rkey, enc) = T
    D = cells.shape[1]
    nv = meta[NVERT]
    if meta[RANK] < D:
        if meta[NALIVE] != 0 or meta[NPRE] != nv:
            return 9, -1, -1
        return 0, -1, -1
    hw = meta[HW]
    for c in range(hw):
        if alive[c] == 0:
            continue
        ninf = 0
        for i in range(D):
            if cells[c, i] < 0:
                ninf += 1
        if ninf > 1:
            return 5, c, -1
        for k in range(D):
            n = nbrs[c, k]
            if n < 0 or n >= hw or alive[n] == 0:
                return 1, c, k
            back = -1
            for j in range(D):
                if nbrs[n, j] == c:
                    back = j
            if back < 0:
                return 2, c, k
            # facets must carry the same vertex set
            for i in range(D):
                if i == k:
                    continue
                w = cells[c, i]
                found = False
                for j in range(D):
                    if j != back and cells[n, j] == w:
                        found = True
                if not found:
                    return 3, c, k
        if ninf == 0 and orient_ids(coords, cells[c]) <= 0:
            return 4, c, -1
    for v in range(nv):
        c = vcell[v]
        if c < 0 or c >= hw or alive[c] == 0:
            return 8, v, -1
        has = False
        for i in range(D):
            if cells[c, i] == v:
                has = True
        if not has:
            return 8, v, -1
    for c in range(hw):
        if alive[c] == 0:
            continue
        k = _inf_pos(cells, c)
        for v in range(nv):
            member = False
            for i in range(D):
                if cells[c, i] == v:
                    member = True
            if member:
                continue
            if k < 0:
                if in_sphere_sos(coords, cells[c], v) > 0:
                    return 6, c, v
            elif _in_conflict(coords, cells, nbrs, c, v):
                return 7, c, v
    return 0, -1, -1


# --- batch drivers ----------------------------------------------------------

@njit(cache=True)
def _prefix_nearest_dynamic(coords, q, lhead, lnext, lval):
    cur = 0
    dcur = sqdist(coords, 0, q)
    e = lhead[0]
    while e >= 0:
        j = lval[e]
        dj = sqdist(coords, j, q)
        if dj < dcur:
            cur = j
            dcur = dj
            e = lhead[j]
        else:
            e = lnext[e]
    return cur


@njit(cache=True)
def _record(enc, nenc, k, enc_ptr, enc_vals, lhead, ltail, lnext, lval):
    base = enc_ptr[k]
    for i in range(nenc):
        x = enc[i]
        e = base + i
        enc_vals[e] = x
        lval[e] = k
        lnext[e] = -1
        if ltail[x] >= 0:
            lnext[ltail[x]] = e
        else:
            lhead[x] = e
        ltail[x] = e
    enc_ptr[k + 1] = base + nenc


@njit(cache=True)
def build_kernel(T, k0, n, hint_mode, enc_ptr, enc_vals, lhead, ltail, lnext, lval):
    """Insert vertices ``k0..n-1`` recording each insertion's encroached set.

    ``hint_mode`` 0 seeds each walk at the previous vertex; 1 seeds it at the
    nearest earlier vertex found by querying the partially built table.
    Returns ``(status, k)`` where ``k`` is the first vertex not inserted.
    """
    coords = T[0]
    enc = T[20]
    for k in range(k0, n):
        if enc_vals.shape[0] - enc_ptr[k] < k:
            return GROW_POOL, k
        hint = -1
        if hint_mode == 1 and k > 0:
            hint = _prefix_nearest_dynamic(coords, coords[k], lhead, lnext, lval)
        status, nenc = tri_insert(T, hint)
        if status != OK:
            return status, k
        _record(enc, nenc, k, enc_ptr, enc_vals, lhead, ltail, lnext, lval)
    return OK, n


@njit(cache=True)
def seg_pull(val, idx, pos):
    l = 2 * pos
    r = l + 1
    if val[l] > val[r] or (val[l] == val[r] and idx[l] <= idx[r]):
        val[pos] = val[l]
        idx[pos] = idx[l]
    else:
        val[pos] = val[r]
        idx[pos] = idx[r]


@njit(cache=True)
def seg_set(val, idx, size2, i, v):
    pos = size2 + i
    val[pos] = v
    pos >>= 1
    while pos >= 1:
        seg_pull(val, idx, pos)
        pos >>= 1


@njit(cache=True)
def seg_rebuild(val, idx, size2):
    for pos in range(size2 - 1, 0, -1):
        seg_pull(val, idx, pos)


@njit(cache=True)
def _bucket_remove(y, s, bhead, bnext, bprev):
    p = bprev[y]
    nx = bnext[y]
    if p >= 0:
        bnext[p] = nx
    else:
        bhead[s] = nx
    if nx >= 0:
        bprev[nx] = p


@njit(cache=True)
def _bucket_push(y, s, bhead, bnext, bprev):
    h = bhead[s]
    bnext[y] = h
    bprev[y] = -1
    if h >= 0:
        bprev[h] = y
    bhead[s] = y


@njit(cache=True)
def fps_init(pts, start, owner, dmin, bhead, bnext, bprev, val, idx, size2):
    n = pts.shape[0]
    for s in range(n):
        bhead[s] = -1
    for y in range(n - 1, -1, -1):
        owner[y] = 0
        if y == start:
            dmin[y] = -np.inf
            bnext[y] = -1
            bprev[y] = -1
        else:
            dmin[y] = sqdist(pts, y, pts[start])
            _bucket_push(y, 0, bhead, bnext, bprev)
    for i in range(size2):
        if i < n:
            val[size2 + i] = dmin[i]
        else:
            val[size2 + i] = -np.inf
        idx[size2 + i] = i
    seg_rebuild(val, idx, size2)


@njit(cache=True)
def fps_kernel(T, pts, start, k0, kend, perm, mind, owner, dmin, bhead, bnext, bprev,
               val, idx, size2, enc_ptr, enc_vals, lhead, ltail, lnext, lval):
    """Farthest-point traversal coupled with Delaunay insertion.

    Vertex ``k`` of the triangulation is the ``k``-th selected point. Each
    uninserted point sits in the bucket of its nearest inserted vertex; after
    inserting a vertex only the buckets of its encroached neighbours are
    rescanned.
    """
    coords = T[0]
    enc = T[20]
    for k in range(k0, kend):
        if enc_vals.shape[0] - enc_ptr[k] < k:
            return GROW_POOL, k
        x = idx[1] if k > 0 else start
        for a in range(pts.shape[1]):
            coords[k, a] = pts[x, a]
        status, nenc = tri_insert(T, owner[x] if k > 0 else -1)
        if status != OK:
            return status, k
        perm[k] = x
        if k == 0:
            mind[k] = np.inf
        else:
            mind[k] = np.sqrt(val[1])
            _bucket_remove(x, owner[x], bhead, bnext, bprev)
        seg_set(val, idx, size2, x, -np.inf)
        dmin[x] = -np.inf
        owner[x] = k
        _record(enc, nenc, k, enc_ptr, enc_vals, lhead, ltail, lnext, lval)
        for i in range(nenc):
            s = enc[i]
            y = bhead[s]
            while y >= 0:
                ny = bnext[y]
                dd = sqdist(pts, y, coords[k])
                if dd < dmin[y]:
                    _bucket_remove(y, s, bhead, bnext, bprev)
                    _bucket_push(y, k, bhead, bnext, bprev)
                    owner[y] = k
                    dmin[y] = dd
                    seg_set(val, idx, size2, y, dd)
                y = ny
    return OK, kend


@njit(cache=True)
def csr_from_records(enc_ptr, enc_vals, n):
    """Turn per-insertion encroached sets into per-vertex Query Lists."""
    total = enc_ptr[n]
    counts = np.zeros(n + 1, dtype=np.int64)
    for e in range(total):
        counts[enc_vals[e] + 1] += 1
    for i in range(n):
        counts[i + 1] += counts[i]
    offsets = counts.copy()
    fill = counts[:n].copy()
    entries = np.empty(total, dtype=np.int64)
    for k in range(n):
        for e in range(enc_ptr[k], enc_ptr[k + 1]):
            x = enc_vals[e]
            entries[fill[x]] = k
            fill[x] += 1
    return offsets, entries

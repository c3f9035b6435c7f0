"""Filtered geometric predicates with an exact expansion-arithmetic fallback.

Floating-point evaluation is accepted when the result clears a forward error
bound (the stage-A bounds of Shewchuk's predicates); otherwise the determinant
is re-evaluated exactly with nonoverlapping floating-point expansions built
from the raw input coordinates.

Sign conventions used across the package:

* ``orient(p0, .., pd)`` is the sign of ``det[p1 - p0, .., pd - p0]``; the
  canonical simplex ``(0, e1, .., ed)`` is positive.
* ``in_sphere(p0, .., pd, q)`` is positive iff ``q`` lies strictly inside the
  circumsphere of a positively oriented simplex.
"""

import numpy as np
from numba import njit

_EPS = 2.0 ** -53
_SPLITTER = 134217729.0  # 2**27 + 1

CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
O3D_BOUND = (7.0 + 56.0 * _EPS) * _EPS
ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS
ISP_BOUND = (16.0 + 224.0 * _EPS) * _EPS


# --- expansion arithmetic -------------------------------------------------
# Expansions are 1-d float arrays of nonoverlapping components sorted by
# increasing magnitude. Zero is represented as ``[0.0]``; arrays are never empty.

@njit(cache=True, inline="always")
def _two_sum(a, b):
    x = a + b
    bv = x - a
    av = x - bv
    return x, (a - av) + (b - bv)


@njit(cache=True, inline="always")
def _fast_two_sum(a, b):
    x = a + b
    return x, b - (x - a)


@njit(cache=True, inline="always")
def _split(a):
    c = _SPLITTER * a
    abig = c - a
    ahi = c - abig
    return ahi, a - ahi


@njit(cache=True, inline="always")
def _two_product(a, b):
    x = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = x - ahi * bhi
    err = err - alo * bhi
    err = err - ahi * blo
    return x, alo * blo - err


@njit(cache=True)
def _exp_diff(a, b):
    """Exact ``a - b`` as a two-component expansion."""
    x = a - b
    bv = a - x
    av = x + bv
    y = (a - av) + (bv - b)
    out = np.empty(2)
    if y == 0.0:
        out = np.empty(1)
        out[0] = x
        return out
    out[0] = y
    out[1] = x
    return out


@njit(cache=True)
def _grow(e, b):
    h = np.empty(e.shape[0] + 1)
    q = b
    n = 0
    for i in range(e.shape[0]):
        q, hh = _two_sum(q, e[i])
        if hh != 0.0:
            h[n] = hh
            n += 1
    if q != 0.0 or n == 0:
        h[n] = q
        n += 1
    return h[:n]


@njit(cache=True)
def _add(e, f):
    h = e
    for i in range(f.shape[0]):
        if f[i] != 0.0:
            h = _grow(h, f[i])
    return h


@njit(cache=True)
def _neg(e):
    return -e


@njit(cache=True)
def _sub(e, f):
    return _add(e, -f)


@njit(cache=True)
def _scale(e, b):
    h = np.empty(2 * e.shape[0] + 1)
    if b == 0.0:
        h[0] = 0.0
        return h[:1]
    bhi, blo = _split(b)
    n = 0
    x = e[0] * b
    ahi, alo = _split(e[0])
    err = x - ahi * bhi
    err = err - alo * bhi
    err = err - ahi * blo
    hh = alo * blo - err
    q = x
    if hh != 0.0:
        h[n] = hh
        n += 1
    for i in range(1, e.shape[0]):
        p1 = e[i] * b
        ahi, alo = _split(e[i])
        err = p1 - ahi * bhi
        err = err - alo * bhi
        err = err - ahi * blo
        p0 = alo * blo - err
        s, hh = _two_sum(q, p0)
        if hh != 0.0:
            h[n] = hh
            n += 1
        q, hh = _fast_two_sum(p1, s)
        if hh != 0.0:
            h[n] = hh
            n += 1
    if q != 0.0 or n == 0:
        h[n] = q
        n += 1
    return h[:n]


@njit(cache=True)
def _mul(e, f):
    h = _scale(e, f[0])
    for i in range(1, f.shape[0]):
        h = _add(h, _scale(e, f[i]))
    return h


@njit(cache=True)
def _sign(e):
    v = e[e.shape[0] - 1]
    if v > 0.0:
        return 1
    if v < 0.0:
        return -1
    return 0


@njit(cache=True)
def _det2_exp(a, b, c, d):
    """Exact ``a*d - b*c`` of expansions."""
    return _sub(_mul(a, d), _mul(b, c))



# --- double-double intermediate stage --------------------------------------
# Each double-double operation below has relative error at most 7u^2
# (u = 2**-53). The determinant evaluations have depth <= 8, so their
# absolute error is below 64u^2 times the permanent; DD_BOUND adds margin.

DD_BOUND = 2.0 ** -98
_DD_MIN = 1e-200
_DD_MAX = 1e200


@njit(cache=True)
def _two_diff(a, b):
    x = a - b
    bv = a - x
    av = x + bv
    return x, (a - av) + (bv - b)


@njit(cache=True)
def _dd_add(ah, al, bh, bl):
    sh, sl = _two_sum(ah, bh)
    th, tl = _two_sum(al, bl)
    c = sl + th
    vh, vl = _fast_two_sum(sh, c)
    w = tl + vl
    return _fast_two_sum(vh, w)


@njit(cache=True)
def _dd_sub(ah, al, bh, bl):
    return _dd_add(ah, al, -bh, -bl)


@njit(cache=True)
def _dd_mul(ah, al, bh, bl):
    ch, cl1 = _two_product(ah, bh)
    cl4 = ah * bl + al * bh
    cl5 = cl1 + cl4
    return _fast_two_sum(ch, cl5)


@njit(cache=True)
def _dd_det2(ah, al, bh, bl, ch, cl, dh, dl):
    """``a*d - b*c`` in double-double."""
    xh, xl = _dd_mul(ah, al, dh, dl)
    yh, yl = _dd_mul(bh, bl, ch, cl)
    return _dd_sub(xh, xl, yh, yl)


@njit(cache=True)
def _incircle_dd(a, b, c, d):
    adxh, adxl = _two_diff(a[0], d[0])
    adyh, adyl = _two_diff(a[1], d[1])
    bdxh, bdxl = _two_diff(b[0], d[0])
    bdyh, bdyl = _two_diff(b[1], d[1])
    cdxh, cdxl = _two_diff(c[0], d[0])
    cdyh, cdyl = _two_diff(c[1], d[1])
    t1h, t1l = _dd_mul(adxh, adxl, adxh, adxl)
    t2h, t2l = _dd_mul(adyh, adyl, adyh, adyl)
    alh, all_ = _dd_add(t1h, t1l, t2h, t2l)
    t1h, t1l = _dd_mul(bdxh, bdxl, bdxh, bdxl)
    t2h, t2l = _dd_mul(bdyh, bdyl, bdyh, bdyl)
    blh, bll = _dd_add(t1h, t1l, t2h, t2l)
    t1h, t1l = _dd_mul(cdxh, cdxl, cdxh, cdxl)
    t2h, t2l = _dd_mul(cdyh, cdyl, cdyh, cdyl)
    clh, cll = _dd_add(t1h, t1l, t2h, t2l)
    m1h, m1l = _dd_det2(bdxh, bdxl, cdxh, cdxl, bdyh, bdyl, cdyh, cdyl)
    m2h, m2l = _dd_det2(cdxh, cdxl, adxh, adxl, cdyh, cdyl, adyh, adyl)
    m3h, m3l = _dd_det2(adxh, adxl, bdxh, bdxl, adyh, adyl, bdyh, bdyl)
    x1h, x1l = _dd_mul(alh, all_, m1h, m1l)
    x2h, x2l = _dd_mul(blh, bll, m2h, m2l)
    x3h, x3l = _dd_mul(clh, cll, m3h, m3l)
    sh, sl = _dd_add(x1h, x1l, x2h, x2l)
    sh, sl = _dd_add(sh, sl, x3h, x3l)
    return sh + sl


@njit(cache=True)
def _insphere_dd(a, b, c, d, e):
    aexh, aexl = _two_diff(a[0], e[0])
    aeyh, aeyl = _two_diff(a[1], e[1])
    aezh, aezl = _two_diff(a[2], e[2])
    bexh, bexl = _two_diff(b[0], e[0])
    beyh, beyl = _two_diff(b[1], e[1])
    bezh, bezl = _two_diff(b[2], e[2])
    cexh, cexl = _two_diff(c[0], e[0])
    ceyh, ceyl = _two_diff(c[1], e[1])
    cezh, cezl = _two_diff(c[2], e[2])
    dexh, dexl = _two_diff(d[0], e[0])
    deyh, deyl = _two_diff(d[1], e[1])
    dezh, dezl = _two_diff(d[2], e[2])
    abh, abl = _dd_det2(aexh, aexl, bexh, bexl, aeyh, aeyl, beyh, beyl)
    bch, bcl = _dd_det2(bexh, bexl, cexh, cexl, beyh, beyl, ceyh, ceyl)
    cdh, cdl = _dd_det2(cexh, cexl, dexh, dexl, ceyh, ceyl, deyh, deyl)
    dah, dal = _dd_det2(dexh, dexl, aexh, aexl, deyh, deyl, aeyh, aeyl)
    ach, acl = _dd_det2(aexh, aexl, cexh, cexl, aeyh, aeyl, ceyh, ceyl)
    bdh, bdl = _dd_det2(bexh, bexl, dexh, dexl, beyh, beyl, deyh, deyl)
    # abc = aez*bc - bez*ac + cez*ab
    xh, xl = _dd_mul(aezh, aezl, bch, bcl)
    yh, yl = _dd_mul(bezh, bezl, ach, acl)
    zh, zl = _dd_mul(cezh, cezl, abh, abl)
    abch, abcl = _dd_sub(xh, xl, yh, yl)
    abch, abcl = _dd_add(abch, abcl, zh, zl)
    # bcd = bez*cd - cez*bd + dez*bc
    xh, xl = _dd_mul(bezh, bezl, cdh, cdl)
    yh, yl = _dd_mul(cezh, cezl, bdh, bdl)
    zh, zl = _dd_mul(dezh, dezl, bch, bcl)
    bcdh, bcdl = _dd_sub(xh, xl, yh, yl)
    bcdh, bcdl = _dd_add(bcdh, bcdl, zh, zl)
    # cda = cez*da + dez*ac + aez*cd
    xh, xl = _dd_mul(cezh, cezl, dah, dal)
    yh, yl = _dd_mul(dezh, dezl, ach, acl)
    zh, zl = _dd_mul(aezh, aezl, cdh, cdl)
    cdah, cdal = _dd_add(xh, xl, yh, yl)
    cdah, cdal = _dd_add(cdah, cdal, zh, zl)
    # dab = dez*ab + aez*bd + bez*da
    xh, xl = _dd_mul(dezh, dezl, abh, abl)
    yh, yl = _dd_mul(aezh, aezl, bdh, bdl)
    zh, zl = _dd_mul(bezh, bezl, dah, dal)
    dabh, dabl = _dd_add(xh, xl, yh, yl)
    dabh, dabl = _dd_add(dabh, dabl, zh, zl)
    # lifts
    xh, xl = _dd_mul(aexh, aexl, aexh, aexl)
    yh, yl = _dd_mul(aeyh, aeyl, aeyh, aeyl)
    zh, zl = _dd_mul(aezh, aezl, aezh, aezl)
    alh, all_ = _dd_add(xh, xl, yh, yl)
    alh, all_ = _dd_add(alh, all_, zh, zl)
    xh, xl = _dd_mul(bexh, bexl, bexh, bexl)
    yh, yl = _dd_mul(beyh, beyl, beyh, beyl)
    zh, zl = _dd_mul(bezh, bezl, bezh, bezl)
    blh, bll = _dd_add(xh, xl, yh, yl)
    blh, bll = _dd_add(blh, bll, zh, zl)
    xh, xl = _dd_mul(cexh, cexl, cexh, cexl)
    yh, yl = _dd_mul(ceyh, ceyl, ceyh, ceyl)
    zh, zl = _dd_mul(cezh, cezl, cezh, cezl)
    clh, cll = _dd_add(xh, xl, yh, yl)
    clh, cll = _dd_add(clh, cll, zh, zl)
    xh, xl = _dd_mul(dexh, dexl, dexh, dexl)
    yh, yl = _dd_mul(deyh, deyl, deyh, deyl)
    zh, zl = _dd_mul(dezh, dezl, dezh, dezl)
    dlh, dll = _dd_add(xh, xl, yh, yl)
    dlh, dll = _dd_add(dlh, dll, zh, zl)
    # det = (dlift*abc - clift*dab) + (blift*cda - alift*bcd)
    xh, xl = _dd_mul(dlh, dll, abch, abcl)
    yh, yl = _dd_mul(clh, cll, dabh, dabl)
    lh, ll = _dd_sub(xh, xl, yh, yl)
    xh, xl = _dd_mul(blh, bll, cdah, cdal)
    yh, yl = _dd_mul(alh, all_, bcdh, bcdl)
    rh, rl = _dd_sub(xh, xl, yh, yl)
    sh, sl = _dd_add(lh, ll, rh, rl)
    return sh + sl


# --- orientation ----------------------------------------------------------

@njit(cache=True)
def _orient2_exact(ax, ay, bx, by, cx, cy):
    acx = _exp_diff(ax, cx)
    acy = _exp_diff(ay, cy)
    bcx = _exp_diff(bx, cx)
    bcy = _exp_diff(by, cy)
    return _sign(_det2_exp(acx, acy, bcx, bcy))


@njit(cache=True)
def orient2(ax, ay, bx, by, cx, cy):
    """Sign of the 2-d orientation determinant; positive for a CCW triangle."""
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    if detleft > 0.0:
        if detright <= 0.0:
            return 1 if det > 0.0 else (-1 if det < 0.0 else 0)
        detsum = detleft + detright
    elif detleft < 0.0:
        if detright >= 0.0:
            return 1 if det > 0.0 else (-1 if det < 0.0 else 0)
        detsum = -detleft - detright
    else:
        return 1 if det > 0.0 else (-1 if det < 0.0 else 0)
    bound = CCW_BOUND * detsum
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return _orient2_exact(ax, ay, bx, by, cx, cy)


@njit(cache=True)
def _o3d_exact(a, b, c, d):
    adx = _exp_diff(a[0], d[0])
    ady = _exp_diff(a[1], d[1])
    adz = _exp_diff(a[2], d[2])
    bdx = _exp_diff(b[0], d[0])
    bdy = _exp_diff(b[1], d[1])
    bdz = _exp_diff(b[2], d[2])
    cdx = _exp_diff(c[0], d[0])
    cdy = _exp_diff(c[1], d[1])
    cdz = _exp_diff(c[2], d[2])
    t1 = _mul(adz, _det2_exp(bdx, cdx, bdy, cdy))
    t2 = _mul(bdz, _det2_exp(cdx, adx, cdy, ady))
    t3 = _mul(cdz, _det2_exp(adx, bdx, ady, bdy))
    return _sign(_add(_add(t1, t2), t3))


@njit(cache=True)
def _o3d(a, b, c, d):
    # Shewchuk convention: positive when d lies below the plane of CCW a, b, c
    adx = a[0] - d[0]
    bdx = b[0] - d[0]
    cdx = c[0] - d[0]
    ady = a[1] - d[1]
    bdy = b[1] - d[1]
    cdy = c[1] - d[1]
    adz = a[2] - d[2]
    bdz = b[2] - d[2]
    cdz = c[2] - d[2]
    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    cdxady = cdx * ady
    adxcdy = adx * cdy
    adxbdy = adx * bdy
    bdxady = bdx * ady
    det = (adz * (bdxcdy - cdxbdy)
           + bdz * (cdxady - adxcdy)
           + cdz * (adxbdy - bdxady))
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * abs(adz)
                 + (abs(cdxady) + abs(adxcdy)) * abs(bdz)
                 + (abs(adxbdy) + abs(bdxady)) * abs(cdz))
    bound = O3D_BOUND * permanent
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return _o3d_exact(a, b, c, d)


@njit(cache=True)
def orient3(p0, p1, p2, p3):
    """Sign of ``det[p1-p0, p2-p0, p3-p0]``."""
    return _o3d(p1, p2, p3, p0)


# --- in-sphere ------------------------------------------------------------

@njit(cache=True)
def _incircle_exact(a, b, c, d):
    adx = _exp_diff(a[0], d[0])
    ady = _exp_diff(a[1], d[1])
    bdx = _exp_diff(b[0], d[0])
    bdy = _exp_diff(b[1], d[1])
    cdx = _exp_diff(c[0], d[0])
    cdy = _exp_diff(c[1], d[1])
    alift = _add(_mul(adx, adx), _mul(ady, ady))
    blift = _add(_mul(bdx, bdx), _mul(bdy, bdy))
    clift = _add(_mul(cdx, cdx), _mul(cdy, cdy))
    t1 = _mul(alift, _det2_exp(bdx, cdx, bdy, cdy))
    t2 = _mul(blift, _det2_exp(cdx, adx, cdy, ady))
    t3 = _mul(clift, _det2_exp(adx, bdx, ady, bdy))
    return _sign(_add(_add(t1, t2), t3))


@njit(cache=True)
def incircle(a, b, c, d):
    """Positive iff ``d`` is strictly inside the circle through CCW ``a, b, c``."""
    adx = a[0] - d[0]
    bdx = b[0] - d[0]
    cdx = c[0] - d[0]
    ady = a[1] - d[1]
    bdy = b[1] - d[1]
    cdy = c[1] - d[1]
    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady
    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy
    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy
    det = (alift * (bdxcdy - cdxbdy)
           + blift * (cdxady - adxcdy)
           + clift * (adxbdy - bdxady))
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * alift
                 + (abs(cdxady) + abs(adxcdy)) * blift
                 + (abs(adxbdy) + abs(bdxady)) * clift)
    bound = ICC_BOUND * permanent
    if det > bound:
        return 1
    if -det > bound:
        return -1
    if _DD_MIN < permanent < _DD_MAX:
        det = _incircle_dd(a, b, c, d)
        bound = DD_BOUND * permanent
        if det > bound:
            return 1
        if -det > bound:
            return -1
    return _incircle_exact(a, b, c, d)


@njit(cache=True)
def _insphere_exact(a, b, c, d, e):
    aex = _exp_diff(a[0], e[0])
    aey = _exp_diff(a[1], e[1])
    aez = _exp_diff(a[2], e[2])
    bex = _exp_diff(b[0], e[0])
    bey = _exp_diff(b[1], e[1])
    bez = _exp_diff(b[2], e[2])
    cex = _exp_diff(c[0], e[0])
    cey = _exp_diff(c[1], e[1])
    cez = _exp_diff(c[2], e[2])
    dex = _exp_diff(d[0], e[0])
    dey = _exp_diff(d[1], e[1])
    dez = _exp_diff(d[2], e[2])
    ab = _det2_exp(aex, bex, aey, bey)
    bc = _det2_exp(bex, cex, bey, cey)
    cd = _det2_exp(cex, dex, cey, dey)
    da = _det2_exp(dex, aex, dey, aey)
    ac = _det2_exp(aex, cex, aey, cey)
    bd = _det2_exp(bex, dex, bey, dey)
    abc = _add(_sub(_mul(aez, bc), _mul(bez, ac)), _mul(cez, ab))
    bcd = _add(_sub(_mul(bez, cd), _mul(cez, bd)), _mul(dez, bc))
    cda = _add(_add(_mul(cez, da), _mul(dez, ac)), _mul(aez, cd))
    dab = _add(_add(_mul(dez, ab), _mul(aez, bd)), _mul(bez, da))
    alift = _add(_add(_mul(aex, aex), _mul(aey, aey)), _mul(aez, aez))
    blift = _add(_add(_mul(bex, bex), _mul(bey, bey)), _mul(bez, bez))
    clift = _add(_add(_mul(cex, cex), _mul(cey, cey)), _mul(cez, cez))
    dlift = _add(_add(_mul(dex, dex), _mul(dey, dey)), _mul(dez, dez))
    left = _sub(_mul(dlift, abc), _mul(clift, dab))
    right = _sub(_mul(blift, cda), _mul(alift, bcd))
    return _sign(_add(left, right))


@njit(cache=True)
def _insphere(a, b, c, d, e):
    # Shewchuk convention: a, b, c, d must satisfy _o3d(a, b, c, d) > 0
    aex = a[0] - e[0]
    bex = b[0] - e[0]
    cex = c[0] - e[0]
    dex = d[0] - e[0]
    aey = a[1] - e[1]
    bey = b[1] - e[1]
    cey = c[1] - e[1]
    dey = d[1] - e[1]
    aez = a[2] - e[2]
    bez = b[2] - e[2]
    cez = c[2] - e[2]
    dez = d[2] - e[2]
    aexbey = aex * bey
    bexaey = bex * aey
    ab = aexbey - bexaey
    bexcey = bex * cey
    cexbey = cex * bey
    bc = bexcey - cexbey
    cexdey = cex * dey
    dexcey = dex * cey
    cd = cexdey - dexcey
    dexaey = dex * aey
    aexdey = aex * dey
    da = dexaey - aexdey
    aexcey = aex * cey
    cexaey = cex * aey
    ac = aexcey - cexaey
    bexdey = bex * dey
    dexbey = dex * bey
    bd = bexdey - dexbey
    abc = aez * bc - bez * ac + cez * ab
    bcd = bez * cd - cez * bd + dez * bc
    cda = cez * da + dez * ac + aez * cd
    dab = dez * ab + aez * bd + bez * da
    alift = aex * aex + aey * aey + aez * aez
    blift = bex * bex + bey * bey + bez * bez
    clift = cex * cex + cey * cey + cez * cez
    dlift = dex * dex + dey * dey + dez * dez
    det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd)
    aezp = abs(aez)
    bezp = abs(bez)
    cezp = abs(cez)
    dezp = abs(dez)
    aexbeyp = abs(aexbey)
    bexaeyp = abs(bexaey)
    bexceyp = abs(bexcey)
    cexbeyp = abs(cexbey)
    cexdeyp = abs(cexdey)
    dexceyp = abs(dexcey)
    dexaeyp = abs(dexaey)
    aexdeyp = abs(aexdey)
    aexceyp = abs(aexcey)
    cexaeyp = abs(cexaey)
    bexdeyp = abs(bexdey)
    dexbeyp = abs(dexbey)
    permanent = (((cexdeyp + dexceyp) * bezp
                  + (dexbeyp + bexdeyp) * cezp
                  + (bexceyp + cexbeyp) * dezp) * alift
                 + ((dexaeyp + aexdeyp) * cezp
                    + (aexceyp + cexaeyp) * dezp
                    + (cexdeyp + dexceyp) * aezp) * blift
                 + ((aexbeyp + bexaeyp) * dezp
                    + (bexdeyp + dexbeyp) * aezp
                    + (dexaeyp + aexdeyp) * bezp) * clift
                 + ((bexceyp + cexbeyp) * aezp
                    + (cexaeyp + aexceyp) * bezp
                    + (aexbeyp + bexaeyp) * cezp) * dlift)
    bound = ISP_BOUND * permanent
    if det > bound:
        return 1
    if -det > bound:
        return -1
    if _DD_MIN < permanent < _DD_MAX:
        det = _insphere_dd(a, b, c, d, e)
        bound = DD_BOUND * permanent
        if det > bound:
            return 1
        if -det > bound:
            return -1
    return _insphere_exact(a, b, c, d, e)


@njit(cache=True)
def insphere3(p0, p1, p2, p3, q):
    """Positive iff ``q`` is strictly inside the sphere of positive ``p0..p3``."""
    return _insphere(p1, p2, p3, p0, q)


# --- index-based dispatch used by the triangulation kernels ---------------

@njit(cache=True)
def orient_ids(coords, ids):
    """Orientation of the simplex whose vertex rows are ``coords[ids]``."""
    if ids.shape[0] == 3:
        a = coords[ids[0]]
        b = coords[ids[1]]
        c = coords[ids[2]]
        return orient2(a[0], a[1], b[0], b[1], c[0], c[1])
    return orient3(coords[ids[0]], coords[ids[1]], coords[ids[2]], coords[ids[3]])


@njit(cache=True)
def orient_replace(coords, cell, k, p):
    """Orientation of ``cell`` with its ``k``-th vertex replaced by vertex ``p``."""
    if cell.shape[0] == 3:
        i0 = p if k == 0 else cell[0]
        i1 = p if k == 1 else cell[1]
        i2 = p if k == 2 else cell[2]
        a = coords[i0]
        b = coords[i1]
        c = coords[i2]
        return orient2(a[0], a[1], b[0], b[1], c[0], c[1])
    i0 = p if k == 0 else cell[0]
    i1 = p if k == 1 else cell[1]
    i2 = p if k == 2 else cell[2]
    i3 = p if k == 3 else cell[3]
    return orient3(coords[i0], coords[i1], coords[i2], coords[i3])


@njit(cache=True)
def in_sphere_raw(coords, cell, q):
    """Unperturbed in-sphere sign of vertex ``q`` against positive ``cell``."""
    if cell.shape[0] == 3:
        return incircle(coords[cell[0]], coords[cell[1]], coords[cell[2]], coords[q])
    return insphere3(coords[cell[0]], coords[cell[1]], coords[cell[2]],
                     coords[cell[3]], coords[q])


@njit(cache=True)
def in_sphere_sos(coords, cell, q):
    """In-sphere sign with symbolic perturbation by vertex index.

    Each lifted coordinate ``|p_i|^2`` is raised by ``eps**(N - i)``, so the
    highest index carries the dominant perturbation. A query that is exactly
    cospherical with older vertices therefore lands outside. Never returns 0
    for a non-degenerate, positively oriented ``cell``.
    """
    s = in_sphere_raw(coords, cell, q)
    if s != 0:
        return s
    m = cell.shape[0]
    order = np.empty(m + 1, dtype=np.int64)
    for i in range(m):
        order[i] = cell[i]
    order[m] = q
    order = np.sort(order)
    for t in range(m, -1, -1):
        v = order[t]
        if v == q:
            return -1
        k = 0
        while cell[k] != v:
            k += 1
        o = orient_replace(coords, cell, k, q)
        if o != 0:
            return o
    return -1

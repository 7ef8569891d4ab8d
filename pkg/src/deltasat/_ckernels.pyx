# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interval kernel.

Line-for-line port of ``_pykernels``; results must be bit-identical to it.
Any change here needs the same change there (and vice versa).
"""

from libc.math cimport nextafter, sqrt, exp, log, sin, cos, asin, acos, floor, fabs, pow, INFINITY, isfinite

NAME = "cython"

cdef double INF = INFINITY
cdef double MAXF = 1.7976931348623157e308
cdef double PI_LO = 3.141592653589793
cdef double PI_HI = 3.1415926535897936
cdef double TWO_PI_HI = 6.283185307179587
cdef double SPLIT = 134217729.0

cdef enum:
    VAR = 0
    CONST = 1
    NEG = 2
    ADD = 3
    SUB = 4
    MUL = 5
    DIV = 6
    POW = 7
    EXP = 8
    SIN = 9
    COS = 10
    ABS = 11
    MIN = 12
    MAX = 13
    FLOW = 14

ctypedef (double, double) ival


cdef inline double _down(double x) nogil:
    return nextafter(x, -INF)


cdef inline double _up(double x) nogil:
    return nextafter(x, INF)


cdef inline double _min2(double a, double b) nogil:
    return b if b < a else a


cdef inline double _max2(double a, double b) nogil:
    return b if b > a else a


# ------------------------------------------------------ directed scalars


cdef double c_add_d(double a, double b) nogil:
    cdef double s = a + b
    cdef double bb, err
    if s != s:
        return -INF
    if s == INF or s == -INF:
        if isfinite(a) and isfinite(b):
            return MAXF if s > 0 else -INF
        return s
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return _down(s) if err < 0 else s


cdef double c_add_u(double a, double b) nogil:
    cdef double s = a + b
    cdef double bb, err
    if s != s:
        return INF
    if s == INF or s == -INF:
        if isfinite(a) and isfinite(b):
            return INF if s > 0 else -MAXF
        return s
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return _up(s) if err > 0 else s


cdef inline double c_sub_d(double a, double b) nogil:
    return c_add_d(a, -b)


cdef inline double c_sub_u(double a, double b) nogil:
    return c_add_u(a, -b)


cdef inline double _two_prod_err(double a, double b, double p) nogil:
    cdef double c, ah, al, bh, bl
    c = SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


cdef inline bint _dekker_ok(double a, double b, double p) nogil:
    cdef double fa = fabs(a)
    cdef double fb = fabs(b)
    return 1e-150 < fa < 1e150 and 1e-150 < fb < 1e150 and fabs(p) > 1e-250


cdef double c_mul_d(double a, double b) nogil:
    cdef double p, err
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if p != p:
        return -INF
    if p == INF or p == -INF:
        if isfinite(a) and isfinite(b):
            return MAXF if p > 0 else -INF
        return p
    if not _dekker_ok(a, b, p):
        return _down(p)
    err = _two_prod_err(a, b, p)
    return _down(p) if err < 0 else p


cdef double c_mul_u(double a, double b) nogil:
    cdef double p, err
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if p != p:
        return INF
    if p == INF or p == -INF:
        if isfinite(a) and isfinite(b):
            return INF if p > 0 else -MAXF
        return p
    if not _dekker_ok(a, b, p):
        return _up(p)
    err = _two_prod_err(a, b, p)
    return _up(p) if err > 0 else p


cdef double _div_dir(double a, double b, bint upward) nogil:
    cdef double q, p, err, d
    cdef bint greater
    if a == 0.0:
        return 0.0
    q = a / b
    if q != q:
        return INF if upward else -INF
    if q == INF or q == -INF:
        if isfinite(a) and isfinite(b):
            if upward:
                return INF if q > 0 else -MAXF
            return MAXF if q > 0 else -INF
        return q
    if b == INF or b == -INF:
        return q
    if not (1e-150 < fabs(q) < 1e150 and 1e-150 < fabs(b) < 1e150 and fabs(a) > 1e-250):
        return _up(q) if upward else _down(q)
    p = q * b
    err = _two_prod_err(q, b, p)
    d = a - p
    if d == err:
        return q
    if b > 0:
        greater = d > err
    else:
        greater = d < err
    if upward:
        return _up(q) if greater else q
    return q if greater else _down(q)


cdef inline double c_div_d(double a, double b) nogil:
    return _div_dir(a, b, False)


cdef inline double c_div_u(double a, double b) nogil:
    return _div_dir(a, b, True)


cdef double c_sqrt_d(double x) nogil:
    cdef double s, p, err, d
    if x <= 0.0:
        return 0.0
    s = sqrt(x)
    if x == INF:
        return MAXF
    if not (1e-250 < x < 1e300):
        return _down(s)
    p = s * s
    err = _two_prod_err(s, s, p)
    d = p - x
    if d == -err:
        return s
    return _down(s) if d > -err else s


cdef double c_sqrt_u(double x) nogil:
    cdef double s, p, err, d
    if x <= 0.0:
        return 0.0
    s = sqrt(x)
    if x == INF:
        return INF
    if not (1e-250 < x < 1e300):
        return _up(s)
    p = s * s
    err = _two_prod_err(s, s, p)
    d = p - x
    if d == -err:
        return s
    return s if d > -err else _up(s)


cdef double c_pow_d(double x, int n) nogil:
    cdef double r = 1.0
    cdef int i
    for i in range(n):
        r = c_mul_d(r, x)
    return r


cdef double c_pow_u(double x, int n) nogil:
    cdef double r = 1.0
    cdef int i
    for i in range(n):
        r = c_mul_u(r, x)
    return r


cdef double c_root_d(double v, int n) nogil:
    cdef double r
    if v <= 0.0:
        return 0.0
    if n == 1:
        return v
    if n == 2:
        return c_sqrt_d(v)
    if v == INF:
        return MAXF
    r = pow(v, 1.0 / n)
    r = _down(r * (1.0 - 1e-12))
    if c_pow_u(r, n) <= v:
        return r
    return 0.0


cdef double c_root_u(double v, int n) nogil:
    cdef double r
    if v <= 0.0:
        return 0.0
    if n == 1:
        return v
    if n == 2:
        return c_sqrt_u(v)
    if v == INF:
        return INF
    r = pow(v, 1.0 / n)
    r = _up(r * (1.0 + 1e-12))
    if c_pow_d(r, n) >= v:
        return r
    return INF


cdef double c_exp_d(double x) nogil:
    cdef double e, r
    if x == 0.0:
        return 1.0
    if x == -INF:
        return 0.0
    e = exp(x)
    if e == INF:
        return _down(_down(MAXF)) if x != INF else INF
    r = _down(_down(e))
    return r if r > 0.0 else 0.0


cdef double c_exp_u(double x) nogil:
    cdef double e
    if x == 0.0:
        return 1.0
    if x == -INF:
        return 0.0
    e = exp(x)
    if e == INF:
        return INF
    return _up(_up(e))


cdef double c_log_d(double x) nogil:
    if x <= 0.0:
        return -INF
    if x == INF:
        return MAXF
    if x == 1.0:
        return 0.0
    return _down(_down(log(x)))


cdef double c_log_u(double x) nogil:
    if x <= 0.0:
        return -INF
    if x == INF:
        return INF
    if x == 1.0:
        return 0.0
    return _up(_up(log(x)))


# ------------------------------------------------------- interval ops


cdef inline ival _empty() nogil:
    return (INF, -INF)


cdef inline ival c_meet(double alo, double ahi, double blo, double bhi) nogil:
    cdef double lo = _max2(alo, blo)
    cdef double hi = _min2(ahi, bhi)
    if lo > hi:
        return (INF, -INF)
    return (lo, hi)


cdef inline ival c_hull(double alo, double ahi, double blo, double bhi) nogil:
    if alo > ahi:
        return (blo, bhi)
    if blo > bhi:
        return (alo, ahi)
    return (_min2(alo, blo), _max2(ahi, bhi))


cdef ival c_i_add(double alo, double ahi, double blo, double bhi) nogil:
    if alo > ahi or blo > bhi:
        return (INF, -INF)
    return (c_add_d(alo, blo), c_add_u(ahi, bhi))


cdef ival c_i_sub(double alo, double ahi, double blo, double bhi) nogil:
    if alo > ahi or blo > bhi:
        return (INF, -INF)
    return (c_sub_d(alo, bhi), c_sub_u(ahi, blo))


cdef ival c_i_mul(double alo, double ahi, double blo, double bhi) nogil:
    cdef double lo, hi
    if alo > ahi or blo > bhi:
        return (INF, -INF)
    lo = _min2(_min2(c_mul_d(alo, blo), c_mul_d(alo, bhi)), _min2(c_mul_d(ahi, blo), c_mul_d(ahi, bhi)))
    hi = _max2(_max2(c_mul_u(alo, blo), c_mul_u(alo, bhi)), _max2(c_mul_u(ahi, blo), c_mul_u(ahi, bhi)))
    return (lo, hi)


cdef ival c_i_div(double alo, double ahi, double blo, double bhi, int* flag) nogil:
    cdef double lo, hi
    flag[0] = 0
    if alo > ahi or blo > bhi:
        return (INF, -INF)
    if blo > 0.0 or bhi < 0.0:
        lo = _min2(_min2(c_div_d(alo, blo), c_div_d(alo, bhi)), _min2(c_div_d(ahi, blo), c_div_d(ahi, bhi)))
        hi = _max2(_max2(c_div_u(alo, blo), c_div_u(alo, bhi)), _max2(c_div_u(ahi, blo), c_div_u(ahi, bhi)))
        return (lo, hi)
    if blo == 0.0 and bhi == 0.0:
        flag[0] = 1
        return (-INF, INF)
    if alo == 0.0 and ahi == 0.0:
        return (0.0, 0.0)
    if (alo <= 0.0 and 0.0 <= ahi) or (blo < 0.0 and 0.0 < bhi):
        return (-INF, INF)
    if alo > 0.0:
        if blo == 0.0:
            return (c_div_d(alo, bhi), INF)
        return (-INF, c_div_u(alo, blo))
    if blo == 0.0:
        return (-INF, c_div_u(ahi, bhi))
    return (c_div_d(ahi, blo), INF)


cdef ival c_rel_div(double xlo, double xhi, double clo, double chi, double blo, double bhi) nogil:
    cdef ival q, p1, p2
    cdef int flag
    if xlo > xhi or clo > chi or blo > bhi:
        return (INF, -INF)
    if blo > 0.0 or bhi < 0.0:
        q = c_i_div(clo, chi, blo, bhi, &flag)
        return c_meet(xlo, xhi, q[0], q[1])
    if clo <= 0.0 and 0.0 <= chi:
        return (xlo, xhi)
    p1 = (INF, -INF)
    p2 = (INF, -INF)
    if clo > 0.0:
        if bhi > 0.0:
            p1 = c_meet(xlo, xhi, c_div_d(clo, bhi), INF)
        if blo < 0.0:
            p2 = c_meet(xlo, xhi, -INF, c_div_u(clo, blo))
    else:
        if bhi > 0.0:
            p1 = c_meet(xlo, xhi, -INF, c_div_u(chi, bhi))
        if blo < 0.0:
            p2 = c_meet(xlo, xhi, c_div_d(chi, blo), INF)
    return c_hull(p1[0], p1[1], p2[0], p2[1])


cdef ival c_i_pow(double lo, double hi, int n) nogil:
    cdef double rlo, rhi
    if lo > hi:
        return (INF, -INF)
    if n == 1:
        return (lo, hi)
    if n % 2 == 1:
        rlo = c_pow_d(lo, n) if lo >= 0.0 else -c_pow_u(-lo, n)
        rhi = c_pow_u(hi, n) if hi >= 0.0 else -c_pow_d(-hi, n)
        return (rlo, rhi)
    if lo >= 0.0:
        return (c_pow_d(lo, n), c_pow_u(hi, n))
    if hi <= 0.0:
        return (c_pow_d(-hi, n), c_pow_u(-lo, n))
    return (0.0, c_pow_u(_max2(-lo, hi), n))


cdef inline double _trig_val_d(double v) nogil:
    cdef double r = _down(_down(v))
    return r if r > -1.0 else -1.0


cdef inline double _trig_val_u(double v) nogil:
    cdef double r = _up(_up(v))
    return r if r < 1.0 else 1.0


cdef bint _crit_in(double lo, double hi, double offset) nogil:
    cdef double k0 = floor((lo / PI_LO - offset) / 2.0)
    cdef double k, m, clo, chi
    cdef int i
    for i in range(4):
        k = k0 - 1.0 + i
        m = offset + 2.0 * k
        if m >= 0.0:
            clo = c_mul_d(m, PI_LO)
            chi = c_mul_u(m, PI_HI)
        else:
            clo = c_mul_d(m, PI_HI)
            chi = c_mul_u(m, PI_LO)
        if chi >= lo and clo <= hi:
            return True
    return False


cdef ival c_i_sin(double lo, double hi) nogil:
    cdef double sl, sh, rlo, rhi
    if lo > hi:
        return (INF, -INF)
    if not (isfinite(lo) and isfinite(hi)) or fabs(lo) > 1e15 or fabs(hi) > 1e15:
        return (-1.0, 1.0)
    if c_sub_u(hi, lo) >= TWO_PI_HI:
        return (-1.0, 1.0)
    if lo == 0.0 and hi == 0.0:
        return (0.0, 0.0)
    sl = sin(lo)
    sh = sin(hi)
    rlo = _trig_val_d(_min2(sl, sh))
    rhi = _trig_val_u(_max2(sl, sh))
    if _crit_in(lo, hi, 0.5):
        rhi = 1.0
    if _crit_in(lo, hi, 1.5):
        rlo = -1.0
    return (rlo, rhi)


cdef ival c_i_cos(double lo, double hi) nogil:
    cdef double cl, ch, rlo, rhi
    if lo > hi:
        return (INF, -INF)
    if not (isfinite(lo) and isfinite(hi)) or fabs(lo) > 1e15 or fabs(hi) > 1e15:
        return (-1.0, 1.0)
    if c_sub_u(hi, lo) >= TWO_PI_HI:
        return (-1.0, 1.0)
    if lo == 0.0 and hi == 0.0:
        return (1.0, 1.0)
    cl = cos(lo)
    ch = cos(hi)
    rlo = _trig_val_d(_min2(cl, ch))
    rhi = _trig_val_u(_max2(cl, ch))
    if _crit_in(lo, hi, 0.0):
        rhi = 1.0
    if _crit_in(lo, hi, 1.0):
        rlo = -1.0
    return (rlo, rhi)


cdef ival c_i_abs(double lo, double hi) nogil:
    if lo > hi:
        return (INF, -INF)
    if lo >= 0.0:
        return (lo, hi)
    if hi <= 0.0:
        return (-hi, -lo)
    return (0.0, _max2(-lo, hi))


# ------------------------------------------------- inverse projections


cdef inline ival _pi_multiple(double m) nogil:
    if m >= 0.0:
        return (c_mul_d(m, PI_LO), c_mul_u(m, PI_HI))
    return (c_mul_d(m, PI_HI), c_mul_u(m, PI_LO))


cdef ival _periodic_preimage(double xlo, double xhi, double p1lo, double p1hi,
                             double p2lo, double p2hi) nogil:
    cdef ival acc = (INF, -INF)
    cdef ival s, a, b
    cdef double k_lo = floor(xlo / TWO_PI_HI) - 1.0
    cdef double k_hi = floor(xhi / PI_LO / 2.0) + 1.0
    cdef double k = k_lo
    while k <= k_hi:
        s = _pi_multiple(2.0 * k)
        a = c_meet(xlo, xhi, c_add_d(p1lo, s[0]), c_add_u(p1hi, s[1]))
        acc = c_hull(acc[0], acc[1], a[0], a[1])
        b = c_meet(xlo, xhi, c_add_d(p2lo, s[0]), c_add_u(p2hi, s[1]))
        acc = c_hull(acc[0], acc[1], b[0], b[1])
        k += 1.0
    return acc


cdef ival c_sin_preimage(double xlo, double xhi, double clo, double chi) nogil:
    cdef double al, ah, plo, phi
    clo = _max2(clo, -1.0)
    chi = _min2(chi, 1.0)
    if clo > chi:
        return (INF, -INF)
    if clo <= -1.0 and chi >= 1.0:
        return (xlo, xhi)
    if not (isfinite(xlo) and isfinite(xhi)) or xhi - xlo > 25.0 or fabs(xlo) > 1e6 or fabs(xhi) > 1e6:
        return (xlo, xhi)
    al = _down(_down(asin(clo)))
    ah = _up(_up(asin(chi)))
    plo = c_sub_d(PI_LO, ah)
    phi = c_sub_u(PI_HI, al)
    return _periodic_preimage(xlo, xhi, al, ah, plo, phi)


cdef ival c_cos_preimage(double xlo, double xhi, double clo, double chi) nogil:
    cdef double al, ah
    clo = _max2(clo, -1.0)
    chi = _min2(chi, 1.0)
    if clo > chi:
        return (INF, -INF)
    if clo <= -1.0 and chi >= 1.0:
        return (xlo, xhi)
    if not (isfinite(xlo) and isfinite(xhi)) or xhi - xlo > 25.0 or fabs(xlo) > 1e6 or fabs(xhi) > 1e6:
        return (xlo, xhi)
    al = _down(_down(acos(chi)))
    if not al > 0.0:
        al = 0.0
    ah = _up(_up(acos(clo)))
    return _periodic_preimage(xlo, xhi, al, ah, -ah, -al)


cdef ival c_pow_preimage(double xlo, double xhi, double clo, double chi, int n) nogil:
    cdef double rlo, rhi
    cdef ival a, b
    if n == 1:
        return c_meet(xlo, xhi, clo, chi)
    if n % 2 == 1:
        rlo = c_root_d(clo, n) if clo >= 0.0 else -c_root_u(-clo, n)
        rhi = c_root_u(chi, n) if chi >= 0.0 else -c_root_d(-chi, n)
        return c_meet(xlo, xhi, rlo, rhi)
    if chi < 0.0:
        return (INF, -INF)
    clo = _max2(clo, 0.0)
    rlo = c_root_d(clo, n)
    rhi = c_root_u(chi, n)
    a = c_meet(xlo, xhi, rlo, rhi)
    b = c_meet(xlo, xhi, -rhi, -rlo)
    return c_hull(a[0], a[1], b[0], b[1])


cdef ival c_abs_preimage(double xlo, double xhi, double clo, double chi) nogil:
    cdef ival a, b
    if chi < 0.0:
        return (INF, -INF)
    clo = _max2(clo, 0.0)
    a = c_meet(xlo, xhi, clo, chi)
    b = c_meet(xlo, xhi, -chi, -clo)
    return c_hull(a[0], a[1], b[0], b[1])


# --------------------------------------------------------------- tapes


cdef int c_forward(const int[:] ops, const int[:] a1, const int[:] a2, const int[:] ia,
                   const double[:] clo, const double[:] chi, Py_ssize_t start, Py_ssize_t end,
                   double[:] box_lo, double[:] box_hi, double[:] vlo, double[:] vhi) nogil:
    cdef Py_ssize_t k, x, y
    cdef int op, f
    cdef int flags = 0
    cdef ival r
    for k in range(start, end):
        op = ops[k]
        x = a1[k]
        y = a2[k]
        if op == VAR:
            r = (box_lo[ia[k]], box_hi[ia[k]])
        elif op == CONST:
            r = (clo[k], chi[k])
        elif op == ADD:
            r = c_i_add(vlo[x], vhi[x], vlo[y], vhi[y])
        elif op == SUB:
            r = c_i_sub(vlo[x], vhi[x], vlo[y], vhi[y])
        elif op == MUL:
            r = c_i_mul(vlo[x], vhi[x], vlo[y], vhi[y])
        elif op == DIV:
            r = c_i_div(vlo[x], vhi[x], vlo[y], vhi[y], &f)
            flags |= f
        elif op == NEG:
            if vlo[x] > vhi[x]:
                r = (INF, -INF)
            else:
                r = (-vhi[x], -vlo[x])
        elif op == POW:
            r = c_i_pow(vlo[x], vhi[x], ia[k])
        elif op == EXP:
            if vlo[x] > vhi[x]:
                r = (INF, -INF)
            else:
                r = (c_exp_d(vlo[x]), c_exp_u(vhi[x]))
        elif op == SIN:
            r = c_i_sin(vlo[x], vhi[x])
        elif op == COS:
            r = c_i_cos(vlo[x], vhi[x])
        elif op == ABS:
            r = c_i_abs(vlo[x], vhi[x])
        elif op == MIN:
            if vlo[x] > vhi[x] or vlo[y] > vhi[y]:
                r = (INF, -INF)
            else:
                r = (_min2(vlo[x], vlo[y]), _min2(vhi[x], vhi[y]))
        elif op == MAX:
            if vlo[x] > vhi[x] or vlo[y] > vhi[y]:
                r = (INF, -INF)
            else:
                r = (_max2(vlo[x], vlo[y]), _max2(vhi[x], vhi[y]))
        else:
            return -1
        vlo[k] = r[0]
        vhi[k] = r[1]
    return flags


cdef inline bint _narrow(double[:] vlo, double[:] vhi, Py_ssize_t j, double lo, double hi) nogil:
    cdef double nlo = _max2(vlo[j], lo)
    cdef double nhi = _min2(vhi[j], hi)
    vlo[j] = nlo
    vhi[j] = nhi
    return nlo <= nhi


cdef bint c_backward(const int[:] ops, const int[:] a1, const int[:] a2, const int[:] ia,
                     Py_ssize_t start, Py_ssize_t end, double[:] vlo, double[:] vhi) nogil:
    cdef Py_ssize_t k, x, y
    cdef int op
    cdef double lo, hi
    cdef ival r
    k = end - 1
    while k >= start:
        op = ops[k]
        lo = vlo[k]
        hi = vhi[k]
        if lo > hi:
            return False
        x = a1[k]
        y = a2[k]
        if op == VAR or op == FLOW or op == CONST:
            pass
        elif op == ADD:
            if not _narrow(vlo, vhi, x, c_sub_d(lo, vhi[y]), c_sub_u(hi, vlo[y])):
                return False
            if not _narrow(vlo, vhi, y, c_sub_d(lo, vhi[x]), c_sub_u(hi, vlo[x])):
                return False
        elif op == SUB:
            if not _narrow(vlo, vhi, x, c_add_d(lo, vlo[y]), c_add_u(hi, vhi[y])):
                return False
            if not _narrow(vlo, vhi, y, c_sub_d(vlo[x], hi), c_sub_u(vhi[x], lo)):
                return False
        elif op == MUL:
            r = c_rel_div(vlo[x], vhi[x], lo, hi, vlo[y], vhi[y])
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
            r = c_rel_div(vlo[y], vhi[y], lo, hi, vlo[x], vhi[x])
            if not _narrow(vlo, vhi, y, r[0], r[1]):
                return False
        elif op == DIV:
            r = c_i_mul(lo, hi, vlo[y], vhi[y])
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
            r = c_rel_div(vlo[y], vhi[y], vlo[x], vhi[x], lo, hi)
            if not _narrow(vlo, vhi, y, r[0], r[1]):
                return False
        elif op == NEG:
            if not _narrow(vlo, vhi, x, -hi, -lo):
                return False
        elif op == POW:
            r = c_pow_preimage(vlo[x], vhi[x], lo, hi, ia[k])
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
        elif op == EXP:
            if hi <= 0.0:
                return False
            if not _narrow(vlo, vhi, x, c_log_d(lo), c_log_u(hi)):
                return False
        elif op == SIN:
            r = c_sin_preimage(vlo[x], vhi[x], lo, hi)
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
        elif op == COS:
            r = c_cos_preimage(vlo[x], vhi[x], lo, hi)
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
        elif op == ABS:
            r = c_abs_preimage(vlo[x], vhi[x], lo, hi)
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
        elif op == MIN:
            if not _narrow(vlo, vhi, x, lo, INF):
                return False
            if not _narrow(vlo, vhi, y, lo, INF):
                return False
            if vlo[y] > hi and not _narrow(vlo, vhi, x, lo, hi):
                return False
            if vlo[x] > hi and not _narrow(vlo, vhi, y, lo, hi):
                return False
        elif op == MAX:
            if not _narrow(vlo, vhi, x, -INF, hi):
                return False
            if not _narrow(vlo, vhi, y, -INF, hi):
                return False
            if vhi[y] < lo and not _narrow(vlo, vhi, x, lo, hi):
                return False
            if vhi[x] < lo and not _narrow(vlo, vhi, y, lo, hi):
                return False
        k -= 1
    return True


cdef int c_revise(const int[:] ops, const int[:] a1, const int[:] a2, const int[:] ia,
                  const double[:] clo, const double[:] chi, Py_ssize_t start, Py_ssize_t end,
                  double[:] box_lo, double[:] box_hi, double tlo, double thi,
                  double[:] vlo, double[:] vhi) nogil:
    cdef Py_ssize_t k, j
    cdef int status = 1
    cdef double nlo, nhi
    if c_forward(ops, a1, a2, ia, clo, chi, start, end, box_lo, box_hi, vlo, vhi) < 0:
        return -1
    if not _narrow(vlo, vhi, end - 1, tlo, thi):
        return 0
    if not c_backward(ops, a1, a2, ia, start, end, vlo, vhi):
        return 0
    for k in range(start, end):
        if ops[k] == VAR:
            j = ia[k]
            nlo = _max2(box_lo[j], vlo[k])
            nhi = _min2(box_hi[j], vhi[k])
            if nlo > nhi:
                return 0
            if nlo != box_lo[j] or nhi != box_hi[j]:
                box_lo[j] = nlo
                box_hi[j] = nhi
                status = 2
    return status


cdef inline bint _significant(double old_lo, double old_hi, double new_lo, double new_hi,
                              double rel_tol, double abs_tol) nogil:
    cdef double shrink = (new_lo - old_lo) + (old_hi - new_hi)
    cdef double width
    if shrink != shrink:
        return True
    width = old_hi - old_lo
    if width == INF:
        return new_hi - new_lo < INF
    return shrink > rel_tol * width and shrink > abs_tol


# ------------------------------------------------------ Python-facing API


def forward(const int[:] ops, const int[:] a1, const int[:] a2, const int[:] ia,
            const double[:] clo, const double[:] chi, Py_ssize_t start, Py_ssize_t end,
            double[:] box_lo, double[:] box_hi, double[:] vlo, double[:] vhi, flow_hook=None):
    cdef int flags
    with nogil:
        flags = c_forward(ops, a1, a2, ia, clo, chi, start, end, box_lo, box_hi, vlo, vhi)
    if flags < 0:
        raise ValueError("opcode not supported by the compiled kernel")
    return flags


def revise(const int[:] ops, const int[:] a1, const int[:] a2, const int[:] ia,
           const double[:] clo, const double[:] chi, Py_ssize_t start, Py_ssize_t end,
           double[:] box_lo, double[:] box_hi, double tlo, double thi,
           double[:] vlo, double[:] vhi, flow_hook=None):
    cdef int st
    with nogil:
        st = c_revise(ops, a1, a2, ia, clo, chi, start, end, box_lo, box_hi, tlo, thi, vlo, vhi)
    if st < 0:
        raise ValueError("opcode not supported by the compiled kernel")
    return st


cdef int c_fixpoint(const int[:] ops, const int[:] a1, const int[:] a2, const int[:] ia,
                    const double[:] clo, const double[:] chi, const Py_ssize_t[:] starts,
                    const Py_ssize_t[:] ends, const double[:] tlos, const double[:] this,
                    double[:] box_lo, double[:] box_hi, double rel_tol, double abs_tol,
                    int max_sweeps, double[:] vlo, double[:] vhi,
                    double[:] before_lo, double[:] before_hi) nogil:
    cdef Py_ssize_t m = starts.shape[0]
    cdef Py_ssize_t n = box_lo.shape[0]
    cdef Py_ssize_t c, j
    cdef int sweep, st
    cdef bint progress
    for sweep in range(max_sweeps):
        before_lo[:] = box_lo
        before_hi[:] = box_hi
        for c in range(m):
            st = c_revise(ops, a1, a2, ia, clo, chi, starts[c], ends[c], box_lo, box_hi,
                          tlos[c], this[c], vlo, vhi)
            if st <= 0:
                return st
        progress = False
        for j in range(n):
            if _significant(before_lo[j], before_hi[j], box_lo[j], box_hi[j], rel_tol, abs_tol):
                progress = True
                break
        if not progress:
            return 1
    return 1


def fixpoint(const int[:] ops, const int[:] a1, const int[:] a2, const int[:] ia,
             const double[:] clo, const double[:] chi, const Py_ssize_t[:] starts,
             const Py_ssize_t[:] ends, const double[:] tlos, const double[:] this,
             double[:] box_lo, double[:] box_hi, double rel_tol, double abs_tol,
             int max_sweeps, double[:] vlo, double[:] vhi, flow_hook=None):
    cdef double[:] before_lo = box_lo.copy()
    cdef double[:] before_hi = box_hi.copy()
    cdef int st
    with nogil:
        st = c_fixpoint(ops, a1, a2, ia, clo, chi, starts, ends, tlos, this, box_lo, box_hi,
                        rel_tol, abs_tol, max_sweeps, vlo, vhi, before_lo, before_hi)
    if st < 0:
        raise ValueError("opcode not supported by the compiled kernel")
    return st


# scalar and interval entry points, exposed for the backend-equivalence tests

def add_d(double a, double b): return c_add_d(a, b)
def add_u(double a, double b): return c_add_u(a, b)
def sub_d(double a, double b): return c_sub_d(a, b)
def sub_u(double a, double b): return c_sub_u(a, b)
def mul_d(double a, double b): return c_mul_d(a, b)
def mul_u(double a, double b): return c_mul_u(a, b)
def div_d(double a, double b): return c_div_d(a, b)
def div_u(double a, double b): return c_div_u(a, b)
def sqrt_d(double x): return c_sqrt_d(x)
def sqrt_u(double x): return c_sqrt_u(x)
def root_d(double v, int n): return c_root_d(v, n)
def root_u(double v, int n): return c_root_u(v, n)
def exp_d(double x): return c_exp_d(x)
def exp_u(double x): return c_exp_u(x)
def log_d(double x): return c_log_d(x)
def log_u(double x): return c_log_u(x)
def i_mul(double alo, double ahi, double blo, double bhi): return c_i_mul(alo, ahi, blo, bhi)
def i_pow(double lo, double hi, int n): return c_i_pow(lo, hi, n)
def i_sin(double lo, double hi): return c_i_sin(lo, hi)
def i_cos(double lo, double hi): return c_i_cos(lo, hi)


def i_div(double alo, double ahi, double blo, double bhi):
    cdef int flag
    cdef ival r = c_i_div(alo, ahi, blo, bhi, &flag)
    return r[0], r[1], flag


def rel_div(double xlo, double xhi, double clo, double chi, double blo, double bhi):
    return c_rel_div(xlo, xhi, clo, chi, blo, bhi)


def sin_preimage(double xlo, double xhi, double clo, double chi):
    return c_sin_preimage(xlo, xhi, clo, chi)


def cos_preimage(double xlo, double xhi, double clo, double chi):
    return c_cos_preimage(xlo, xhi, clo, chi)


def pow_preimage(double xlo, double xhi, double clo, double chi, int n):
    return c_pow_preimage(xlo, xhi, clo, chi, n)

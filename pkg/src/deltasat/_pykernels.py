"""Pure-Python interval kernel.

This module is the reference for ``_ckernels.pyx``: both implement the same
operations step for step, so on the same inputs they return bit-identical
results (``tests/test_kernels.py`` checks this).  Keep them in sync.

Intervals are ``(lo, hi)`` float pairs; the empty interval is ``(inf, -inf)``.
Directed rounding is emulated exactly for + - * / and sqrt with error-free
transformations (TwoSum, Dekker's product); library functions (exp, log,
sin, ...) are widened by two ulps on each side.
"""

import math
from math import inf, isfinite, nextafter

NAME = "python"

MAXF = 1.7976931348623157e308
PI_LO = 3.141592653589793  # math.pi is below pi
PI_HI = 3.1415926535897936
TWO_PI_HI = 6.283185307179587  # above 2*pi
SPLIT = 134217729.0  # 2**27 + 1

# tape opcodes
VAR, CONST, NEG, ADD, SUB, MUL, DIV, POW, EXP, SIN, COS, ABS, MIN, MAX, FLOW = range(15)

EMPTY = (inf, -inf)
ENTIRE = (-inf, inf)

# status flags returned by forward evaluation
FLAG_FULL_LINE = 1


def _down(x):
    return nextafter(x, -inf)


def _up(x):
    return nextafter(x, inf)


def _min2(a, b):
    return b if b < a else a


def _max2(a, b):
    return b if b > a else a


# ------------------------------------------------------ directed scalars


def add_d(a, b):
    s = a + b
    if s != s:
        return -inf
    if s == inf or s == -inf:
        if isfinite(a) and isfinite(b):
            return MAXF if s > 0 else -inf
        return s
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return _down(s) if err < 0 else s


def add_u(a, b):
    s = a + b
    if s != s:
        return inf
    if s == inf or s == -inf:
        if isfinite(a) and isfinite(b):
            return inf if s > 0 else -MAXF
        return s
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return _up(s) if err > 0 else s


def sub_d(a, b):
    return add_d(a, -b)


def sub_u(a, b):
    return add_u(a, -b)


def _two_prod_err(a, b, p):
    c = SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dekker_ok(a, b, p):
    fa = abs(a)
    fb = abs(b)
    return 1e-150 < fa < 1e150 and 1e-150 < fb < 1e150 and abs(p) > 1e-250


def mul_d(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if p != p:
        return -inf
    if p == inf or p == -inf:
        if isfinite(a) and isfinite(b):
            return MAXF if p > 0 else -inf
        return p
    if not _dekker_ok(a, b, p):
        return _down(p)
    err = _two_prod_err(a, b, p)
    return _down(p) if err < 0 else p


def mul_u(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if p != p:
        return inf
    if p == inf or p == -inf:
        if isfinite(a) and isfinite(b):
            return inf if p > 0 else -MAXF
        return p
    if not _dekker_ok(a, b, p):
        return _up(p)
    err = _two_prod_err(a, b, p)
    return _up(p) if err > 0 else p


def _div_dir(a, b, upward):
    # b != 0 is the caller's business
    if a == 0.0:
        return 0.0
    q = a / b
    if q != q:
        return inf if upward else -inf
    if q == inf or q == -inf:
        if isfinite(a) and isfinite(b):
            if upward:
                return inf if q > 0 else -MAXF
            return MAXF if q > 0 else -inf
        return q
    if b == inf or b == -inf:
        return q
    if not (1e-150 < abs(q) < 1e150 and 1e-150 < abs(b) < 1e150 and abs(a) > 1e-250):
        return _up(q) if upward else _down(q)
    p = q * b
    err = _two_prod_err(q, b, p)
    d = a - p
    if d == err:
        return q
    # a - q*b = d - err; the true quotient exceeds q iff that residual has b's sign
    greater = (d > err) if b > 0 else (d < err)
    if upward:
        return _up(q) if greater else q
    return q if greater else _down(q)


def div_d(a, b):
    return _div_dir(a, b, False)


def div_u(a, b):
    return _div_dir(a, b, True)


def sqrt_d(x):
    if x <= 0.0:
        return 0.0
    s = math.sqrt(x)
    if x == inf:
        return MAXF
    if not (1e-250 < x < 1e300):
        return _down(s)
    p = s * s
    err = _two_prod_err(s, s, p)
    d = p - x
    if d == -err:
        return s
    return _down(s) if d > -err else s


def sqrt_u(x):
    if x <= 0.0:
        return 0.0
    s = math.sqrt(x)
    if x == inf:
        return inf
    if not (1e-250 < x < 1e300):
        return _up(s)
    p = s * s
    err = _two_prod_err(s, s, p)
    d = p - x
    if d == -err:
        return s
    return s if d > -err else _up(s)


def pow_d(x, n):
    """Lower bound of x**n for x >= 0."""
    r = 1.0
    for _ in range(n):
        r = mul_d(r, x)
    return r


def pow_u(x, n):
    r = 1.0
    for _ in range(n):
        r = mul_u(r, x)
    return r


def root_d(v, n):
    """Lower bound of the real n-th root of v >= 0."""
    if v <= 0.0:
        return 0.0
    if n == 1:
        return v
    if n == 2:
        return sqrt_d(v)
    if v == inf:
        return MAXF
    r = v ** (1.0 / n)
    r = _down(r * (1.0 - 1e-12))
    if pow_u(r, n) <= v:
        return r
    return 0.0


def root_u(v, n):
    if v <= 0.0:
        return 0.0
    if n == 1:
        return v
    if n == 2:
        return sqrt_u(v)
    if v == inf:
        return inf
    r = v ** (1.0 / n)
    r = _up(r * (1.0 + 1e-12))
    if pow_d(r, n) >= v:
        return r
    return inf


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return inf


def exp_d(x):
    if x == 0.0:
        return 1.0
    if x == -inf:
        return 0.0
    e = _exp(x)
    if e == inf:
        return _down(_down(MAXF)) if x != inf else inf
    r = _down(_down(e))
    return r if r > 0.0 else 0.0


def exp_u(x):
    if x == 0.0:
        return 1.0
    if x == -inf:
        return 0.0
    e = _exp(x)
    if e == inf:
        return inf
    return _up(_up(e))


def log_d(x):
    if x <= 0.0:
        return -inf
    if x == inf:
        return MAXF
    if x == 1.0:
        return 0.0
    return _down(_down(math.log(x)))


def log_u(x):
    if x <= 0.0:
        return -inf
    if x == inf:
        return inf
    if x == 1.0:
        return 0.0
    return _up(_up(math.log(x)))


# ------------------------------------------------------- interval ops


def is_empty(lo, hi):
    return lo > hi


def i_meet(alo, ahi, blo, bhi):
    lo = _max2(alo, blo)
    hi = _min2(ahi, bhi)
    if lo > hi:
        return EMPTY
    return lo, hi


def i_hull(alo, ahi, blo, bhi):
    if alo > ahi:
        return blo, bhi
    if blo > bhi:
        return alo, ahi
    return _min2(alo, blo), _max2(ahi, bhi)


def i_neg(lo, hi):
    if lo > hi:
        return EMPTY
    return -hi, -lo


def i_add(alo, ahi, blo, bhi):
    if alo > ahi or blo > bhi:
        return EMPTY
    return add_d(alo, blo), add_u(ahi, bhi)


def i_sub(alo, ahi, blo, bhi):
    if alo > ahi or blo > bhi:
        return EMPTY
    return sub_d(alo, bhi), sub_u(ahi, blo)


def i_mul(alo, ahi, blo, bhi):
    if alo > ahi or blo > bhi:
        return EMPTY
    lo = _min2(_min2(mul_d(alo, blo), mul_d(alo, bhi)), _min2(mul_d(ahi, blo), mul_d(ahi, bhi)))
    hi = _max2(_max2(mul_u(alo, blo), mul_u(alo, bhi)), _max2(mul_u(ahi, blo), mul_u(ahi, bhi)))
    return lo, hi


def i_div(alo, ahi, blo, bhi):
    """Returns ``(lo, hi, full_line_flag)``."""
    if alo > ahi or blo > bhi:
        return inf, -inf, 0
    if blo > 0.0 or bhi < 0.0:
        lo = _min2(_min2(div_d(alo, blo), div_d(alo, bhi)), _min2(div_d(ahi, blo), div_d(ahi, bhi)))
        hi = _max2(_max2(div_u(alo, blo), div_u(alo, bhi)), _max2(div_u(ahi, blo), div_u(ahi, bhi)))
        return lo, hi, 0
    if blo == 0.0 and bhi == 0.0:
        return -inf, inf, FLAG_FULL_LINE
    if alo == 0.0 and ahi == 0.0:
        return 0.0, 0.0, 0
    if alo <= 0.0 <= ahi or (blo < 0.0 < bhi):
        return -inf, inf, 0
    if alo > 0.0:
        if blo == 0.0:
            return div_d(alo, bhi), inf, 0
        return -inf, div_u(alo, blo), 0
    if blo == 0.0:
        return -inf, div_u(ahi, bhi), 0
    return div_d(ahi, blo), inf, 0


def rel_div(xlo, xhi, clo, chi, blo, bhi):
    """Narrow ``x`` to ``{x : x*y in c for some y in b}``."""
    if xlo > xhi or clo > chi or blo > bhi:
        return EMPTY
    if blo > 0.0 or bhi < 0.0:
        qlo, qhi, _ = i_div(clo, chi, blo, bhi)
        return i_meet(xlo, xhi, qlo, qhi)
    if clo <= 0.0 <= chi:
        return xlo, xhi
    # 0 in b, 0 not in c: up to two half-lines
    p1 = EMPTY
    p2 = EMPTY
    if clo > 0.0:
        if bhi > 0.0:
            p1 = i_meet(xlo, xhi, div_d(clo, bhi), inf)
        if blo < 0.0:
            p2 = i_meet(xlo, xhi, -inf, div_u(clo, blo))
    else:
        if bhi > 0.0:
            p1 = i_meet(xlo, xhi, -inf, div_u(chi, bhi))
        if blo < 0.0:
            p2 = i_meet(xlo, xhi, div_d(chi, blo), inf)
    return i_hull(p1[0], p1[1], p2[0], p2[1])


def i_pow(lo, hi, n):
    if lo > hi:
        return EMPTY
    if n == 1:
        return lo, hi
    if n % 2 == 1:
        rlo = pow_d(lo, n) if lo >= 0.0 else -pow_u(-lo, n)
        rhi = pow_u(hi, n) if hi >= 0.0 else -pow_d(-hi, n)
        return rlo, rhi
    if lo >= 0.0:
        return pow_d(lo, n), pow_u(hi, n)
    if hi <= 0.0:
        return pow_d(-hi, n), pow_u(-lo, n)
    return 0.0, pow_u(_max2(-lo, hi), n)


def i_exp(lo, hi):
    if lo > hi:
        return EMPTY
    return exp_d(lo), exp_u(hi)


def _trig_val_d(v):
    r = _down(_down(v))
    return r if r > -1.0 else -1.0


def _trig_val_u(v):
    r = _up(_up(v))
    return r if r < 1.0 else 1.0


def _crit_in(lo, hi, offset):
    """Could (offset + 2k)*pi lie in [lo, hi] for an integer k?"""
    k0 = math.floor((lo / PI_LO - offset) / 2.0)
    for k in range(k0 - 1, k0 + 3):
        m = offset + 2.0 * k
        if m >= 0.0:
            clo = mul_d(m, PI_LO)
            chi = mul_u(m, PI_HI)
        else:
            clo = mul_d(m, PI_HI)
            chi = mul_u(m, PI_LO)
        if chi >= lo and clo <= hi:
            return True
    return False


def i_sin(lo, hi):
    if lo > hi:
        return EMPTY
    if not (isfinite(lo) and isfinite(hi)) or abs(lo) > 1e15 or abs(hi) > 1e15:
        return -1.0, 1.0
    if sub_u(hi, lo) >= TWO_PI_HI:
        return -1.0, 1.0
    if lo == 0.0 and hi == 0.0:
        return 0.0, 0.0
    sl = math.sin(lo)
    sh = math.sin(hi)
    rlo = _trig_val_d(_min2(sl, sh))
    rhi = _trig_val_u(_max2(sl, sh))
    if _crit_in(lo, hi, 0.5):
        rhi = 1.0
    if _crit_in(lo, hi, 1.5):
        rlo = -1.0
    return rlo, rhi


def i_cos(lo, hi):
    if lo > hi:
        return EMPTY
    if not (isfinite(lo) and isfinite(hi)) or abs(lo) > 1e15 or abs(hi) > 1e15:
        return -1.0, 1.0
    if sub_u(hi, lo) >= TWO_PI_HI:
        return -1.0, 1.0
    if lo == 0.0 and hi == 0.0:
        return 1.0, 1.0
    cl = math.cos(lo)
    ch = math.cos(hi)
    rlo = _trig_val_d(_min2(cl, ch))
    rhi = _trig_val_u(_max2(cl, ch))
    if _crit_in(lo, hi, 0.0):
        rhi = 1.0
    if _crit_in(lo, hi, 1.0):
        rlo = -1.0
    return rlo, rhi


def i_abs(lo, hi):
    if lo > hi:
        return EMPTY
    if lo >= 0.0:
        return lo, hi
    if hi <= 0.0:
        return -hi, -lo
    return 0.0, _max2(-lo, hi)


def i_min(alo, ahi, blo, bhi):
    if alo > ahi or blo > bhi:
        return EMPTY
    return _min2(alo, blo), _min2(ahi, bhi)


def i_max(alo, ahi, blo, bhi):
    if alo > ahi or blo > bhi:
        return EMPTY
    return _max2(alo, blo), _max2(ahi, bhi)


# ------------------------------------------------- inverse projections


def _pi_multiple(m):
    """Enclosure of m*pi for an integral float m."""
    if m >= 0.0:
        return mul_d(m, PI_LO), mul_u(m, PI_HI)
    return mul_d(m, PI_HI), mul_u(m, PI_LO)


def _periodic_preimage(xlo, xhi, p1lo, p1hi, p2lo, p2hi):
    """Hull of x intersected with the pieces p1 + 2k*pi and p2 + 2k*pi."""
    acc = EMPTY
    k_lo = math.floor(xlo / TWO_PI_HI) - 1
    k_hi = math.floor(xhi / PI_LO / 2.0) + 1
    for k in range(k_lo, k_hi + 1):
        slo, shi = _pi_multiple(2.0 * k)
        a = i_meet(xlo, xhi, add_d(p1lo, slo), add_u(p1hi, shi))
        acc = i_hull(acc[0], acc[1], a[0], a[1])
        b = i_meet(xlo, xhi, add_d(p2lo, slo), add_u(p2hi, shi))
        acc = i_hull(acc[0], acc[1], b[0], b[1])
    return acc


def _asin_d(v):
    return _down(_down(math.asin(v)))


def _asin_u(v):
    return _up(_up(math.asin(v)))


def _acos_d(v):
    r = _down(_down(math.acos(v)))
    return r if r > 0.0 else 0.0


def _acos_u(v):
    return _up(_up(math.acos(v)))


def sin_preimage(xlo, xhi, clo, chi):
    clo = _max2(clo, -1.0)
    chi = _min2(chi, 1.0)
    if clo > chi:
        return EMPTY
    if clo <= -1.0 and chi >= 1.0:
        return xlo, xhi
    if not (isfinite(xlo) and isfinite(xhi)) or xhi - xlo > 25.0 or abs(xlo) > 1e6 or abs(xhi) > 1e6:
        return xlo, xhi
    al = _asin_d(clo)
    ah = _asin_u(chi)
    # second branch: pi - asin(c)
    plo = sub_d(PI_LO, ah)
    phi = sub_u(PI_HI, al)
    return _periodic_preimage(xlo, xhi, al, ah, plo, phi)


def cos_preimage(xlo, xhi, clo, chi):
    clo = _max2(clo, -1.0)
    chi = _min2(chi, 1.0)
    if clo > chi:
        return EMPTY
    if clo <= -1.0 and chi >= 1.0:
        return xlo, xhi
    if not (isfinite(xlo) and isfinite(xhi)) or xhi - xlo > 25.0 or abs(xlo) > 1e6 or abs(xhi) > 1e6:
        return xlo, xhi
    al = _acos_d(chi)
    ah = _acos_u(clo)
    return _periodic_preimage(xlo, xhi, al, ah, -ah, -al)


def pow_preimage(xlo, xhi, clo, chi, n):
    if n == 1:
        return i_meet(xlo, xhi, clo, chi)
    if n % 2 == 1:
        rlo = root_d(clo, n) if clo >= 0.0 else -root_u(-clo, n)
        rhi = root_u(chi, n) if chi >= 0.0 else -root_d(-chi, n)
        return i_meet(xlo, xhi, rlo, rhi)
    if chi < 0.0:
        return EMPTY
    clo = _max2(clo, 0.0)
    rlo = root_d(clo, n)
    rhi = root_u(chi, n)
    a = i_meet(xlo, xhi, rlo, rhi)
    b = i_meet(xlo, xhi, -rhi, -rlo)
    return i_hull(a[0], a[1], b[0], b[1])


def abs_preimage(xlo, xhi, clo, chi):
    if chi < 0.0:
        return EMPTY
    clo = _max2(clo, 0.0)
    a = i_meet(xlo, xhi, clo, chi)
    b = i_meet(xlo, xhi, -chi, -clo)
    return i_hull(a[0], a[1], b[0], b[1])


# --------------------------------------------------------------- tapes


def forward(ops, a1, a2, ia, clo, chi, start, end, box_lo, box_hi, vlo, vhi, flow_hook=None):
    """Evaluate nodes ``start..end-1`` into ``vlo``/``vhi``; returns status flags."""
    flags = 0
    for k in range(start, end):
        op = ops[k]
        if op == VAR:
            j = ia[k]
            lo, hi = box_lo[j], box_hi[j]
        elif op == CONST:
            lo, hi = clo[k], chi[k]
        elif op == ADD:
            lo, hi = i_add(vlo[a1[k]], vhi[a1[k]], vlo[a2[k]], vhi[a2[k]])
        elif op == SUB:
            lo, hi = i_sub(vlo[a1[k]], vhi[a1[k]], vlo[a2[k]], vhi[a2[k]])
        elif op == MUL:
            lo, hi = i_mul(vlo[a1[k]], vhi[a1[k]], vlo[a2[k]], vhi[a2[k]])
        elif op == DIV:
            lo, hi, f = i_div(vlo[a1[k]], vhi[a1[k]], vlo[a2[k]], vhi[a2[k]])
            flags |= f
        elif op == NEG:
            lo, hi = i_neg(vlo[a1[k]], vhi[a1[k]])
        elif op == POW:
            lo, hi = i_pow(vlo[a1[k]], vhi[a1[k]], ia[k])
        elif op == EXP:
            lo, hi = i_exp(vlo[a1[k]], vhi[a1[k]])
        elif op == SIN:
            lo, hi = i_sin(vlo[a1[k]], vhi[a1[k]])
        elif op == COS:
            lo, hi = i_cos(vlo[a1[k]], vhi[a1[k]])
        elif op == ABS:
            lo, hi = i_abs(vlo[a1[k]], vhi[a1[k]])
        elif op == MIN:
            lo, hi = i_min(vlo[a1[k]], vhi[a1[k]], vlo[a2[k]], vhi[a2[k]])
        elif op == MAX:
            lo, hi = i_max(vlo[a1[k]], vhi[a1[k]], vlo[a2[k]], vhi[a2[k]])
        elif op == FLOW:
            lo, hi = flow_hook(k, vlo, vhi)
        else:
            raise ValueError(f"bad opcode {op}")
        vlo[k] = lo
        vhi[k] = hi
    return flags


def _narrow(vlo, vhi, j, lo, hi):
    """Intersect node j with [lo, hi]; False when that empties it."""
    nlo = _max2(vlo[j], lo)
    nhi = _min2(vhi[j], hi)
    vlo[j] = nlo
    vhi[j] = nhi
    return nlo <= nhi


def backward(ops, a1, a2, ia, clo, chi, start, end, vlo, vhi):
    """Project node values down to the leaves.  Returns False on emptiness."""
    for k in range(end - 1, start - 1, -1):
        op = ops[k]
        lo = vlo[k]
        hi = vhi[k]
        if lo > hi:
            return False
        if op == VAR or op == FLOW:
            continue
        if op == CONST:
            continue
        x = a1[k]
        if op == ADD:
            y = a2[k]
            if not _narrow(vlo, vhi, x, sub_d(lo, vhi[y]), sub_u(hi, vlo[y])):
                return False
            if not _narrow(vlo, vhi, y, sub_d(lo, vhi[x]), sub_u(hi, vlo[x])):
                return False
        elif op == SUB:
            y = a2[k]
            if not _narrow(vlo, vhi, x, add_d(lo, vlo[y]), add_u(hi, vhi[y])):
                return False
            if not _narrow(vlo, vhi, y, sub_d(vlo[x], hi), sub_u(vhi[x], lo)):
                return False
        elif op == MUL:
            y = a2[k]
            r = rel_div(vlo[x], vhi[x], lo, hi, vlo[y], vhi[y])
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
            r = rel_div(vlo[y], vhi[y], lo, hi, vlo[x], vhi[x])
            if not _narrow(vlo, vhi, y, r[0], r[1]):
                return False
        elif op == DIV:
            y = a2[k]
            # x = c*y, and y satisfies y*c in x
            r = i_mul(lo, hi, vlo[y], vhi[y])
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
            r = rel_div(vlo[y], vhi[y], vlo[x], vhi[x], lo, hi)
            if not _narrow(vlo, vhi, y, r[0], r[1]):
                return False
        elif op == NEG:
            if not _narrow(vlo, vhi, x, -hi, -lo):
                return False
        elif op == POW:
            r = pow_preimage(vlo[x], vhi[x], lo, hi, ia[k])
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
        elif op == EXP:
            if hi <= 0.0:
                return False
            if not _narrow(vlo, vhi, x, log_d(lo), log_u(hi)):
                return False
        elif op == SIN:
            r = sin_preimage(vlo[x], vhi[x], lo, hi)
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
        elif op == COS:
            r = cos_preimage(vlo[x], vhi[x], lo, hi)
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
        elif op == ABS:
            r = abs_preimage(vlo[x], vhi[x], lo, hi)
            if not _narrow(vlo, vhi, x, r[0], r[1]):
                return False
        elif op == MIN:
            y = a2[k]
            if not _narrow(vlo, vhi, x, lo, inf):
                return False
            if not _narrow(vlo, vhi, y, lo, inf):
                return False
            if vlo[y] > hi and not _narrow(vlo, vhi, x, lo, hi):
                return False
            if vlo[x] > hi and not _narrow(vlo, vhi, y, lo, hi):
                return False
        elif op == MAX:
            y = a2[k]
            if not _narrow(vlo, vhi, x, -inf, hi):
                return False
            if not _narrow(vlo, vhi, y, -inf, hi):
                return False
            if vhi[y] < lo and not _narrow(vlo, vhi, x, lo, hi):
                return False
            if vhi[x] < lo and not _narrow(vlo, vhi, y, lo, hi):
                return False
        else:
            raise ValueError(f"bad opcode {op}")
    return True


def revise(ops, a1, a2, ia, clo, chi, start, end, box_lo, box_hi, tlo, thi, vlo, vhi, flow_hook=None):
    """HC4-revise one constraint in place on ``box_lo``/``box_hi``.

    Returns 0 if the box became empty, 1 if unchanged, 2 if narrowed.
    """
    forward(ops, a1, a2, ia, clo, chi, start, end, box_lo, box_hi, vlo, vhi, flow_hook)
    root = end - 1
    if not _narrow(vlo, vhi, root, tlo, thi):
        return 0
    if not backward(ops, a1, a2, ia, clo, chi, start, end, vlo, vhi):
        return 0
    status = 1
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


def _significant(old_lo, old_hi, new_lo, new_hi, rel_tol, abs_tol):
    shrink = (new_lo - old_lo) + (old_hi - new_hi)
    if shrink != shrink:  # inf - inf
        return True
    width = old_hi - old_lo
    if width == inf:
        return new_hi - new_lo < inf
    return shrink > rel_tol * width and shrink > abs_tol


def fixpoint(ops, a1, a2, ia, clo, chi, starts, ends, tlos, this, box_lo, box_hi,
             rel_tol, abs_tol, max_sweeps, vlo, vhi, flow_hook=None):
    """Apply every constraint's revise until no sweep makes significant progress.

    Returns 0 when the box is proven empty, 1 otherwise; ``box_*`` are updated.
    """
    m = len(starts)
    n = len(box_lo)
    for _ in range(max_sweeps):
        before_lo = list(box_lo)
        before_hi = list(box_hi)
        for c in range(m):
            st = revise(ops, a1, a2, ia, clo, chi, starts[c], ends[c], box_lo, box_hi,
                        tlos[c], this[c], vlo, vhi, flow_hook)
            if st == 0:
                return 0
        progress = False
        for j in range(n):
            if _significant(before_lo[j], before_hi[j], box_lo[j], box_hi[j], rel_tol, abs_tol):
                progress = True
                break
        if not progress:
            return 1
    return 1

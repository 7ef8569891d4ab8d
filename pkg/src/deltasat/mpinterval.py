"""Arbitrary-precision interval evaluation of terms on MPFR.

Used for point evaluation (``eval_point``) and independent certificate
re-checking.  Shares no code with the double-precision kernels, so it is a
second route for everything the solver computes with ``deltasat.tape``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr

from .expr import (
    Abs, Add, Const, Cos, Div, Exp, Flow, Max, Min, Mul, Neg, Pow, Sin, Sub, Term, Var,
)

INF = mpfr("inf")


class ZeroDivisor(Exception):
    def __init__(self, exact: bool):
        super().__init__("denominator encloses zero")
        self.exact = exact


@lru_cache(maxsize=64)
def _contexts(prec: int):
    down = gmpy2.context(precision=prec, round=gmpy2.RoundDown)
    up = gmpy2.context(precision=prec, round=gmpy2.RoundUp)
    return down, up


def _exact(n: int) -> mpfr:
    return mpfr(n, max(abs(n).bit_length(), 2))


def fraction_bounds(q: Fraction, prec: int) -> tuple[mpfr, mpfr]:
    down, up = _contexts(prec)
    p, d = _exact(q.numerator), _exact(q.denominator)
    return down.div(p, d), up.div(p, d)


def to_fraction(x: mpfr) -> Fraction | None:
    if not gmpy2.is_finite(x):
        return None
    return Fraction(*x.as_integer_ratio())


_DOWN53 = gmpy2.context(precision=53, round=gmpy2.RoundDown)
_UP53 = gmpy2.context(precision=53, round=gmpy2.RoundUp)


def to_float_bounds(lo: mpfr, hi: mpfr) -> tuple[float, float]:
    """Outward conversion to doubles."""
    flo = float(_DOWN53.plus(lo))
    fhi = float(_UP53.plus(hi))
    if flo == math.inf and gmpy2.is_finite(lo):
        flo = 1.7976931348623157e308
    if fhi == -math.inf and gmpy2.is_finite(hi):
        fhi = -1.7976931348623157e308
    return flo, fhi


def _mul_dir(ctx, a, b):
    if a == 0 or b == 0:
        return mpfr(0)
    return ctx.mul(a, b)


def _trig_critical(a, b, offset: float, down, up) -> bool:
    """Could ``(offset + 2k)*pi`` lie in ``[a, b]`` for an integer ``k``?"""
    if abs(a) > 2**50 or abs(b) > 2**50:
        return True
    pi_lo, pi_hi = down.const_pi(), up.const_pi()
    k0 = math.floor((float(a) / math.pi - offset) / 2)
    for k in range(k0 - 1, k0 + 3):
        m = mpfr(offset + 2 * k)
        if m >= 0:
            c_lo, c_hi = down.mul(m, pi_lo), up.mul(m, pi_hi)
        else:
            c_lo, c_hi = down.mul(m, pi_hi), up.mul(m, pi_lo)
        if c_hi >= a and c_lo <= b:
            return True
    return False


def _trig(a, b, fn_name: str, max_off: float, min_off: float, down, up):
    if not (gmpy2.is_finite(a) and gmpy2.is_finite(b)) or up.sub(b, a) >= 7:
        return mpfr(-1), mpfr(1)
    fd, fu = getattr(down, fn_name), getattr(up, fn_name)
    lo = min(fd(a), fd(b))
    hi = max(fu(a), fu(b))
    if _trig_critical(a, b, max_off, down, up):
        hi = mpfr(1)
    if _trig_critical(a, b, min_off, down, up):
        lo = mpfr(-1)
    return max(lo, mpfr(-1)), min(hi, mpfr(1))


def _pow(lo, hi, n: int, down, up):
    if n % 2 == 1:
        return down.pow(lo, n), up.pow(hi, n)
    if lo >= 0:
        return down.pow(lo, n), up.pow(hi, n)
    if hi <= 0:
        return down.pow(-hi, n), up.pow(-lo, n)
    return mpfr(0), up.pow(max(-lo, hi), n)


def enclose(t: Term, box, prec: int):
    """Enclosure ``(lo, hi)`` of ``t`` over ``box`` given as MPFR pairs."""
    down, up = _contexts(prec)
    memo: dict[int, tuple] = {}

    def go(s):
        key = id(s)
        hit = memo.get(key)
        if hit is not None:
            return hit
        r = _eval(s)
        memo[key] = r
        return r

    def _eval(s):
        if isinstance(s, Var):
            return box[s.index]
        if isinstance(s, Const):
            return fraction_bounds(s.value, prec)
        if isinstance(s, Add):
            a, b = go(s.left), go(s.right)
            return down.add(a[0], b[0]), up.add(a[1], b[1])
        if isinstance(s, Sub):
            a, b = go(s.left), go(s.right)
            return down.sub(a[0], b[1]), up.sub(a[1], b[0])
        if isinstance(s, Mul):
            (al, ah), (bl, bh) = go(s.left), go(s.right)
            pairs = ((al, bl), (al, bh), (ah, bl), (ah, bh))
            return min(_mul_dir(down, x, y) for x, y in pairs), max(_mul_dir(up, x, y) for x, y in pairs)
        if isinstance(s, Div):
            (al, ah), (bl, bh) = go(s.left), go(s.right)
            if bl <= 0 <= bh:
                raise ZeroDivisor(exact=(bl == 0 and bh == 0))
            pairs = ((al, bl), (al, bh), (ah, bl), (ah, bh))
            return min(down.div(x, y) for x, y in pairs), max(up.div(x, y) for x, y in pairs)
        if isinstance(s, Neg):
            lo, hi = go(s.arg)
            return -hi, -lo
        if isinstance(s, Pow):
            lo, hi = go(s.base)
            return _pow(lo, hi, s.exponent, down, up)
        if isinstance(s, Exp):
            lo, hi = go(s.arg)
            return down.exp(lo), up.exp(hi)
        if isinstance(s, Sin):
            lo, hi = go(s.arg)
            return _trig(lo, hi, "sin", 0.5, 1.5, down, up)
        if isinstance(s, Cos):
            lo, hi = go(s.arg)
            return _trig(lo, hi, "cos", 0.0, 1.0, down, up)
        if isinstance(s, Abs):
            lo, hi = go(s.arg)
            if lo >= 0:
                return lo, hi
            if hi <= 0:
                return -hi, -lo
            return mpfr(0), max(-lo, hi)
        if isinstance(s, Min):
            a, b = go(s.left), go(s.right)
            return min(a[0], b[0]), min(a[1], b[1])
        if isinstance(s, Max):
            a, b = go(s.left), go(s.right)
            return max(a[0], b[0]), max(a[1], b[1])
        if isinstance(s, Flow):
            return _flow(s, go, prec)
        raise TypeError(f"unknown term {s!r}")

    return go(t)


def _flow(s: Flow, go, prec: int):
    # ODE values come from the double-precision validated integrator; the step
    # count grows with the requested precision
    from .interval import FloatInterval
    from .odes import ode_extension

    t_lo, t_hi = to_float_bounds(*go(s.time))
    y0 = [FloatInterval(*to_float_bounds(*go(a))) for a in s.init]
    steps = min(1 << 14, max(s.ivp.steps, prec * 8))
    r = ode_extension(s.ivp, s.component, FloatInterval(t_lo, t_hi), y0, steps=steps)
    if r.is_empty:
        raise ZeroDivisor(exact=True)
    return mpfr(r.lo), mpfr(r.hi)


def enclose_rational(t: Term, box, prec: int, max_width: Fraction | None = None):
    """Like :func:`enclose` for a box of Fraction pairs, returning Fractions.

    Infinite endpoints come back as ``None``.  With ``max_width`` set, an
    enclosure at least that wide comes back as ``(None, None)`` without
    conversion; the endpoints of a huge value would be huge integers.
    """
    mbox = []
    for lo, hi in box:
        mbox.append((fraction_bounds(lo, prec)[0], fraction_bounds(hi, prec)[1]))
    lo, hi = enclose(t, mbox, prec)
    if max_width is not None:
        w = _contexts(prec)[1].sub(hi, lo)
        if not gmpy2.is_finite(w) or w >= fraction_bounds(max_width, prec)[1]:
            return None, None
    return to_fraction(lo), to_fraction(hi)

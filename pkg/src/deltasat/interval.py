"""Outward-rounded floating-point intervals and boxes.

The arithmetic itself lives in the kernel modules; this module gives it a
value-type API (:class:`FloatInterval`, :class:`FloatBox`) and the natural
interval extension of a :class:`~deltasat.expr.Term`.

>>> FloatInterval(1, 2) + FloatInterval(3, 4)
FloatInterval(4.0, 6.0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import _pykernels as K
from .errors import DegenerateBisect, FullLine, UnboundedDerivative
from .expr import (
    Abs, Add, Const, Cos, Div, Exp, Flow, Max, Min, Mul, Neg, Pow, RationalInterval, Sin, Sub, Term,
    Var, as_fraction,
)

INF = math.inf
MAXF = K.MAXF


def fraction_bounds(q: Fraction) -> tuple[float, float]:
    """Tightest float pair enclosing the rational ``q`` (width at most one ulp)."""
    try:
        f = float(q)  # correctly rounded
    except OverflowError:
        return (MAXF, INF) if q > 0 else (-INF, -MAXF)
    if math.isinf(f):
        return (MAXF, INF) if f > 0 else (-INF, -MAXF)
    exact = Fraction(f)
    if exact == q:
        return f, f
    if exact < q:
        return f, math.nextafter(f, INF)
    return math.nextafter(f, -INF), f


@dataclass(frozen=True, slots=True)
class FloatInterval:
    """Closed interval ``[lo, hi]`` with float endpoints (possibly infinite).

    The empty interval is :data:`FloatInterval.EMPTY`, stored as ``(inf, -inf)``.
    """

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if lo != lo or hi != hi:
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi and not (lo == INF and hi == -INF):
            raise ValueError(f"lo {lo} > hi {hi}; use FloatInterval.EMPTY")
        if lo == hi and math.isinf(lo):
            raise ValueError("interval cannot be a single infinite point")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    EMPTY = None  # type: FloatInterval  # set below

    @classmethod
    def point(cls, q) -> "FloatInterval":
        """Hull of a single number (exact for floats, one ulp wide for other rationals)."""
        if isinstance(q, float):
            return cls(q, q)
        return cls(*fraction_bounds(as_fraction(q)))

    @classmethod
    def from_pair(cls, pair) -> "FloatInterval":
        lo, hi = pair
        if lo > hi:
            return cls.EMPTY
        return cls(lo, hi)

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def width(self) -> float:
        if self.is_empty:
            return 0.0
        return K.sub_u(self.hi, self.lo)

    def midpoint(self) -> float:
        return midpoint(self)

    def __contains__(self, x) -> bool:
        if self.is_empty:
            return False
        if isinstance(x, FloatInterval):
            return x.is_empty or (self.lo <= x.lo and x.hi <= self.hi)
        if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
            q = Fraction(x)
            lo_ok = self.lo == -INF or Fraction(self.lo) <= q
            hi_ok = self.hi == INF or q <= Fraction(self.hi)
            return lo_ok and hi_ok
        return self.lo <= x <= self.hi

    def subset(self, other: "FloatInterval") -> bool:
        return self in other

    def meet(self, other: "FloatInterval") -> "FloatInterval":
        return FloatInterval.from_pair(K.i_meet(self.lo, self.hi, other.lo, other.hi))

    def join(self, other: "FloatInterval") -> "FloatInterval":
        return FloatInterval.from_pair(K.i_hull(self.lo, self.hi, other.lo, other.hi))

    def pair(self) -> tuple[float, float]:
        return self.lo, self.hi

    def __add__(self, other):
        return add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __repr__(self):
        if self.is_empty:
            return "FloatInterval.EMPTY"
        return f"FloatInterval({self.lo!r}, {self.hi!r})"

    def __str__(self):
        if self.is_empty:
            return "empty"
        return f"[{self.lo!r}, {self.hi!r}]"


FloatInterval.EMPTY = FloatInterval(INF, -INF)
ENTIRE = FloatInterval(-INF, INF)


def _coerce(x) -> FloatInterval:
    if isinstance(x, FloatInterval):
        return x
    return FloatInterval.point(x)


def add(a: FloatInterval, b: FloatInterval) -> FloatInterval:
    return FloatInterval.from_pair(K.i_add(a.lo, a.hi, b.lo, b.hi))


def sub(a: FloatInterval, b: FloatInterval) -> FloatInterval:
    return FloatInterval.from_pair(K.i_sub(a.lo, a.hi, b.lo, b.hi))


def mul(a: FloatInterval, b: FloatInterval) -> FloatInterval:
    return FloatInterval.from_pair(K.i_mul(a.lo, a.hi, b.lo, b.hi))


def neg(a: FloatInterval) -> FloatInterval:
    return FloatInterval.from_pair(K.i_neg(a.lo, a.hi))


def div(a: FloatInterval, b: FloatInterval) -> FloatInterval:
    """Extended division: the hull of all quotients, unbounded when ``0 in b``.

    Raises :class:`FullLine` for ``b = [0, 0]``.
    """
    lo, hi, flag = K.i_div(a.lo, a.hi, b.lo, b.hi)
    if flag:
        raise FullLine("division by [0, 0]")
    return FloatInterval.from_pair((lo, hi))


def min_i(a: FloatInterval, b: FloatInterval) -> FloatInterval:
    return FloatInterval.from_pair(K.i_min(a.lo, a.hi, b.lo, b.hi))


def max_i(a: FloatInterval, b: FloatInterval) -> FloatInterval:
    return FloatInterval.from_pair(K.i_max(a.lo, a.hi, b.lo, b.hi))


def abs_i(a: FloatInterval) -> FloatInterval:
    return FloatInterval.from_pair(K.i_abs(a.lo, a.hi))


def exp_i(a: FloatInterval) -> FloatInterval:
    return FloatInterval.from_pair(K.i_exp(a.lo, a.hi))


def sin_i(a: FloatInterval) -> FloatInterval:
    return FloatInterval.from_pair(K.i_sin(a.lo, a.hi))


def cos_i(a: FloatInterval) -> FloatInterval:
    return FloatInterval.from_pair(K.i_cos(a.lo, a.hi))


def pow_i(a: FloatInterval, n: int) -> FloatInterval:
    return FloatInterval.from_pair(K.i_pow(a.lo, a.hi, n))


def hull(items: Iterable) -> FloatInterval:
    """Smallest float interval containing every number or interval in ``items``."""
    lo, hi = INF, -INF
    for it in items:
        iv = it if isinstance(it, FloatInterval) else FloatInterval.point(it)
        if iv.is_empty:
            continue
        lo = min(lo, iv.lo)
        hi = max(hi, iv.hi)
    return FloatInterval.from_pair((lo, hi))


def midpoint(iv: FloatInterval) -> float:
    """A float inside ``iv`` splitting it into halves of width at least ``(1/2 - ulp)|iv|``."""
    if iv.is_empty:
        raise ValueError("midpoint of the empty interval")
    lo, hi = iv.lo, iv.hi
    if lo == -INF and hi == INF:
        return 0.0
    if lo == -INF:
        return max(hi - max(1.0, abs(hi)), -MAXF)
    if hi == INF:
        return min(lo + max(1.0, abs(lo)), MAXF)
    m = 0.5 * lo + 0.5 * hi if abs(lo) > 1e300 or abs(hi) > 1e300 else (lo + hi) / 2.0
    return min(max(m, lo), hi)


class FloatBox(tuple):
    """A tuple of :class:`FloatInterval`, one per variable."""

    def __new__(cls, intervals: Iterable):
        ivs = []
        for iv in intervals:
            if not isinstance(iv, FloatInterval):
                iv = FloatInterval(*iv)
            ivs.append(iv)
        return super().__new__(cls, ivs)

    @classmethod
    def from_lists(cls, los: Sequence[float], his: Sequence[float]) -> "FloatBox":
        return cls(FloatInterval(float(a), float(b)) for a, b in zip(los, his))

    @classmethod
    def from_bounds(cls, bounds: Sequence[RationalInterval]) -> "FloatBox":
        """Enclosure of the closure of a product of rational intervals."""
        out = []
        for b in bounds:
            lo = -INF if b.lo is None else fraction_bounds(b.lo)[0]
            hi = INF if b.hi is None else fraction_bounds(b.hi)[1]
            out.append(FloatInterval(lo, hi))
        return cls(out)

    @property
    def is_empty(self) -> bool:
        return any(iv.is_empty for iv in self)

    def los(self) -> list[float]:
        return [iv.lo for iv in self]

    def his(self) -> list[float]:
        return [iv.hi for iv in self]

    def width(self) -> float:
        return width(self)

    def midpoint(self) -> list[float]:
        return [midpoint(iv) for iv in self]

    def contains_point(self, point: Sequence) -> bool:
        return len(point) == len(self) and all(p in iv for p, iv in zip(point, self))

    def subset(self, other: "FloatBox") -> bool:
        return len(self) == len(other) and all(a in b for a, b in zip(self, other))

    def replace(self, i: int, iv: FloatInterval) -> "FloatBox":
        items = list(self)
        items[i] = iv
        return FloatBox(items)

    def __repr__(self):
        return "FloatBox([" + ", ".join(repr(iv) for iv in self) + "])"

    def __str__(self):
        return " x ".join(str(iv) for iv in self)


def width(box: Sequence[FloatInterval]) -> float:
    """Infinity-norm width ``max_i |I_i|`` (0 for a zero-dimensional box)."""
    return max((iv.width for iv in box), default=0.0)


def bisect(box: FloatBox, i: int) -> tuple[FloatBox, FloatBox]:
    """Split dimension ``i`` at its midpoint; both halves share the midpoint."""
    iv = box[i]
    if iv.is_empty or iv.lo == iv.hi:
        raise DegenerateBisect(f"interval {iv} in dimension {i} has zero width")
    m = midpoint(iv)
    return box.replace(i, FloatInterval(iv.lo, m)), box.replace(i, FloatInterval(m, iv.hi))


def natural_extension(t: Term, box: Sequence[FloatInterval]) -> FloatInterval:
    """The natural interval extension of ``t`` evaluated over ``box``.

    Raises :class:`FullLine` if some subterm divides by ``[0, 0]``.
    """
    from .tape import Tape

    box = box if isinstance(box, FloatBox) else FloatBox(box)
    tape = Tape([t], n_vars=len(box))
    (value,), flags = tape.evaluate(box.los(), box.his())
    if flags & K.FLAG_FULL_LINE:
        raise FullLine(f"division by [0, 0] in {t}")
    return FloatInterval.from_pair(value)


# ------------------------------------------------------------ gradients


def gradient_enclosure(t: Term, box: Sequence[FloatInterval]) -> tuple[FloatInterval, list[FloatInterval]]:
    """Interval forward-mode differentiation: enclosures of ``t`` and of its gradient over ``box``.

    For the non-smooth ``abs``/``min``/``max`` the result encloses the
    generalized gradient, which is what Lipschitz bounds need.
    Raises :class:`UnboundedDerivative` for ODE flow terms.
    """
    n = len(box)
    zero = FloatInterval(0.0, 0.0)
    memo: dict[int, tuple[FloatInterval, list[FloatInterval]]] = {}

    def go(s: Term):
        key = id(s)
        if key in memo:
            return memo[key]
        r = _d(s)
        memo[key] = r
        return r

    one = FloatInterval(1.0, 1.0)
    mone = FloatInterval(-1.0, -1.0)

    def _d(s: Term):
        if isinstance(s, Var):
            g = [zero] * n
            g[s.index] = one
            return box[s.index], g
        if isinstance(s, Const):
            return FloatInterval.point(s.value), [zero] * n
        if isinstance(s, Neg):
            v, g = go(s.arg)
            return neg(v), [neg(x) for x in g]
        if isinstance(s, (Add, Sub)):
            u, gu = go(s.left)
            v, gv = go(s.right)
            if isinstance(s, Add):
                return add(u, v), [add(a, b) for a, b in zip(gu, gv)]
            return sub(u, v), [sub(a, b) for a, b in zip(gu, gv)]
        if isinstance(s, Mul):
            u, gu = go(s.left)
            v, gv = go(s.right)
            return mul(u, v), [add(mul(v, a), mul(u, b)) for a, b in zip(gu, gv)]
        if isinstance(s, Div):
            u, gu = go(s.left)
            v, gv = go(s.right)
            q = div(u, v)
            inv = div(one, v)
            return q, [mul(sub(a, mul(q, b)), inv) for a, b in zip(gu, gv)]
        if isinstance(s, Pow):
            u, gu = go(s.base)
            k = s.exponent
            c = mul(FloatInterval.point(k), pow_i(u, k - 1)) if k > 1 else one
            return pow_i(u, k), [mul(c, a) for a in gu]
        if isinstance(s, Exp):
            u, gu = go(s.arg)
            e = exp_i(u)
            return e, [mul(e, a) for a in gu]
        if isinstance(s, Sin):
            u, gu = go(s.arg)
            c = cos_i(u)
            return sin_i(u), [mul(c, a) for a in gu]
        if isinstance(s, Cos):
            u, gu = go(s.arg)
            c = neg(sin_i(u))
            return cos_i(u), [mul(c, a) for a in gu]
        if isinstance(s, Abs):
            u, gu = go(s.arg)
            if u.lo >= 0:
                sign = one
            elif u.hi <= 0:
                sign = mone
            else:
                sign = FloatInterval(-1.0, 1.0)
            return abs_i(u), [mul(sign, a) for a in gu]
        if isinstance(s, (Min, Max)):
            u, gu = go(s.left)
            v, gv = go(s.right)
            is_min = isinstance(s, Min)
            val = min_i(u, v) if is_min else max_i(u, v)
            if u.hi < v.lo:
                g = gu if is_min else gv
            elif v.hi < u.lo:
                g = gv if is_min else gu
            else:
                g = [a.join(b) for a, b in zip(gu, gv)]
            return val, g
        if isinstance(s, Flow):
            raise UnboundedDerivative("no derivative bound for ODE flow terms")
        raise TypeError(f"unknown term {s!r}")

    return go(t)


def lipschitz_bound(t: Term, box: Sequence[FloatInterval]) -> float:
    """Upper bound on ``max_i |d t / d x_i|`` over ``box`` (infinity norm of the gradient)."""
    _, grad = gradient_enclosure(t, box)
    bound = 0.0
    for g in grad:
        if g.is_empty:
            continue
        m = max(abs(g.lo), abs(g.hi))
        if m == INF:
            raise UnboundedDerivative(f"derivative of {t} is unbounded on the box")
        bound = max(bound, m)
    return bound

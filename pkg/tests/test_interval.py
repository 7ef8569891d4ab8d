import math
import random
from fractions import Fraction

import gmpy2
import pytest
from hypothesis import given, strategies as st

from deltasat import _pykernels as K
from deltasat.errors import DegenerateBisect, FullLine, NondefinedAtPoint, PrecisionUnreachable
from deltasat.expr import Exp, RationalInterval, Sin, Var, eval_point
from deltasat.interval import (
    FloatBox, FloatInterval, abs_i, bisect, cos_i, div, exp_i, fraction_bounds, lipschitz_bound,
    min_i, natural_extension, pow_i, sin_i, width,
)

from termgen import boxes_with_points, terms

x = Var(0)
finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(st.fractions())
def test_fraction_bounds_enclose_within_one_ulp(q):
    lo, hi = fraction_bounds(q)
    assert Fraction(lo) <= q <= Fraction(hi)
    assert hi == lo or math.nextafter(lo, math.inf) == hi


def test_fraction_bounds_overflow():
    assert fraction_bounds(Fraction(10) ** 400) == (K.MAXF, math.inf)


def brackets(lo: float, q: Fraction, hi: float) -> bool:
    return (lo == -math.inf or Fraction(lo) <= q) and (hi == math.inf or q <= Fraction(hi))


@given(finite, finite)
def test_directed_add_brackets_exact_sum(a, b):
    assert brackets(K.add_d(a, b), Fraction(a) + Fraction(b), K.add_u(a, b))


@given(finite, st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=True))
def test_directed_mul_div_bracket_exact(a, b):
    assert brackets(K.mul_d(a, b), Fraction(a) * Fraction(b), K.mul_u(a, b))
    if b != 0:
        assert brackets(K.div_d(a, b), Fraction(a) / Fraction(b), K.div_u(a, b))


def _exact(v) -> Fraction:
    return Fraction(*v.as_integer_ratio())


def _mp(v):
    gmpy2.get_context().precision = 300
    return gmpy2.mpfr(v)


@given(st.floats(-700, 700))
def test_exp_kernel_brackets_mpfr(v):
    ref = _exact(gmpy2.exp(_mp(v)))
    lo, hi = K.i_exp(v, v)
    assert brackets(lo, ref, hi)
    # libm result padded outward: a few ulp at most
    if math.isfinite(hi) and lo > 0:
        assert hi - lo <= 4 * math.ulp(hi)


@given(st.floats(-1e4, 1e4), st.floats(0, 10))
def test_trig_kernels_bracket_mpfr_on_samples(a, w):
    lo_s, hi_s = K.i_sin(a, a + w)
    lo_c, hi_c = K.i_cos(a, a + w)
    for k in range(9):
        p = a + w * k / 8
        if not a <= p <= a + w:
            continue
        assert brackets(lo_s, _exact(gmpy2.sin(_mp(p))), hi_s)
        assert brackets(lo_c, _exact(gmpy2.cos(_mp(p))), hi_c)


def test_elementary_hulls():
    # sin on [0, 4] peaks at pi/2 and bottoms out at the right end
    s = sin_i(FloatInterval(0, 4))
    assert s.hi == 1.0 and s.lo <= -0.7568024953079282 and s.lo >= -0.7568024953079290
    assert cos_i(FloatInterval(1, 7)).pair() == (-1.0, 1.0)
    assert pow_i(FloatInterval(-2, 1), 2).pair() == (0.0, 4.0)
    assert pow_i(FloatInterval(-2, 1), 3).pair() == (-8.0, 1.0)
    assert abs_i(FloatInterval(-3, 1)).pair() == (0.0, 3.0)
    assert min_i(FloatInterval(0, 5), FloatInterval(1, 2)).pair() == (0.0, 2.0)
    e = exp_i(FloatInterval(1, 1))
    assert e.lo < math.e < e.hi


def test_division_cases():
    assert div(FloatInterval(1, 2), FloatInterval(2, 4)).pair() == (0.25, 1.0)
    assert div(FloatInterval(1, 2), FloatInterval(-1, 1)).pair() == (-math.inf, math.inf)
    assert div(FloatInterval(1, 2), FloatInterval(0, 1)).pair() == (1.0, math.inf)
    with pytest.raises(FullLine):
        div(FloatInterval(1, 2), FloatInterval(0, 0))


def test_interval_value_type():
    iv = FloatInterval(1, 2)
    assert (iv + FloatInterval(3, 4)).pair() == (4.0, 6.0)
    assert (iv * 3).pair() == (3.0, 6.0)
    assert Fraction(3, 2) in iv and 2.5 not in iv
    assert FloatInterval.EMPTY.is_empty and FloatInterval.EMPTY.width == 0.0
    assert iv.meet(FloatInterval(3, 4)).is_empty
    assert iv.join(FloatInterval(3, 4)).pair() == (1.0, 4.0)
    with pytest.raises(ValueError):
        FloatInterval(2, 1)
    with pytest.raises(ValueError):
        FloatInterval(math.nan, 1)


def test_box_helpers():
    b = FloatBox.from_bounds([RationalInterval.closed(Fraction(1, 3), 1), RationalInterval.closed(-2, 2)])
    assert Fraction(1, 3) in b[0] and Fraction(b[0].lo) < Fraction(1, 3)
    assert width(b) == 4.0
    left, right = bisect(b, 1)
    assert left[1].pair() == (-2.0, 0.0) and right[1].pair() == (0.0, 2.0)
    with pytest.raises(DegenerateBisect):
        bisect(FloatBox([(1, 1)]), 0)


def test_lipschitz_bound():
    assert lipschitz_bound(x * x, FloatBox([(-1, 3)])) >= 6.0
    assert lipschitz_bound(Sin(x), FloatBox([(0, 10)])) >= 1.0
    assert lipschitz_bound(Exp(x), FloatBox([(0, 1)])) >= math.e


@given(terms(n_vars=2, depth=4), boxes_with_points(n_vars=2))
def test_natural_extension_contains_point_values(t, bp):
    los, his, p = bp
    try:
        v = eval_point(t, p)
        iv = natural_extension(t, FloatBox.from_lists(los, his))
    except (NondefinedAtPoint, PrecisionUnreachable, FullLine):
        return
    assert v in iv


def test_natural_extension_fuzz_fixed_seed():
    rng = random.Random(2024)
    from termgen import random_box, random_point, random_term

    checked = 0
    for _ in range(3000):
        n = rng.randint(1, 3)
        t = random_term(rng, n, 4)
        los, his = random_box(rng, n)
        p = random_point(rng, los, his)
        try:
            v = eval_point(t, p)
            iv = natural_extension(t, FloatBox.from_lists(los, his))
        except (NondefinedAtPoint, PrecisionUnreachable, FullLine):
            continue
        assert v in iv, (t, los, his, p)
        checked += 1
    assert checked > 2900


def test_shrinking_boxes_shrink_the_enclosure():
    rng = random.Random(7)
    from termgen import random_term

    for _ in range(200):
        t = random_term(rng, 2, 3)
        p = [rng.uniform(-2, 2), rng.uniform(-2, 2)]
        prev, first = math.inf, None
        try:
            eval_point(t, p)  # only terms defined at the centre converge
            for k in range(1, 41):
                r = 2.0**-k
                iv = natural_extension(t, FloatBox([(v - r, v + r) for v in p]))
                w = iv.width
                assert w <= prev + 2 * math.ulp(prev if math.isfinite(prev) else 1.0)
                prev = w
                first = w if first is None else first
        except (FullLine, NondefinedAtPoint, PrecisionUnreachable):
            continue
        # linear convergence would give a factor 2^-39; ask for 2^-20, plus
        # rounding noise at the magnitude of the value
        if math.isfinite(first):
            assert prev <= first * 2.0**-20 + 64 * math.ulp(max(abs(iv.lo), abs(iv.hi), 1.0))


@given(st.floats(-1e6, 1e6), st.floats(0, 1e3))
def test_trig_ranges_stay_within_unit(a, w):
    for f in (sin_i, cos_i):
        r = f(FloatInterval(a, a + w))
        assert r.lo >= -1.0 - math.ulp(1.0) and r.hi <= 1.0 + math.ulp(1.0)

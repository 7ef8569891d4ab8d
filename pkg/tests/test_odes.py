import bisect as _bisect
import doctest
import math
import random
from fractions import Fraction

import gmpy2
import pytest

from deltasat import odes
from deltasat.errors import BlowUp
from deltasat.expr import Const, Flow, Neg, Pow, Var
from deltasat.interval import FloatInterval
from deltasat.odes import IVP, integrate, ode_extension, ode_prune, uniform_grid

import wsuite

y = Var(0)
UNIT = [FloatInterval(1.0, 1.0)]


def decay():
    return IVP("decay", (Neg(y),), 0, 1)


def _exact(v) -> Fraction:
    return Fraction(*v.as_integer_ratio())


def exp_q(t: Fraction) -> Fraction:
    gmpy2.get_context().precision = 200
    return _exact(gmpy2.exp(gmpy2.mpfr(t)))


def test_module_doctest():
    assert doctest.testmod(odes).failed == 0


def test_constant_and_clock_fields():
    still = integrate(IVP("still", (Const(0),), 0, 1), UNIT, uniform_grid(1.0, 10))
    assert all(b[0].pair() == (1.0, 1.0) for b in still.points + still.tubes)
    clock = integrate(IVP("clock", (Const(1),), 0, 2), [FloatInterval(0, 0)], uniform_grid(2.0, 10))
    assert 2.0 in clock.final[0] and clock.final[0].width <= 1e-12


def test_decay_thousand_steps_contains_inverse_e():
    fin = integrate(decay(), UNIT, uniform_grid(1.0, 1000)).final[0]
    inv_e = exp_q(Fraction(-1))
    assert Fraction(fin.lo) <= inv_e <= Fraction(fin.hi)
    assert fin.width < 0.01


def test_halving_steps_never_widens():
    prev = None
    for steps in (125, 250, 500, 1000, 2000):
        w = integrate(decay(), UNIT, uniform_grid(1.0, steps)).final[0].width
        if prev is not None:
            assert w <= prev + 2 * math.ulp(prev)
        prev = w


def test_extension_examples():
    ext = ode_extension(decay(), 0, FloatInterval(0, 1), UNIT)
    assert Fraction(ext.lo) <= exp_q(Fraction(-1)) and ext.hi >= 1.0
    assert ext.width < 1.02
    at_start = ode_extension(decay(), 0, FloatInterval(0, 0), [FloatInterval(0.5, 2)])
    assert FloatInterval(0.5, 2) in at_start
    assert ode_extension(decay(), 0, FloatInterval(3, 4), UNIT).is_empty


def test_prune_examples():
    d = decay()
    assert ode_prune(FloatInterval(0, 0.2), d, 0, FloatInterval(0, 1), UNIT).is_empty
    ext = ode_extension(d, 0, FloatInterval(0, 1), UNIT)
    assert ode_prune(FloatInterval(-5, 5), d, 0, FloatInterval(0, 1), UNIT) == ext
    half = FloatInterval(ext.lo, (ext.lo + ext.hi) / 2)
    r = ode_prune(half, d, 0, FloatInterval(0, 1), UNIT)
    assert r in half and r in ext


def test_ivp_validation_and_blowup():
    with pytest.raises(ValueError):
        IVP("bad", (y,), 1, 0)
    with pytest.raises(ValueError):
        IVP("bad", (Var(1),), 0, 1)
    with pytest.raises(ValueError):
        IVP("bad", (Flow(decay(), 0, Const(1), (y,)),), 0, 1)
    with pytest.raises(ValueError):
        integrate(decay(), UNIT, [0.0, 0.5, 0.5, 1.0])
    with pytest.raises(ValueError):
        integrate(decay(), UNIT, [0.0, 2.0])
    with pytest.raises(BlowUp):
        integrate(IVP("square", (Pow(y, 2),), 0, 2), UNIT, uniform_grid(2.0, 50))


# closed-form trajectories y(t; a); exp is taken from mpfr so the oracle is
# independent of the libm the enclosure kernels pad around
SYSTEMS = [
    (IVP("const", (Const(Fraction(3, 4)),), 0, 2), lambda a, t: a + Fraction(3, 4) * t),
    (IVP("decay", (Neg(y),), 0, 1), lambda a, t: a * exp_q(-t)),
    (IVP("growth", (y,), 0, 1), lambda a, t: a * exp_q(t)),
]


@pytest.mark.parametrize("ivp, sol", SYSTEMS, ids=[s[0].name for s in SYSTEMS])
def test_enclosure_contains_exact_trajectories(ivp, sol):
    rng = random.Random(len(ivp.name))
    span = float(ivp.T - ivp.t0)
    checked = 0
    for _ in range(10):
        lo = rng.uniform(-2, 2)
        y0 = FloatInterval(lo, lo + rng.choice((0.0, 0.01, 0.5)))
        enc = integrate(ivp, [y0], uniform_grid(span, 64))
        for _ in range(100):
            a = Fraction(rng.uniform(y0.lo, y0.hi))
            t = Fraction(rng.uniform(0, span))
            k = max(1, _bisect.bisect_left(enc.times, float(t)))
            v = sol(a, t)
            tube = enc.tubes[k][0]
            assert Fraction(tube.lo) <= v <= Fraction(tube.hi), (ivp.name, a, t)
            checked += 1
        for k, tk in enumerate(enc.times):
            v = sol(Fraction(y0.lo), Fraction(tk))
            assert Fraction(enc.points[k][0].lo) <= v <= Fraction(enc.points[k][0].hi)
    assert checked == 1000


ODE_CASES = wsuite.ode_cases(seed=3, count=400)


def test_ode_prune_meets_pruning_requirements():
    assert wsuite.run_ode_suite(ode_prune, ODE_CASES) == {"W1": 0, "W2": 0, "W3": 0}


@pytest.mark.parametrize("op, req", [
    (wsuite.widening_ode_prune, "W1"), (wsuite.corner_ode_prune, "W3"), (wsuite.empty_ode_prune, "W3"),
], ids=["widening", "corner", "empty"])
def test_sabotaged_ode_pruning_is_caught(op, req):
    assert wsuite.run_ode_suite(op, ODE_CASES)[req] > 0

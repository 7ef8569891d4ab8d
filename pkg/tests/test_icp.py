import math
import random
from fractions import Fraction

import gmpy2
import pytest

from deltasat.errors import NonpositiveDelta, UnboundedDerivative
from deltasat.expr import Const, Pow, Sin, Var, eval_point
from deltasat.icp import (
    CERTIFICATE, PAPER_EPSILON, DeltaSat, IcpConfig, ResourceOut, Unsat, certificate_check,
    epsilon_from_delta, solve_conjunction, solve_terms,
)
from deltasat.interval import FloatBox, FloatInterval
from deltasat.oracle import residual_bounds

from problems import float_box, random_problem, standard_form

x, y = Var(0), Var(1)


def test_no_root_is_unsat():
    assert isinstance(solve_terms([Pow(x, 2) + 1], [(-1, 1)], Fraction(1, 2)), Unsat)


def test_exact_root_gives_tight_witness():
    ans = solve_terms([x], [(-1, 1)], Fraction(1, 1000))
    assert isinstance(ans, DeltaSat)
    w = ans.certificate.witness_box[0]
    assert -0.001 <= w.lo and w.hi <= 0.001


def test_parabola_meets_line_near_one_one():
    cs = [x - Pow(y, 2), x - 1]
    ans = solve_terms(cs, [(1, 2), (0, 4)], Fraction(1, 100))
    assert isinstance(ans, DeltaSat)
    box = ans.certificate.witness_box
    assert certificate_check(box, cs, Fraction(1, 100))
    # |x - 1| <= 0.01 and |x - y^2| <= 0.01 force y within 0.01 of 1
    assert abs(box[0].lo - 1) <= 0.01 and abs(box[1].lo - 1) <= 0.011


def test_sine_root_near_pi():
    ans = solve_terms([Sin(x)], [(3, 4)], Fraction(1, 1000))
    assert isinstance(ans, DeltaSat)
    gmpy2.get_context().precision = 100
    pi = Fraction(*gmpy2.const_pi().as_integer_ratio())
    w = ans.certificate.witness_box[0]
    # |sin x| <= 0.001 on [3, 4] forces |x - pi| <= asin(0.001) < 0.0011
    assert Fraction(w.lo) - pi <= Fraction(11, 10000) and pi - Fraction(w.hi) <= Fraction(11, 10000)


def test_epsilon_from_delta():
    unit = FloatBox([(-1, 1)])
    assert epsilon_from_delta([x], unit, Fraction(1, 10)) == Fraction(1, 20)
    assert epsilon_from_delta([10 * x], FloatBox([(0, 1)]), Fraction(1, 10)) == Fraction(1, 200)
    assert epsilon_from_delta([Sin(x)], FloatBox([(0, 7)]), Fraction(1, 100)) == Fraction(1, 200)
    with pytest.raises(NonpositiveDelta):
        epsilon_from_delta([x], unit, 0)
    with pytest.raises(UnboundedDerivative):
        epsilon_from_delta([1 / x], unit, Fraction(1, 10))


def test_certificate_check_examples():
    delta = Fraction(1, 100)
    assert certificate_check([FloatInterval(-0.001, 0.001)], [x], delta)
    assert not certificate_check([FloatInterval(0.5, 0.6)], [x], delta)
    assert not certificate_check([FloatInterval(-1, 1)], [1 / x], delta)


def test_epsilon_mode():
    ans = solve_terms([x], [(-1, 1)], Fraction(1, 10), mode=PAPER_EPSILON)
    assert isinstance(ans, DeltaSat) and ans.certificate.mode == PAPER_EPSILON
    assert ans.certificate.epsilon == Fraction(1, 20)
    assert ans.certificate.witness_box[0].width < 0.05
    assert isinstance(solve_terms([Pow(x, 2) + 1], [(-1, 1)], Fraction(1, 2), mode=PAPER_EPSILON), Unsat)


def test_resource_limits():
    # two barely overlapping circles need several splits
    cs = [Pow(x, 2) + Pow(y, 2) - 1, Pow(x - 2, 2) + Pow(y, 2) - Fraction(101, 100)]
    ans = solve_terms(cs, [(-4, 4), (-4, 4)], Fraction(1, 10**6), max_boxes=2)
    assert isinstance(ans, ResourceOut) and ans.boxes == 2
    assert isinstance(solve_terms(cs, [(-4, 4), (-4, 4)], Fraction(1, 10**6)), DeltaSat)
    # a floor wider than the start box: the one box left after pruning cannot be split
    edge = solve_terms([x - 3 * y], [(0, 1), (0, 1)], Fraction(1, 10**6), floor_width=2.0, probe=False)
    assert isinstance(edge, ResourceOut) and "floor" in edge.reason
    # |x + delta| >= delta on [0, 1]: refuted, though the weakening holds at x = 0
    assert isinstance(solve_terms([x + Const(Fraction(1, 10))], [(0, 1)], Fraction(1, 10)), Unsat)


def test_boxes_on_the_band_edge_still_certify():
    # |x - 1 + 7 delta / 8| <= 7 delta / 8 only from x = 1 on
    d = Fraction(1, 100)
    ans = solve_terms([x - 1 + d * 7 / 8], [(0, 1)], d)
    assert isinstance(ans, DeltaSat) and ans.boxes < 60


def test_input_validation():
    with pytest.raises(NonpositiveDelta):
        solve_terms([x], [(-1, 1)], 0)
    with pytest.raises(ValueError):
        solve_conjunction([x], FloatBox([(-math.inf, 1)]))


def test_configurations_agree_on_clear_cases():
    cs = [x - Pow(y, 2), x - 1]
    box = FloatBox([(1, 2), (0, 4)])
    for cfg in (IcpConfig(Fraction(1, 100), branch_rule="round-robin"),
                IcpConfig(Fraction(1, 100), worklist="best-first"),
                IcpConfig(Fraction(1, 100), operator="box"),
                IcpConfig(Fraction(1, 100), probe=False),
                IcpConfig(Fraction(1, 100), seed=3)):
        ans = solve_conjunction(cs, box, cfg)
        assert isinstance(ans, DeltaSat)
        assert certificate_check(ans.certificate.witness_box, cs, cfg.delta)


def test_seeded_runs_repeat():
    cs = [Pow(x, 2) + Pow(y, 2) - 1, x - y]
    box = FloatBox([(-2, 2), (-2, 2)])
    a = solve_conjunction(cs, box, IcpConfig(Fraction(1, 1000), seed=7, probe=False))
    b = solve_conjunction(cs, box, IcpConfig(Fraction(1, 1000), seed=7, probe=False))
    assert a == b


DELTAS = (Fraction(1, 2), Fraction(1, 10), Fraction(1, 100))


def _problems(seed, count, max_vars):
    rng = random.Random(seed)
    for _ in range(count):
        delta = rng.choice(DELTAS)
        terms, bounds = random_problem(rng, delta, max_vars)
        yield delta, terms, bounds


def test_unsat_answers_survive_a_million_point_grid():
    seen = 0
    for delta, terms, bounds in _problems(21, 150, max_vars=3):
        ans = solve_conjunction(terms, float_box(bounds), IcpConfig(delta))
        if not isinstance(ans, Unsat):
            continue
        n = len(bounds)
        steps = {1: 10**6, 2: 999, 3: 99}[n]
        _, best = residual_bounds(standard_form(terms, bounds), steps)
        # certificate-mode Unsat means max_i |f_i| > 7 delta / 8 everywhere
        assert best >= float(delta) * 7 / 8 * (1 - 1e-12), (terms, bounds, delta)
        seen += 1
    assert seen >= 10


def test_certificates_check_and_midpoints_satisfy_the_weakening():
    seen = 0
    for delta, terms, bounds in _problems(22, 150, max_vars=3):
        ans = solve_conjunction(terms, float_box(bounds), IcpConfig(delta))
        if not isinstance(ans, DeltaSat):
            continue
        box = ans.certificate.witness_box
        assert certificate_check(box, terms, delta)
        mid = [Fraction(iv.lo) + (Fraction(iv.hi) - Fraction(iv.lo)) / 2 for iv in box]
        assert all(abs(eval_point(t, mid, bits=80)) <= delta for t in terms)
        seen += 1
    assert seen >= 50


def test_larger_delta_keeps_delta_sat():
    seen = 0
    for delta, terms, bounds in _problems(23, 80, max_vars=2):
        if not isinstance(solve_conjunction(terms, float_box(bounds), IcpConfig(delta)), DeltaSat):
            continue
        for k in (2, 10):
            assert isinstance(solve_conjunction(terms, float_box(bounds), IcpConfig(delta * k)), DeltaSat)
        seen += 1
    assert seen >= 30


def test_tight_budgets_always_return():
    for delta, terms, bounds in _problems(24, 60, max_vars=3):
        ans = solve_conjunction(terms, float_box(bounds), IcpConfig(delta / 1000, max_boxes=20))
        assert isinstance(ans, (Unsat, DeltaSat, ResourceOut)) and ans.boxes <= 20
        assert ans.verdict in ("unsat", "delta-sat", "unknown (resource limit)")
    assert CERTIFICATE == IcpConfig().mode

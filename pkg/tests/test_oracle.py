import random
from fractions import Fraction

import gmpy2
import pytest

from deltasat.errors import GridTooLarge, NonpositiveDelta, UnboundedDerivative
from deltasat.expr import Const, Exp, Pow, RationalInterval, Sin, Var
from deltasat.icp import DeltaSat, IcpConfig, ResourceOut, Unsat, solve_conjunction
from deltasat.oracle import (
    GridDeltaSat, GridSpec, GridUnsat, adjudicate, choose_exponent, from_unit, grid_decide, implied_band,
    rescale_to_unit, residual_bounds,
)

from problems import float_box, random_problem, standard_form

x, y = Var(0), Var(1)
HALF = Fraction(1, 2)


def sf1(term, lo, hi):
    return standard_form([term], [RationalInterval.closed(lo, hi)])


def test_grid_spec():
    g = GridSpec(3, 2)
    assert g.epsilon == Fraction(1, 8) and g.points_per_dim == 9 and g.size == 81


def test_rescaling():
    unit = rescale_to_unit(sf1(x, -1, 1))
    assert unit.clauses[0][0] == Const(-1) + Const(2) * x
    assert unit.bounds[0] == RationalInterval.closed(0, 1)
    assert rescale_to_unit(sf1(x, 0, 1)).clauses[0][0] == x


def test_exact_root_found_at_the_centre():
    ans = grid_decide(sf1(x, -1, 1), HALF)
    assert isinstance(ans, GridDeltaSat)
    assert ans.grid.e == 5 and ans.unit_point == (HALF,) and ans.point == (0,)


def test_no_root_is_unsat():
    ans = grid_decide(sf1(Pow(x, 2) + 1, -1, 1), HALF)
    assert isinstance(ans, GridUnsat) and ans.grid.e == 6


def test_sine_root_near_pi():
    delta = Fraction(1, 10)
    ans = grid_decide(sf1(Sin(x), 3, 4), delta)
    assert isinstance(ans, GridDeltaSat)
    gmpy2.get_context().precision = 120
    a = gmpy2.mpfr(ans.point[0].numerator) / ans.point[0].denominator
    assert abs(Fraction(*gmpy2.sin(a).as_integer_ratio())) < delta * 5 / 8
    assert ans.point == (Fraction(201, 64),)


def test_errors():
    with pytest.raises(NonpositiveDelta):
        grid_decide(sf1(x, 0, 1), 0)
    three = standard_form([x + y + Var(2) + Var(3)], [RationalInterval.closed(0, 1)] * 4)
    with pytest.raises(GridTooLarge):
        grid_decide(three, HALF)
    with pytest.raises(GridTooLarge):
        grid_decide(sf1(Exp(10 * x), 0, 1), Fraction(1, 1000))
    with pytest.raises(UnboundedDerivative):
        grid_decide(sf1(1 / x, 0, 1), HALF)


def test_degenerate_coordinate_and_open_bounds():
    sf = standard_form([x - y], [RationalInterval.closed(2, 2), RationalInterval(Fraction(1), Fraction(3), True, True)])
    unit = rescale_to_unit(sf)
    assert unit.bounds[0] == RationalInterval.closed(0, 0) and unit.bounds[1].lo_open
    assert from_unit(sf, (Fraction(0), HALF)) == (2, 2)
    assert isinstance(grid_decide(sf, Fraction(1, 10)), GridDeltaSat)


def test_exponent_matches_lipschitz_rule():
    # |g'| <= 2 for g = -1 + 2x; 2^-r < delta/4 gives r = 4 at delta = 1/2, then
    # 2 * 2^-(e+1) < 2^-4 needs e = 5
    assert choose_exponent(rescale_to_unit(sf1(x, -1, 1)), HALF) == 5


def test_residual_bounds_bracket_the_minimum():
    lo, hi = residual_bounds(sf1(Pow(x, 2) + 1, -1, 1), 64)
    assert lo <= 1.0 <= hi and hi - lo < 0.1
    lo, hi = residual_bounds(sf1(x - Fraction(1, 3), 0, 1), 64)
    assert lo == 0.0 and hi < 0.01


def test_implied_bands():
    d = Fraction(1, 10)
    g = GridSpec(4, 1)
    assert implied_band(GridDeltaSat(g, (0,), (0,)), d) == (0, d * 5 / 8)
    assert implied_band(GridUnsat(g), d)[0] == d / 8
    assert implied_band(Unsat(), d) == (d * 7 / 8, Fraction(10) ** 300)
    assert implied_band(Unsat(), d, mode="paper-epsilon")[0] == 0
    assert implied_band(ResourceOut(), d) is None


def test_adjudication():
    d = Fraction(1, 10)
    # min |x^2 + 1| = 1: an icp delta-sat answer would claim a residual of at most d
    sf = sf1(Pow(x, 2) + 1, -1, 1)
    oracle = grid_decide(sf, d)
    fake = DeltaSat(None)
    assert not adjudicate(sf, d, oracle, fake)
    assert adjudicate(sf, d, oracle, Unsat())
    # residual exactly 3d/4: both verdicts are admissible
    edge = sf1(Pow(x, 2) + d * 3 / 4, -1, 1)
    assert adjudicate(edge, d, GridUnsat(GridSpec(choose_exponent(rescale_to_unit(edge), d), 1)), fake)


DELTAS = (Fraction(1, 2), Fraction(1, 10), Fraction(1, 100))


def test_unsat_answers_hold_on_a_finer_grid():
    rng = random.Random(31)
    seen = 0
    for _ in range(60):
        delta = rng.choice(DELTAS)
        terms, bounds = random_problem(rng, delta, max_vars=2)
        sf = standard_form(terms, bounds)
        try:
            ans = grid_decide(sf, delta, max_points=1 << 20)
        except GridTooLarge:
            continue
        if isinstance(ans, GridUnsat):
            _, hi = residual_bounds(sf, 4 << ans.grid.e)
            assert hi >= float(delta / 8)
            seen += 1
    assert seen >= 5


def test_agrees_with_branch_and_prune_on_small_corpus():
    rng = random.Random(32)
    evaluated = 0
    for _ in range(40):
        delta = rng.choice(DELTAS)
        terms, bounds = random_problem(rng, delta, max_vars=2)
        sf = standard_form(terms, bounds)
        try:
            ans = grid_decide(sf, delta, max_points=1 << 20)
        except GridTooLarge:
            continue
        icp = solve_conjunction(terms, float_box(bounds), IcpConfig(delta))
        assert adjudicate(sf, delta, ans, icp)
        evaluated += 1
    assert evaluated >= 25

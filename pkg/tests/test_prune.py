from fractions import Fraction

import pytest

from deltasat.expr import Const, Pow, Sin, Var
from deltasat.interval import FloatBox, FloatInterval
from deltasat.prune import (
    SABOTAGED, Constraint, Pruner, box_consistency, box_consistency_narrow, corner_prune, empty_prune,
    hc4_revise, prune_fixpoint, widening_prune,
)

import wsuite

x, y = Var(0), Var(1)


def test_constraint_band_is_outward():
    c = Constraint(x, Fraction(1, 10))
    assert c.band[0] <= -0.1 and c.band[1] >= 0.1
    assert Fraction(c.band[1]) >= Fraction(1, 10) and Fraction(c.band[0]) <= Fraction(-1, 10)
    with pytest.raises(ValueError):
        Constraint(x, -1)


def test_hc4_parabola_narrows_y_in_one_pass():
    # x - y^2 = 0 with x in [0, 4] gives y in [-2, 2]
    r = hc4_revise(FloatBox([(0, 4), (0, 4)]), Constraint(x - Pow(y, 2)))
    assert r.changed and r.box[0].pair() == (0.0, 4.0)
    assert r.box[1].lo == 0.0 and 2.0 <= r.box[1].hi <= 2.0 + 1e-9


def test_hc4_empty_on_x_squared_plus_one():
    r = hc4_revise(FloatBox([(-1, 1)]), Constraint(Pow(x, 2) + 1))
    assert r.is_empty


def test_hc4_and_box_consistency_on_quadratic():
    # x^2 - 1/4 = 0 within 1/1000: |x| <= sqrt(0.251) = 0.50099...
    c = Constraint(Pow(x, 2) - Fraction(1, 4), Fraction(1, 1000))
    r = hc4_revise(FloatBox([(-2, 2)]), c)
    assert r.box[0].lo == pytest.approx(-0.500999, abs=1e-6) and r.box[0].hi == pytest.approx(0.500999, abs=1e-6)
    b = box_consistency(FloatBox([(-2, 2)]), c)
    # shaving stops at slices of 2^-12 of the width, so the hull can be one slice wider
    slack = 4.0 * 2.0**-12
    assert -0.501 - slack <= b.box[0].lo <= -0.500999 and 0.500999 <= b.box[0].hi <= 0.501 + slack


def test_box_consistency_can_beat_hc4():
    # sin(x) * sin(x) = 0.99 on [0, 3]: hc4 treats the two factors independently,
    # slicing does not
    c = Constraint(Sin(x) * Sin(x) - Fraction(99, 100))
    box = FloatBox([(0, 3)])
    h = hc4_revise(box, c)
    b = box_consistency_narrow(box, c, 0)
    assert b.box[0].width <= h.box[0].width


def test_box_consistency_empty_and_budget():
    assert box_consistency_narrow(FloatBox([(-1, 1)]), Constraint(Pow(x, 2) + 1), 0).is_empty
    r = box_consistency_narrow(FloatBox([(-3, 3)]), Constraint(Pow(x, 2) - 1), 0, max_evals=3)
    assert not r.is_empty and r.box.subset(FloatBox([(-3, 3)]))


def test_fixpoint_propagates_between_constraints():
    cs = [Constraint(x - Pow(y, 2)), Constraint(x - 1)]
    r = prune_fixpoint(FloatBox([(0, 4), (-4, 4)]), cs)
    assert r.box[0].pair() == (1.0, 1.0)
    assert r.box[1].lo == pytest.approx(-1.0) and r.box[1].hi == pytest.approx(1.0)
    rb = prune_fixpoint(FloatBox([(0, 4), (-4, 4)]), cs, operator="box")
    assert rb.box[1].lo == pytest.approx(-1.0, abs=1e-3) and rb.box[1].hi == pytest.approx(1.0, abs=1e-3)


def test_pruner_lists_path_matches_box_path():
    cs = [Constraint(x * y - 1, Fraction(1, 100)), Constraint(x - y)]
    p = Pruner(cs, 2)
    ok, lo, hi = p.prune_lists([0.0, 0.0], [3.0, 3.0])
    r = p.prune(FloatBox([(0, 3), (0, 3)]))
    assert ok and r.box == FloatBox.from_lists(lo, hi)


def test_sabotaged_operators_misbehave_as_designed():
    box = FloatBox([(-1, 1)])
    c = Constraint(Pow(x, 2) + Const(1))
    assert not widening_prune(box, c).box.subset(box)
    corner = corner_prune(box, c).box
    assert corner == FloatBox([(1, 1)]) and not wsuite.meets_band(c.term, corner, c.band)
    assert empty_prune(FloatBox([(0, 1)]), Constraint(x)).is_empty
    assert set(SABOTAGED) == {"widening", "corner", "empty"}


CASES = wsuite.cases(seed=5, count=1000, specials=[Pow(x, 2) + Const(1)])


def _box_narrow_first(box, c):
    return box_consistency_narrow(box, c, c.variables[0] if c.variables else 0)


@pytest.mark.parametrize("op", [hc4_revise, _box_narrow_first, box_consistency], ids=["hc4", "box-narrow", "box"])
def test_pruning_requirements_hold(op):
    assert wsuite.run_suite(op, CASES) == {"W1": 0, "W2": 0, "W3": 0}


@pytest.mark.parametrize("name, req", [("widening", "W1"), ("corner", "W2"), ("empty", "W3")])
def test_sabotaged_operator_fails_its_suite(name, req):
    assert wsuite.run_suite(SABOTAGED[name], CASES)[req] > 0


def test_suite_has_planted_zeros():
    assert sum(1 for c in CASES if c.zeros) > 300

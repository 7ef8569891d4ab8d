"""Randomized checks of the three pruning requirements.

W1  the result is a subset of the input box;
W2  a nonempty result still has ``f`` meeting the band under interval evaluation;
W3  every known zero of the (weakened) constraint in the box survives.

Zeros are planted: a random term ``t`` and point ``p`` give the constraint
``t - t(p)``.  Rational terms are evaluated exactly with :mod:`fractions`;
transcendental ones to 80 bits and paired with a positive band.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from deltasat.errors import FullLine, NondefinedAtPoint, PrecisionUnreachable
from deltasat.expr import (
    Abs, Add, Const, Cos, Div, Exp, Max, Min, Mul, Neg, Pow, Sin, Sub, Term, Var, decide_abs_le, eval_point,
)
from deltasat.interval import FloatBox, FloatInterval, natural_extension
from deltasat.prune import Constraint

from termgen import random_box, random_point, random_term

DELTAS = (Fraction(0), Fraction(1, 1000), Fraction(1, 2))


def exact_eval(t: Term, p):
    """Exact rational value of a term without transcendental functions; None otherwise."""
    if isinstance(t, Var):
        return p[t.index]
    if isinstance(t, Const):
        return t.value
    if isinstance(t, (Exp, Sin, Cos)):
        return None
    kids = [exact_eval(c, p) for c in t.children()]
    if any(k is None for k in kids):
        return None
    if isinstance(t, Neg):
        return -kids[0]
    if isinstance(t, Abs):
        return abs(kids[0])
    if isinstance(t, Pow):
        return kids[0] ** t.exponent
    a, b = kids
    if isinstance(t, Add):
        return a + b
    if isinstance(t, Sub):
        return a - b
    if isinstance(t, Mul):
        return a * b
    if isinstance(t, Div):
        if b == 0:
            raise NondefinedAtPoint("division by zero")
        return a / b
    if isinstance(t, Min):
        return min(a, b)
    if isinstance(t, Max):
        return max(a, b)
    raise TypeError(t)


@dataclass
class Case:
    box: FloatBox
    constraint: Constraint
    zeros: list


def _is_zero(f: Term, q, delta: Fraction) -> bool | None:
    try:
        v = exact_eval(f, q)
        if v is not None:
            return abs(v) <= delta
        if delta == 0:
            return None
        return decide_abs_le(f, q, delta, max_precision=512)
    except (NondefinedAtPoint, PrecisionUnreachable):
        return None


def make_case(rng: random.Random, extra_samples: int = 3, special=None) -> Case | None:
    n = rng.randint(1, 3)
    t = special if special is not None else random_term(rng, n, 3)
    n = max(n, max((s.index for s in _vars(t)), default=-1) + 1)
    los, his = random_box(rng, n, max_width=3.0)
    p = random_point(rng, los, his)
    delta = rng.choice(DELTAS)
    try:
        c = exact_eval(t, p)
        if c is None:
            delta = delta or Fraction(1, 1000)
            c = eval_point(t, p, bits=80)
    except (NondefinedAtPoint, PrecisionUnreachable):
        return None
    # half of the cases keep the planted zero, the rest shift it away
    if rng.random() < 0.5:
        c += Fraction(rng.randint(-8, 8), 4)
    f = t - Const(c)
    zeros = [q for q in [p] + [random_point(rng, los, his) for _ in range(extra_samples)]
             if _is_zero(f, q, delta)]
    return Case(FloatBox.from_lists(los, his), Constraint(f, delta), zeros)


def _vars(t: Term):
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            yield s
        stack.extend(s.children())


def cases(seed: int, count: int, specials=()) -> list[Case]:
    rng = random.Random(seed)
    out = []
    for s in specials:
        c = make_case(rng, special=s)
        if c is not None:
            out.append(c)
    while len(out) < count:
        c = make_case(rng)
        if c is not None:
            out.append(c)
    return out


def meets_band(f: Term, box: FloatBox, band) -> bool:
    try:
        r = natural_extension(f, box)
    except FullLine:
        return True
    return not r.is_empty and r.lo <= band[1] and r.hi >= band[0]


def check(op, case: Case) -> set[str]:
    """Names of the requirements ``op`` violates on ``case``."""
    res = op(case.box, case.constraint)
    bad = set()
    if res.is_empty:
        if case.zeros:
            bad.add("W3")
        return bad
    out = res.box
    if not out.subset(case.box):
        bad.add("W1")
    if not meets_band(case.constraint.term, out, case.constraint.band):
        bad.add("W2")
    if any(not out.contains_point(q) for q in case.zeros):
        bad.add("W3")
    return bad


def run_suite(op, case_list) -> dict[str, int]:
    counts = {"W1": 0, "W2": 0, "W3": 0}
    for case in case_list:
        for w in check(op, case):
            counts[w] += 1
    return counts


# ------------------------------------------------------------------ ODE flows
# ode_prune(I, ivp, k, I_t, y0) narrows the value I of y_k(t; a) for t in I_t,
# a in y0.  Exact trajectories play the role of the zero set.


def ode_systems():
    from deltasat.odes import IVP

    y0, y1 = Var(0), Var(1)
    return [
        (IVP("decay", (Neg(y0),), 0, 1, steps=24), lambda a, t: (a[0] * math.exp(-t),)),
        (IVP("growth", (y0,), 0, 1, steps=24), lambda a, t: (a[0] * math.exp(t),)),
        (IVP("drift", (Const(Fraction(1, 2)),), 0, 2, steps=8), lambda a, t: (a[0] + t / 2,)),
        (IVP("osc", (y1, Neg(y0)), 0, 1, steps=24),
         lambda a, t: (a[0] * math.cos(t) + a[1] * math.sin(t), -a[0] * math.sin(t) + a[1] * math.cos(t))),
    ]


@dataclass
class OdeCase:
    ivp: object
    component: int
    I: FloatInterval
    I_t: FloatInterval
    y0: list
    samples: list  # exact-ish trajectory values y_k(t; a) with a margin


def _grid(rng, lo, hi, step):
    k = rng.randint(0, int((hi - lo) / step))
    return lo + k * step


def ode_cases(seed: int, count: int) -> list[OdeCase]:
    rng = random.Random(seed)
    systems = ode_systems()
    out = []
    while len(out) < count:
        ivp, sol = rng.choice(systems)
        k = rng.randrange(ivp.dim)
        span = float(ivp.T - ivp.t0)
        # endpoints on a 1/16 grid so integrations repeat and hit the cache
        t_lo = _grid(rng, 0.0, span, 1 / 16)
        t_hi = min(span, t_lo + rng.choice((0.0, 1 / 16, 1 / 4)))
        y0 = []
        for _ in range(ivp.dim):
            a = _grid(rng, -1.0, 1.0, 1 / 16)
            y0.append(FloatInterval(a, a + rng.choice((0.0, 1 / 16))))
        samples = []
        for _ in range(4):
            a = [rng.uniform(iv.lo, iv.hi) for iv in y0]
            t = rng.uniform(t_lo, t_hi)
            samples.append(sol(a, t)[k])
        centre = rng.choice(samples)
        w = rng.choice((0.01, 0.1, 1.0))
        off = rng.uniform(-w, w)
        I = FloatInterval(centre + off - w / 2, centre + off + w / 2)
        out.append(OdeCase(ivp, k, I, FloatInterval(t_lo, t_hi), y0, samples))
    return out


# libm trajectories are accurate to a few ulp; treat values this close to an
# endpoint of I as undetermined
SAMPLE_MARGIN = 1e-12


def check_ode(op, case: OdeCase) -> set[str]:
    from deltasat.odes import ode_extension

    res = op(case.I, case.ivp, case.component, case.I_t, case.y0)
    inside = [v for v in case.samples if case.I.lo + SAMPLE_MARGIN <= v <= case.I.hi - SAMPLE_MARGIN]
    bad = set()
    if res.is_empty:
        if inside:
            bad.add("W3")
        return bad
    if res not in case.I:
        bad.add("W1")
    ext = ode_extension(case.ivp, case.component, case.I_t, case.y0)
    if res.meet(ext).is_empty:
        bad.add("W2")
    if any(not (res.lo - SAMPLE_MARGIN <= v <= res.hi + SAMPLE_MARGIN) for v in inside):
        bad.add("W3")
    return bad


def run_ode_suite(op, case_list) -> dict[str, int]:
    counts = {"W1": 0, "W2": 0, "W3": 0}
    for case in case_list:
        for w in check_ode(op, case):
            counts[w] += 1
    return counts


def widening_ode_prune(I, ivp, component, I_t, y0):
    return FloatInterval(I.lo - 1.0, I.hi + 1.0)


def corner_ode_prune(I, ivp, component, I_t, y0):
    return FloatInterval(I.hi, I.hi)


def empty_ode_prune(I, ivp, component, I_t, y0):
    return FloatInterval.EMPTY

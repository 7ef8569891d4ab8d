"""Random terms, boxes and points shared by the property tests."""

from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from deltasat.expr import Abs, Add, Const, Cos, Div, Exp, Max, Min, Mul, Neg, Pow, Sin, Sub, Var

UNARY = (Neg, Exp, Sin, Cos, Abs)
BINARY = (Add, Sub, Mul, Div, Min, Max)


def random_const(rng: random.Random) -> Const:
    return Const(Fraction(rng.randint(-40, 40), rng.choice((1, 2, 3, 4, 8, 10))))


def random_term(rng: random.Random, n_vars: int, depth: int = 4, ops=None) -> object:
    """A random term over ``Var(0..n_vars-1)`` using the full operator set.

    Exponentials are kept shallow so enclosures stay finite on small boxes.
    """
    ops = ops or ("unary", "binary", "pow")
    if depth == 0 or rng.random() < 0.25:
        return Var(rng.randrange(n_vars)) if rng.random() < 0.7 else random_const(rng)
    kind = rng.choice(ops)
    if kind == "unary":
        op = rng.choice(UNARY)
        return op(random_term(rng, n_vars, depth - 1 if op is not Exp else min(depth - 1, 1), ops))
    if kind == "pow":
        return Pow(random_term(rng, n_vars, depth - 1, ops), rng.randint(1, 4))
    op = rng.choice(BINARY)
    return op(random_term(rng, n_vars, depth - 1, ops), random_term(rng, n_vars, depth - 1, ops))


def random_box(rng: random.Random, n_vars: int, span: float = 4.0, max_width: float = 2.0):
    los = [rng.uniform(-span, span) for _ in range(n_vars)]
    his = [lo + rng.choice((0.0, rng.uniform(0, max_width))) for lo in los]
    return los, his


def random_point(rng: random.Random, los, his) -> list[Fraction]:
    """A rational point of the box with dyadic coordinates."""
    out = []
    for lo, hi in zip(los, his):
        a, b = Fraction(lo), Fraction(hi)
        out.append(a + (b - a) * Fraction(rng.randint(0, 1 << 10), 1 << 10))
    return out


@st.composite
def terms(draw, n_vars: int = 2, depth: int = 3):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_term(random.Random(seed), n_vars, depth)


@st.composite
def boxes_with_points(draw, n_vars: int = 2):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = random.Random(seed)
    los, his = random_box(rng, n_vars)
    return los, his, random_point(rng, los, his)

"""Grid decision procedure for small standard forms, used as a trusted reference.

The domain is mapped affinely onto the unit cube.  With a grid of spacing
``2**-e`` every point of the cube is within ``2**-(e+1)`` (per coordinate)
of a grid point; ``e`` is chosen from Lipschitz bounds so that moving that
far changes every disjunct by less than ``delta / 4``.  At each grid point
each ``g_ij`` is approximated to within ``delta / 8`` and the test
``|g_ij| < delta / 2`` is evaluated exactly:

* some grid point passes every clause: the weakening holds there (DeltaSat);
* no grid point passes: every point of the cube has a clause whose
  disjuncts are all at least ``delta / 8`` away from zero (Unsat).

Evaluation is vectorized with numpy.  Each value carries a rigorous bound
on its accumulated floating-point error; points where that bound exceeds
``delta / 8`` are re-evaluated with the multi-precision evaluator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import GridTooLarge, NonpositiveDelta, UnboundedDerivative
from .expr import (
    Abs, Add, Const, Cos, Div, Exp, Flow, Max, Min, Mul, Neg, Pow, RationalInterval, Sin, Sub,
    Term, Var, as_fraction, eval_enclosure, substitute,
)
from .interval import FloatBox, FloatInterval, fraction_bounds, gradient_enclosure
from .normalize import StandardForm
from .icp import PRUNE_FRACTION

U = 2.0**-53
MAX_EXPONENT = 22
MAX_DIM = 3
DEFAULT_BUDGET = 1 << 26
CHUNK = 1 << 20


@dataclass(frozen=True)
class GridSpec:
    e: int
    n: int

    @property
    def epsilon(self) -> Fraction:
        return Fraction(1, 1 << self.e)

    @property
    def points_per_dim(self) -> int:
        return (1 << self.e) + 1

    @property
    def size(self) -> int:
        return self.points_per_dim ** self.n


@dataclass(frozen=True)
class GridUnsat:
    grid: GridSpec
    verdict = "unsat"


@dataclass(frozen=True)
class GridDeltaSat:
    grid: GridSpec
    unit_point: tuple[Fraction, ...]
    point: tuple[Fraction, ...]  # in the original coordinates
    verdict = "delta-sat"


def rescale_to_unit(sf: StandardForm) -> StandardForm:
    """Substitute ``x_i -> l_i + (u_i - l_i) x_i`` so every variable ranges over ``[0, 1]``.

    Degenerate coordinates become constants.  Open endpoints stay open.
    """
    mapping: dict[int, Term] = {}
    bounds = []
    for i, b in enumerate(sf.bounds):
        if not b.bounded:
            raise ValueError(f"variable {sf.names[i]} is unbounded")
        lo, hi = b.lo, b.hi
        if lo == hi:
            mapping[i] = Const(lo)
            bounds.append(RationalInterval.closed(0, 0))
            continue
        if (lo, hi) != (0, 1):
            scaled = Var(i) if hi - lo == 1 else Mul(Const(hi - lo), Var(i))
            mapping[i] = scaled if lo == 0 else Add(Const(lo), scaled)
        bounds.append(RationalInterval(Fraction(0), Fraction(1), b.lo_open, b.hi_open))
    clauses = tuple(tuple(substitute(t, mapping) if mapping else t for t in c) for c in sf.clauses)
    return StandardForm(tuple(bounds), clauses, sf.names, sf.n_original, sf.slack_map)


def from_unit(sf: StandardForm, point: Sequence[Fraction]) -> tuple[Fraction, ...]:
    out = []
    for p, b in zip(point, sf.bounds):
        out.append(b.lo if b.lo == b.hi else b.lo + (b.hi - b.lo) * p)
    return tuple(out)


def _lipschitz_sum(t: Term, n: int) -> float:
    """Bound on ``sum_k |d t / d x_k|`` over the unit cube (for sup-norm steps)."""
    box = FloatBox([FloatInterval(0.0, 1.0)] * n)
    _, grad = gradient_enclosure(t, box)
    total = 0.0
    for g in grad:
        if g.is_empty:
            continue
        m = max(abs(g.lo), abs(g.hi))
        if not math.isfinite(m):
            raise UnboundedDerivative(f"unbounded derivative of {t} on the unit cube")
        total = math.nextafter(total + m, math.inf)
    return total


def choose_exponent(sf_unit: StandardForm, delta: Fraction) -> int:
    """Smallest ``e`` with ``L * 2**-(e+1) < 2**-r`` for every disjunct, where ``2**-r < delta/4``."""
    r = 0
    while Fraction(1, 1 << r) >= delta / 4:
        r += 1
    L = max((_lipschitz_sum(t, sf_unit.n) for t in sf_unit.disjuncts()), default=0.0)
    e = 0
    while Fraction(L) * Fraction(1, 1 << (e + 1)) >= Fraction(1, 1 << r):
        e += 1
    return e


# ------------------------------------------------ vectorized evaluation


def _eval_np(t: Term, cols: Sequence[np.ndarray]):
    """Values and rigorous absolute error bounds of ``t`` at a batch of points."""
    memo: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    size = len(cols[0]) if cols else 1

    def go(s: Term):
        key = id(s)
        if key in memo:
            return memo[key]
        if isinstance(s, Var):
            out = (cols[s.index], np.zeros(size))
        elif isinstance(s, Const):
            v = float(s.value)
            err = float(abs(Fraction(v) - s.value)) if math.isfinite(v) else math.inf
            out = (np.full(size, v), np.full(size, math.nextafter(err, math.inf) if err else 0.0))
        elif isinstance(s, Neg):
            a, ea = go(s.arg)
            out = (-a, ea)
        elif isinstance(s, (Add, Sub)):
            a, ea = go(s.left)
            b, eb = go(s.right)
            r = a + b if isinstance(s, Add) else a - b
            out = (r, ea + eb + U * np.abs(r))
        elif isinstance(s, Mul):
            out = _mul(go(s.left), go(s.right))
        elif isinstance(s, Div):
            a, ea = go(s.left)
            b, eb = go(s.right)
            with np.errstate(divide="ignore", invalid="ignore"):
                r = a / b
                denom = np.abs(b) - eb
                err = np.where(denom > 0, (ea + np.abs(r) * eb) / denom, np.inf) + U * np.abs(r)
            out = (r, err)
        elif isinstance(s, Pow):
            out = _pow(go(s.base), s.exponent, size)
        elif isinstance(s, Exp):
            a, ea = go(s.arg)
            with np.errstate(over="ignore"):
                r = np.exp(a)
                out = (r, r * np.expm1(ea) + 4 * U * r)
        elif isinstance(s, (Sin, Cos)):
            a, ea = go(s.arg)
            r = np.sin(a) if isinstance(s, Sin) else np.cos(a)
            out = (r, np.minimum(ea, 2.0) + 4 * U)
        elif isinstance(s, Abs):
            a, ea = go(s.arg)
            out = (np.abs(a), ea)
        elif isinstance(s, (Min, Max)):
            a, ea = go(s.left)
            b, eb = go(s.right)
            r = np.minimum(a, b) if isinstance(s, Min) else np.maximum(a, b)
            out = (r, np.maximum(ea, eb))
        elif isinstance(s, Flow):
            raise UnboundedDerivative("the grid oracle does not evaluate ODE flows")
        else:
            raise TypeError(f"unknown term {s!r}")
        memo[key] = out
        return out

    with np.errstate(invalid="ignore", over="ignore"):
        v, e = go(t)
        # go -> memo is a reference cycle; drop the arrays now rather than at the next gc pass
        memo.clear()
        # slack for rounding in the error computation itself
        e = e * (1 + 1e-6)
        e = np.where(np.isfinite(v), e, np.inf)
    return v, e


def _mul(x, y):
    a, ea = x
    b, eb = y
    r = a * b
    return r, np.abs(a) * eb + np.abs(b) * ea + ea * eb + U * np.abs(r)


def _pow(x, n: int, size: int):
    result = None
    base = x
    while n:
        if n & 1:
            result = base if result is None else _mul(result, base)
        n >>= 1
        if n:
            base = _mul(base, base)
    return result if result is not None else (np.ones(size), np.zeros(size))


# ------------------------------------------------------------ the procedure


def _grid_chunks(n: int, per_dim: int, spacing: Fraction):
    """Yield ``(flat_start, columns)`` over the grid in lexicographic order."""
    if n == 0:
        yield 0, []
        return
    # k / N is correctly rounded, exact for dyadic spacings, and never leaves [0, 1]
    axis = np.arange(per_dim, dtype=np.float64) * spacing.numerator / spacing.denominator
    if n == 1:
        for s in range(0, per_dim, CHUNK):
            yield s, [axis[s:s + CHUNK]]
        return
    tail = np.stack([m.ravel() for m in np.meshgrid(*([axis] * (n - 1)), indexing="ij")])
    tail_len = tail.shape[1]
    rows = max(1, CHUNK // tail_len)
    for s in range(0, per_dim, rows):
        k = min(rows, per_dim - s)
        first = np.repeat(axis[s:s + k], tail_len)
        yield s * tail_len, [first] + [np.tile(tail[j], k) for j in range(n - 1)]


def _unravel(flat: int, n: int, per_dim: int) -> tuple[int, ...]:
    idx = []
    for _ in range(n):
        idx.append(flat % per_dim)
        flat //= per_dim
    return tuple(reversed(idx))


def _refine(t: Term, cols, where: np.ndarray, bits: int, v: np.ndarray) -> np.ndarray:
    """Replace values at ``where`` by multi-precision ones accurate to ``2**-bits``."""
    v = v.copy()
    for k in np.nonzero(where)[0]:
        point = [Fraction(float(c[k])) for c in cols]
        lo, hi = eval_enclosure(t, point, bits)
        v[k] = float((lo + hi) / 2)
    return v


def _below(absv: np.ndarray, bound: Fraction) -> np.ndarray:
    """Exact ``absv < bound`` for doubles against a rational."""
    fl = fraction_bounds(bound)[0]
    if Fraction(fl) == bound:
        return absv < fl
    return absv <= fl


def grid_decide(sf: StandardForm, delta, max_points: int = DEFAULT_BUDGET,
                max_dim: int = MAX_DIM) -> GridUnsat | GridDeltaSat:
    """Decide ``sf`` up to ``delta`` by exhaustive evaluation on a grid."""
    delta = as_fraction(delta)
    if delta <= 0:
        raise NonpositiveDelta(f"delta must be positive, got {delta}")
    if sf.n > max_dim:
        raise GridTooLarge(f"{sf.n} variables exceed the oracle's limit of {max_dim}")
    unit = rescale_to_unit(sf)
    e = choose_exponent(unit, delta)
    grid = GridSpec(e, sf.n)
    if e > MAX_EXPONENT or grid.size > max_points:
        raise GridTooLarge(f"grid 2^-{e} over {sf.n} dimensions has {grid.size} points")
    accuracy = delta / 8
    acc_f = fraction_bounds(accuracy)[0]
    bits = max(1, math.ceil(-math.log2(float(accuracy)))) + 2
    half = delta / 2
    per_dim = grid.points_per_dim
    best: tuple[float, int] | None = None  # (residual, flat index) of the best passing point
    for start, cols in _grid_chunks(sf.n, per_dim, grid.epsilon):
        size = len(cols[0]) if cols else 1
        ok = np.ones(size, dtype=bool)
        rho = np.zeros(size)
        for clause in unit.clauses:
            sat = np.zeros(size, dtype=bool)
            cmin = np.full(size, np.inf)
            for t in clause:
                v, err = _eval_np(t, cols)
                bad = ~(err <= acc_f)
                if bad.any():
                    v = _refine(t, cols, bad, bits, v)
                a = np.abs(v)
                sat |= _below(a, half)
                cmin = np.minimum(cmin, a)
            ok &= sat
            rho = np.maximum(rho, cmin)
            if not ok.any():
                break
        if ok.any():
            # report the passing point with the smallest residual (first one on ties)
            masked = np.where(ok, rho, np.inf)
            k = int(np.argmin(masked))
            if best is None or masked[k] < best[0]:
                best = (float(masked[k]), start + k)
    if best is None:
        return GridUnsat(grid)
    idx = _unravel(best[1], sf.n, per_dim)
    up = tuple(Fraction(i, 1 << e) for i in idx)
    return GridDeltaSat(grid, up, from_unit(sf, up))


# -------------------------------------------------------------- adjudication


def residual_bounds(sf: StandardForm, steps_per_dim: int, max_points: int = 1 << 30) -> tuple[float, float]:
    """Bounds ``(lo, hi)`` on ``min_x max_i min_j |f_ij(x)|`` over the closed domain.

    Evaluates on a grid with ``steps_per_dim`` steps per unit edge and
    widens the grid minimum by the Lipschitz distance to the nearest node.
    """
    unit = rescale_to_unit(sf)
    n = sf.n
    per_dim = steps_per_dim + 1
    if per_dim ** n > max_points:
        raise GridTooLarge(f"{per_dim ** n} points")
    L = max((_lipschitz_sum(t, n) for t in unit.disjuncts()), default=0.0)
    spacing = Fraction(1, steps_per_dim)
    best = math.inf
    best_err = 0.0
    for _, cols in _grid_chunks(n, per_dim, spacing):
        size = len(cols[0]) if cols else 1
        rho = np.zeros(size)
        rho_err = np.zeros(size)
        for clause in unit.clauses:
            cmin = np.full(size, np.inf)
            cerr = np.zeros(size)
            for t in clause:
                v, err = _eval_np(t, cols)
                a = np.abs(v)
                take = a < cmin
                cmin = np.where(take, a, cmin)
                cerr = np.maximum(cerr, err)
            take = cmin > rho
            rho = np.where(take, cmin, rho)
            rho_err = np.maximum(rho_err, cerr)
        k = int(np.argmin(rho))
        if rho[k] < best:
            best, best_err = float(rho[k]), float(rho_err.max())
    # grid spacing is exact only for powers of two; pad the node distance slightly
    reach = L * (float(spacing) * 0.5 * (1 + 1e-9) + U)
    return max(0.0, best - best_err - reach), best + best_err


def implied_band(answer, delta, mode: str = "certificate") -> tuple[Fraction, Fraction] | None:
    """The range of ``min max_i min_j |f_ij|`` a verdict implies (None: no information).

    Bands are closed intervals of rationals; strict inequalities are widened
    by zero, which only makes the consistency check more lenient at a
    single point.
    """
    delta = as_fraction(delta)
    v = answer.verdict
    big = Fraction(10) ** 300
    if isinstance(answer, GridDeltaSat):
        return Fraction(0), delta * 5 / 8
    if isinstance(answer, GridUnsat):
        return delta / 8, big
    if v == "delta-sat":
        return Fraction(0), delta
    if v == "unsat":
        return (delta * PRUNE_FRACTION, big) if mode == "certificate" else (Fraction(0), big)
    return None


def adjudicate(sf: StandardForm, delta, oracle_answer, solver_answer, e: int | None = None,
               refine: int = 10, mode: str = "certificate") -> bool:
    """True when both verdicts are consistent with a ``refine`` times finer grid.

    Agreeing verdicts are accepted without evaluation.
    """
    if oracle_answer.verdict == solver_answer.verdict:
        return True
    a = implied_band(oracle_answer, delta)
    b = implied_band(solver_answer, delta, mode)
    if a is None or b is None:
        return True
    lo = max(a[0], b[0])
    hi = min(a[1], b[1])
    if lo > hi:
        return False
    e = e if e is not None else oracle_answer.grid.e
    glo, ghi = residual_bounds(sf, refine * (1 << e))
    return Fraction(glo) <= hi and lo <= Fraction(ghi)

"""Validated enclosures for autonomous initial value problems.

Each step of :func:`integrate` first certifies an a-priori box ``A`` with
``B + [0, h] * g(A)`` contained in ``A`` (a Picard inclusion, which proves
the solution exists on the step and stays in ``A``), then tightens the end
point to ``B + h * g(A')``.  Initial states are interval boxes, so one run
encloses every trajectory starting in the box.

>>> from deltasat.expr import Var, Neg
>>> decay = IVP("decay", (Neg(Var(0)),), t0=0, T=1)
>>> r = ode_extension(decay, 0, FloatInterval(1.0, 1.0), [FloatInterval(1.0, 1.0)], steps=1000)
>>> r.lo < 0.36788 < r.hi and r.width < 0.01
True
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from . import _pykernels as K
from .errors import BlowUp, StepRejected
from .expr import NotDifferentiable, Term, as_fraction, diff, free_vars, has_flow
from .interval import FloatBox, FloatInterval, fraction_bounds, gradient_enclosure
from .tape import Tape

DEFAULT_STEPS = 256
BLOWUP_WIDTH = 1e8
MAX_HALVINGS = 24


@dataclass(frozen=True, eq=False)
class IVP:
    """``dy/dt = field(y)`` on ``[t0, T]``; ``field[k]`` is a term over ``Var(0..dim-1)``.

    Time-dependent fields are written autonomously with an extra clock
    component whose derivative is 1.
    """

    name: str
    field: tuple[Term, ...]
    t0: Fraction = Fraction(0)
    T: Fraction = Fraction(1)
    var_names: tuple[str, ...] = ()
    steps: int = DEFAULT_STEPS
    lipschitz_bound: float | None = None
    _tapes: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "field", tuple(self.field))
        object.__setattr__(self, "t0", as_fraction(self.t0))
        object.__setattr__(self, "T", as_fraction(self.T))
        if self.t0 > self.T:
            raise ValueError(f"IVP {self.name}: t0 {self.t0} > T {self.T}")
        names = tuple(self.var_names) or tuple(f"y{k}" for k in range(len(self.field)))
        if len(names) != len(self.field):
            raise ValueError(f"IVP {self.name}: {len(names)} names for {len(self.field)} components")
        object.__setattr__(self, "var_names", names)
        for g in self.field:
            if has_flow(g):
                raise ValueError(f"IVP {self.name}: vector fields cannot contain flow terms")
            if free_vars(g) and max(free_vars(g)) >= self.dim:
                raise ValueError(f"IVP {self.name}: field mentions a variable beyond its dimension")

    @property
    def dim(self) -> int:
        return len(self.field)

    @property
    def field_tape(self) -> Tape:
        if "field" not in self._tapes:
            self._tapes["field"] = Tape(self.field, n_vars=self.dim)
        return self._tapes["field"]

    @property
    def jacobian_tape(self) -> Tape | None:
        """Tape of all partial derivatives ``d field[r] / d y_j``, row-major; None if
        some component has no symbolic derivative (abs/min/max)."""
        if "jac" not in self._tapes:
            try:
                terms = [diff(g, j) for g in self.field for j in range(self.dim)]
            except NotDifferentiable:
                self._tapes["jac"] = None
            else:
                self._tapes["jac"] = Tape(terms, n_vars=self.dim)
        return self._tapes["jac"]

    def __hash__(self):
        return id(self)


@dataclass(frozen=True)
class StepInfo:
    h: tuple[float, float]
    lipschitz: float
    picard_iterations: int


@dataclass(frozen=True)
class FlowEnclosure:
    """Enclosures on a time grid (times relative to ``t0``).

    ``points[k]`` encloses ``y(t_k)`` for every start in ``points[0]``;
    ``tubes[k]`` (k >= 1) encloses ``y(t)`` for all ``t`` in ``[t_{k-1}, t_k]``.
    ``tubes[0]`` is ``points[0]``.
    """

    times: tuple[float, ...]
    points: tuple[FloatBox, ...]
    tubes: tuple[FloatBox, ...]
    steps: tuple[StepInfo, ...] = ()

    @property
    def final(self) -> FloatBox:
        return self.points[-1]

    @property
    def boxes(self) -> tuple[FloatBox, ...]:
        return self.tubes[1:]


def _box_width(lo, hi) -> float:
    return max((K.sub_u(b, a) for a, b in zip(lo, hi)), default=0.0)


def _lipschitz(ivp: IVP, alo, ahi) -> float:
    """Infinity-norm bound of the Jacobian over the box ``[alo, ahi]``."""
    if ivp.lipschitz_bound is not None:
        return ivp.lipschitz_bound
    n = ivp.dim
    jt = ivp.jacobian_tape
    if jt is not None:
        vals, _ = jt.evaluate(alo, ahi)
        mags = [max(abs(lo), abs(hi)) for lo, hi in vals]
    else:
        box = FloatBox.from_lists(alo, ahi)
        mags = []
        for g in ivp.field:
            _, grad = gradient_enclosure(g, box)
            mags.extend(max(abs(iv.lo), abs(iv.hi)) for iv in grad)
    best = 0.0
    for r in range(n):
        row = 0.0
        for j in range(n):
            row = K.add_u(row, mags[r * n + j])
        best = max(best, row)
    return best


def step(ivp: IVP, blo: Sequence[float], bhi: Sequence[float], h: tuple[float, float]):
    """One validated step of length ``h`` (an enclosure ``[hl, hh]`` of the step).

    Returns ``(end_lo, end_hi, tube_lo, tube_hi, info)``.  Raises
    :class:`StepRejected` if no a-priori box is certified or ``h * L >= 1``.
    """
    n = ivp.dim
    tape = ivp.field_tape
    hl, hh = h
    g, _ = tape.evaluate(blo, bhi)
    alo, ahi = [], []
    for r in range(n):
        lo, hi = K.i_add(blo[r], bhi[r], *K.i_mul(0.0, hh, *g[r]))
        pad = 0.5 * (hi - lo) + 1e-15 * (1.0 + abs(lo) + abs(hi)) + 1e-300
        alo.append(K.sub_d(lo, pad))
        ahi.append(K.add_u(hi, pad))
    ok = False
    tlo, thi = alo, ahi
    it = 0
    for it in range(1, 9):
        ga, _ = tape.evaluate(alo, ahi)
        tlo, thi = [], []
        for r in range(n):
            lo, hi = K.i_add(blo[r], bhi[r], *K.i_mul(0.0, hh, *ga[r]))
            tlo.append(lo)
            thi.append(hi)
        if not all(math.isfinite(v) for v in tlo + thi):
            break
        if all(alo[r] <= tlo[r] and thi[r] <= ahi[r] for r in range(n)):
            ok = True
            break
        for r in range(n):
            lo = min(alo[r], tlo[r])
            hi = max(ahi[r], thi[r])
            pad = 0.1 * (hi - lo) + 1e-15 * (1.0 + abs(lo) + abs(hi))
            alo[r] = K.sub_d(lo, pad)
            ahi[r] = K.add_u(hi, pad)
    if not ok:
        raise StepRejected(f"no a-priori enclosure certified for h={hh!r}")
    lip = _lipschitz(ivp, alo, ahi)
    if K.mul_u(hh, lip) >= 1.0:
        raise StepRejected(f"h*L = {hh * lip:.3g} >= 1")
    # the trajectory stays in the tube, so the mean of g over the step lies in g(tube)
    gt, _ = tape.evaluate(tlo, thi)
    elo, ehi = [], []
    for r in range(n):
        lo, hi = K.i_add(blo[r], bhi[r], *K.i_mul(hl, hh, *gt[r]))
        lo, hi = max(lo, tlo[r]), min(hi, thi[r])
        elo.append(lo)
        ehi.append(hi)
    if not all(math.isfinite(v) for v in elo + ehi) or _box_width(tlo, thi) > BLOWUP_WIDTH:
        raise BlowUp(f"enclosure of {ivp.name} exceeds width {BLOWUP_WIDTH:g}")
    return elo, ehi, tlo, thi, StepInfo((hl, hh), lip, it)


def _advance(ivp, blo, bhi, t_a: float, t_b: float, depth: int = 0):
    """Integrate from grid time ``t_a`` to ``t_b``, halving on rejection."""
    h = (K.sub_d(t_b, t_a), K.sub_u(t_b, t_a))
    try:
        elo, ehi, tlo, thi, info = step(ivp, blo, bhi, h)
        return elo, ehi, tlo, thi, [info]
    except StepRejected:
        mid = t_a + (t_b - t_a) / 2.0
        if depth >= MAX_HALVINGS or not t_a < mid < t_b:
            raise
    mlo, mhi, t1lo, t1hi, i1 = _advance(ivp, blo, bhi, t_a, mid, depth + 1)
    elo, ehi, t2lo, t2hi, i2 = _advance(ivp, mlo, mhi, mid, t_b, depth + 1)
    tlo = [min(a, b) for a, b in zip(t1lo, t2lo)]
    thi = [max(a, b) for a, b in zip(t1hi, t2hi)]
    return elo, ehi, tlo, thi, i1 + i2


def integrate(ivp: IVP, y0: Sequence[FloatInterval], grid: Sequence[float]) -> FlowEnclosure:
    """Enclose the flow of ``ivp`` from the box ``y0`` on ``grid``.

    ``grid`` holds times relative to ``t0``: it must start at 0, increase
    strictly, and end no later than ``T - t0``.
    """
    if len(y0) != ivp.dim:
        raise ValueError(f"IVP {ivp.name} has dimension {ivp.dim}, initial box has {len(y0)}")
    grid = [float(t) for t in grid]
    if not grid or grid[0] != 0.0:
        raise ValueError("grid must start at 0 (relative to t0)")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    span_hi = fraction_bounds(ivp.T - ivp.t0)[1]
    if grid[-1] > span_hi:
        raise ValueError("grid extends beyond T")
    blo = [iv.lo for iv in y0]
    bhi = [iv.hi for iv in y0]
    start = FloatBox.from_lists(blo, bhi)
    points, tubes, infos = [start], [start], []
    for a, b in zip(grid, grid[1:]):
        blo, bhi, tlo, thi, info = _advance(ivp, blo, bhi, a, b)
        points.append(FloatBox.from_lists(blo, bhi))
        tubes.append(FloatBox.from_lists(tlo, thi))
        infos.extend(info)
    return FlowEnclosure(tuple(grid), tuple(points), tuple(tubes), tuple(infos))


def uniform_grid(span: float, steps: int, extra: Sequence[float] = ()) -> list[float]:
    """``steps`` equal steps over ``[0, span]`` with the ``extra`` times inserted as nodes."""
    nodes = {span * k / steps for k in range(steps)} | {span}
    nodes |= {t for t in extra if 0.0 <= t <= span}
    return sorted(nodes)


def _relative_time(I_t: FloatInterval, t0: Fraction) -> tuple[float, float]:
    lo = fraction_bounds(Fraction(I_t.lo) - t0)[0]
    hi = fraction_bounds(Fraction(I_t.hi) - t0)[1]
    return lo, hi


def ode_extension(ivp: IVP, component: int, I_t: FloatInterval, y0: Sequence[FloatInterval],
                  steps: int | None = None) -> FloatInterval:
    """Enclosure of ``{y_component(t; a) : t in I_t, a in y0}``.

    ``I_t`` is clipped to ``[t0, T]``; the empty interval comes back when
    they do not meet.
    """
    if I_t.is_empty or any(iv.is_empty for iv in y0):
        return FloatInterval.EMPTY
    t0f_lo, t0f_hi = fraction_bounds(ivp.t0)
    T_lo, T_hi = fraction_bounds(ivp.T)
    if I_t.hi < t0f_lo or I_t.lo > T_hi:
        return FloatInterval.EMPTY
    rel_lo, rel_hi = _relative_time(I_t, ivp.t0)
    span = fraction_bounds(ivp.T - ivp.t0)[0]
    rel_lo = max(rel_lo, 0.0)
    rel_hi = min(rel_hi, span)
    if rel_lo > rel_hi:
        # I_t touches [t0, T] only within rounding of an endpoint
        rel_lo = rel_hi = 0.0 if I_t.hi < t0f_hi else span
    key = (tuple(iv.pair() for iv in y0), rel_lo, rel_hi, steps or ivp.steps)
    comps = _extension_all(ivp, key)
    lo, hi = comps[component]
    return FloatInterval(lo, hi)


@lru_cache(maxsize=8192)
def _extension_all(ivp: IVP, key) -> tuple[tuple[float, float], ...]:
    y0_pairs, rel_lo, rel_hi, steps = key
    span = fraction_bounds(ivp.T - ivp.t0)[0]
    y0 = [FloatInterval(lo, hi) for lo, hi in y0_pairs]
    if span == 0.0:
        return tuple(iv.pair() for iv in y0)
    grid = uniform_grid(span, steps, (rel_lo, rel_hi))
    enc = integrate(ivp, y0, grid)
    out = []
    for c in range(ivp.dim):
        lo, hi = math.inf, -math.inf
        for k, t in enumerate(enc.times):
            if rel_lo <= t <= rel_hi:
                iv = enc.points[k][c]
                lo, hi = min(lo, iv.lo), max(hi, iv.hi)
            if k > 0 and rel_lo <= enc.times[k - 1] and t <= rel_hi:
                iv = enc.tubes[k][c]
                lo, hi = min(lo, iv.lo), max(hi, iv.hi)
        out.append((lo, hi))
    return tuple(out)


def ode_prune(I: FloatInterval, ivp: IVP, component: int, I_t: FloatInterval,
              y0: Sequence[FloatInterval], steps: int | None = None) -> FloatInterval:
    """``I`` intersected with :func:`ode_extension`."""
    if I.is_empty:
        return FloatInterval.EMPTY
    return I.meet(ode_extension(ivp, component, I_t, y0, steps))

"""Pruning operators for equality constraints ``f = 0`` relaxed to ``|f| <= delta``.

Every operator here maps a box ``B`` to a box contained in ``B`` (or to the
empty box, ``None``) without discarding any point where ``|f| <= delta``,
and never returns a box on which ``f`` provably misses ``[-delta, delta]``.

* :func:`hc4_revise` - one forward/backward pass over the term tape.
* :func:`box_consistency_narrow` - shave one dimension from both ends by
  bisection search for the outermost consistent slices.
* :func:`prune_fixpoint` - apply an operator to all constraints until no
  interval shrinks by more than the progress threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

from . import _pykernels as K
from .expr import Term, as_fraction, free_vars
from .interval import FloatBox, FloatInterval, fraction_bounds
from .tape import Tape

REL_TOL = 0.01
ABS_TOL = 1e-12
MAX_SWEEPS = 1000
SHAVE_RESOLUTION = 2.0**-12
SHAVE_MAX_EVALS = 400


@dataclass(frozen=True)
class Constraint:
    """``term = 0``, pruned toward the band ``[-delta, delta]``."""

    term: Term
    delta: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if self.delta < 0:
            raise ValueError("constraint band must be non-negative")

    @cached_property
    def band(self) -> tuple[float, float]:
        return fraction_bounds(-self.delta)[0], fraction_bounds(self.delta)[1]

    @cached_property
    def variables(self) -> tuple[int, ...]:
        return tuple(sorted(free_vars(self.term)))

    def tape(self, n_vars: int) -> Tape:
        cache = self.__dict__.setdefault("_tapes", {})
        if n_vars not in cache:
            cache[n_vars] = Tape([self.term], n_vars=n_vars)
        return cache[n_vars]


@dataclass(frozen=True)
class PruneResult:
    box: FloatBox | None  # None is the empty box
    changed: bool

    @property
    def is_empty(self) -> bool:
        return self.box is None


def _result(status: int, lo, hi, box: FloatBox) -> PruneResult:
    if status == 0:
        return PruneResult(None, True)
    new = FloatBox.from_lists(lo, hi)
    return PruneResult(new, new != box)


def _as_box(box) -> FloatBox:
    return box if isinstance(box, FloatBox) else FloatBox(box)


def hc4_revise(box: Sequence[FloatInterval], c: Constraint) -> PruneResult:
    """Forward evaluation, then projection of the band back onto the variables."""
    box = _as_box(box)
    if box.is_empty:
        return PruneResult(None, False)
    tape = c.tape(len(box))
    st, lo, hi = tape.revise(0, box.los(), box.his(), c.band)
    # a narrowed box can still evaluate outside the band; it then holds no solution
    if st == 2 and not _meets(tape, lo, hi, c.band):
        st = 0
    return _result(st, lo, hi, box)


def _meets(tape: Tape, lo: list, hi: list, band) -> bool:
    (r,), _ = tape.evaluate(lo, hi)
    return r[0] <= r[1] and r[0] <= band[1] and r[1] >= band[0]


def box_consistency_narrow(box: Sequence[FloatInterval], c: Constraint, i: int,
                           resolution: float = SHAVE_RESOLUTION,
                           max_evals: int = SHAVE_MAX_EVALS) -> PruneResult:
    """Narrow dimension ``i`` to the hull of its slices on which ``f`` can meet the band.

    Slices are found by depth-first bisection from each end down to
    ``resolution * width``; a slice is dropped only when the natural
    extension over it misses the band.  When the evaluation budget runs
    out the current (sound) bound is kept.
    """
    box = _as_box(box)
    if box.is_empty:
        return PruneResult(None, False)
    tape = c.tape(len(box))
    lo, hi = box.los(), box.his()
    if not _meets(tape, lo, hi, c.band):
        return PruneResult(None, True)
    a0, b0 = lo[i], hi[i]
    if a0 == b0 or not (math.isfinite(a0) and math.isfinite(b0)):
        return PruneResult(box, False)
    tol = (b0 - a0) * resolution
    budget = [max_evals]

    def consistent(a, b):
        budget[0] -= 1
        lo[i], hi[i] = a, b
        return _meets(tape, lo, hi, c.band)

    def search(from_left: bool):
        stack = [(a0, b0)]
        while stack:
            a, b = stack.pop()
            if budget[0] <= 0:
                return a if from_left else b
            if not consistent(a, b):
                continue
            m = a + (b - a) / 2.0
            if b - a <= tol or not a < m < b:
                return a if from_left else b
            if from_left:
                stack.append((m, b))
                stack.append((a, m))
            else:
                stack.append((a, m))
                stack.append((m, b))
        return None

    new_lo = search(True)
    if new_lo is None:
        return PruneResult(None, True)
    new_hi = search(False)
    if new_hi is None or new_hi < new_lo:
        # cannot happen for a sound extension; keep the safe answer
        new_hi = b0
    if budget[0] <= 0:
        lo[i], hi[i] = new_lo, new_hi
        if not _meets(tape, lo, hi, c.band):
            return PruneResult(None, True)
    new_box = box.replace(i, FloatInterval(new_lo, new_hi))
    return PruneResult(new_box, new_box != box)


def box_consistency(box: Sequence[FloatInterval], c: Constraint) -> PruneResult:
    """:func:`box_consistency_narrow` over every variable of ``c``."""
    box = _as_box(box)
    if box.is_empty:
        return PruneResult(None, False)
    if not _meets(c.tape(len(box)), box.los(), box.his(), c.band):
        return PruneResult(None, True)
    changed = False
    for i in c.variables:
        r = box_consistency_narrow(box, c, i)
        if r.is_empty:
            return r
        changed |= r.changed
        box = r.box
    return PruneResult(box, changed)


Operator = Callable[[FloatBox, Constraint], PruneResult]

OPERATORS: dict[str, Operator] = {
    "hc4": hc4_revise,
    "box": box_consistency,
}


def _significant(old: FloatInterval, new: FloatInterval, rel_tol: float, abs_tol: float) -> bool:
    return K._significant(old.lo, old.hi, new.lo, new.hi, rel_tol, abs_tol)


class Pruner:
    """Reusable fixpoint pruner for a fixed constraint list.

    With the HC4 operator the whole fixpoint loop runs inside the kernel.
    """

    def __init__(self, constraints: Sequence[Constraint], n_vars: int, operator: str | Operator = "hc4",
                 rel_tol: float = REL_TOL, abs_tol: float = ABS_TOL, max_sweeps: int = MAX_SWEEPS):
        self.constraints = tuple(constraints)
        self.n_vars = n_vars
        self.operator = operator
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.max_sweeps = max_sweeps
        self.bands = [c.band for c in self.constraints]
        self._tape = Tape([c.term for c in self.constraints], n_vars=n_vars) \
            if operator == "hc4" else None

    def prune_lists(self, lo: list[float], hi: list[float]):
        """Fast path on endpoint lists: returns ``(ok, lo, hi)``."""
        if self._tape is not None:
            st, lo, hi = self._tape.fixpoint(lo, hi, self.bands, self.rel_tol, self.abs_tol,
                                             self.max_sweeps)
            return st != 0, lo, hi
        r = self.prune(FloatBox.from_lists(lo, hi))
        if r.is_empty:
            return False, lo, hi
        return True, r.box.los(), r.box.his()

    def prune(self, box: Sequence[FloatInterval]) -> PruneResult:
        box = _as_box(box)
        if box.is_empty:
            return PruneResult(None, False)
        if self._tape is not None:
            ok, lo, hi = self.prune_lists(box.los(), box.his())
            if not ok:
                return PruneResult(None, True)
            new = FloatBox.from_lists(lo, hi)
            return PruneResult(new, new != box)
        op = OPERATORS[self.operator] if isinstance(self.operator, str) else self.operator
        start = box
        for _ in range(self.max_sweeps):
            before = box
            for c in self.constraints:
                r = op(box, c)
                if r.is_empty:
                    return PruneResult(None, True)
                box = r.box
            if not any(_significant(a, b, self.rel_tol, self.abs_tol) for a, b in zip(before, box)):
                break
        return PruneResult(box, box != start)


def prune_fixpoint(box: Sequence[FloatInterval], cs: Sequence[Constraint], operator: str | Operator = "hc4",
                   rel_tol: float = REL_TOL, abs_tol: float = ABS_TOL,
                   max_sweeps: int = MAX_SWEEPS) -> PruneResult:
    """Iterate ``operator`` over ``cs`` until no interval shrinks significantly.

    Progress is significant when an interval loses more than ``rel_tol`` of
    its width and more than ``abs_tol`` in absolute terms.
    """
    box = _as_box(box)
    return Pruner(cs, len(box), operator, rel_tol, abs_tol, max_sweeps).prune(box)


# -------------------------------------------- deliberately broken operators
# Each violates exactly one of the three pruning requirements; the property
# suites must catch them.


def widening_prune(box: Sequence[FloatInterval], c: Constraint) -> PruneResult:
    """Returns a box larger than its input (not contracting)."""
    box = _as_box(box)
    return PruneResult(FloatBox(FloatInterval(iv.lo - 1.0, iv.hi + 1.0) for iv in box), True)


def corner_prune(box: Sequence[FloatInterval], c: Constraint) -> PruneResult:
    """Collapses the box to its upper corner, whether or not ``f`` can vanish there."""
    box = _as_box(box)
    return PruneResult(FloatBox(FloatInterval(iv.hi, iv.hi) for iv in box), True)


def empty_prune(box: Sequence[FloatInterval], c: Constraint) -> PruneResult:
    """Discards every box."""
    return PruneResult(None, True)


SABOTAGED = {"widening": widening_prune, "corner": corner_prune, "empty": empty_prune}

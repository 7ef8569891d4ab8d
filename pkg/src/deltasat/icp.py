"""Branch-and-prune over a conjunction of equalities.

Two answer modes:

``certificate`` (default)
    Boxes are pruned toward ``|f_i| <= PRUNE_FRACTION * delta``; a box whose
    natural extension puts every ``f_i`` inside ``[-delta, delta]`` is
    returned as a certificate, since every point in it satisfies the
    weakened conjunction.  The gap between the two bands keeps boxes that
    touch the pruning band's edge certifiable once they are narrow, instead
    of being split down to the width floor.
``paper-epsilon``
    Boxes are pruned toward ``f_i = 0`` and any nonempty box narrower than
    ``epsilon`` is accepted.  ``epsilon`` defaults to
    :func:`epsilon_from_delta`, which makes the answer correct for the
    weakening as long as the Lipschitz bounds hold.

In certificate mode each box also has its midpoint tried as a point
witness, and after a split the half whose midpoint has the smaller
residual is explored first.  Neither affects soundness: a point witness is
checked exactly like a box, and exploration order never discards a box.

In both modes ``Unsat`` is only returned when every box was discarded by
pruning, so it is sound for the unweakened conjunction.  In certificate
mode it also means ``max_i |f_i| > PRUNE_FRACTION * delta`` everywhere.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from . import mpinterval
from .errors import NonpositiveDelta, UnboundedDerivative
from .expr import Term, as_fraction, free_vars
from .interval import FloatBox, FloatInterval, fraction_bounds, lipschitz_bound
from .prune import Constraint, Pruner
from .tape import Tape

CERTIFICATE = "certificate"
PAPER_EPSILON = "paper-epsilon"
MODES = (CERTIFICATE, PAPER_EPSILON)
FLOOR_WIDTH = 2.0**-40
PRUNE_FRACTION = Fraction(7, 8)


@dataclass(frozen=True)
class IcpConfig:
    delta: Fraction = Fraction(1, 1000)
    epsilon: Fraction | None = None  # None: derived from delta
    mode: str = CERTIFICATE
    max_boxes: int = 100_000
    branch_rule: str = "largest-first"  # or "round-robin"
    worklist: str = "dfs"  # or "best-first"
    seed: int | None = None  # random tie-breaking among equally wide dimensions
    operator: str = "hc4"
    floor_width: float = FLOOR_WIDTH
    probe: bool = True  # certificate mode: try the midpoint as a point witness, visit better halves first

    def __post_init__(self):
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if self.delta <= 0:
            raise NonpositiveDelta(f"delta must be positive, got {self.delta}")
        if self.epsilon is not None:
            object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
            if self.epsilon <= 0:
                raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.branch_rule not in ("largest-first", "round-robin"):
            raise ValueError(f"unknown branch rule {self.branch_rule!r}")
        if self.worklist not in ("dfs", "best-first"):
            raise ValueError(f"unknown worklist {self.worklist!r}")
        if self.max_boxes < 1:
            raise ValueError("max_boxes must be at least 1")


@dataclass(frozen=True)
class Certificate:
    witness_box: FloatBox
    per_constraint_ranges: tuple[FloatInterval, ...]
    delta: Fraction
    mode: str = CERTIFICATE
    epsilon: Fraction | None = None


@dataclass(frozen=True)
class Unsat:
    boxes: int = 0
    verdict = "unsat"


@dataclass(frozen=True)
class DeltaSat:
    certificate: Certificate
    boxes: int = 0
    verdict = "delta-sat"


@dataclass(frozen=True)
class ResourceOut:
    reason: str = ""
    boxes: int = 0
    verdict = "unknown (resource limit)"


IcpAnswer = Union[Unsat, DeltaSat, ResourceOut]


def epsilon_from_delta(cs: Sequence, B0: Sequence[FloatInterval], delta) -> Fraction:
    """An ``epsilon`` with ``|x - y|_inf < epsilon  =>  |f_i(x) - f_i(y)| < delta`` on ``B0``.

    Uses ``epsilon = min_i delta / (2 * L_i * n)`` where ``L_i`` bounds the
    partial derivatives of ``f_i`` over ``B0``.  Raises
    :class:`UnboundedDerivative` for flow terms or unbounded derivatives.
    """
    delta = as_fraction(delta)
    if delta <= 0:
        raise NonpositiveDelta(f"delta must be positive, got {delta}")
    box = B0 if isinstance(B0, FloatBox) else FloatBox(B0)
    n = max(len(box), 1)
    eps = delta / (2 * n)
    for c in cs:
        t = c.term if isinstance(c, Constraint) else c
        L = lipschitz_bound(t, box)
        if not math.isfinite(L):
            raise UnboundedDerivative(f"derivative bound of {t} is not finite")
        if L > 0:
            eps = min(eps, delta / (2 * Fraction(L) * n))
    return eps


def certificate_check(witness: Sequence[FloatInterval], cs: Sequence, delta, prec: int = 64) -> bool:
    """True iff every ``f_i`` is enclosed in ``[-delta, delta]`` over ``witness``.

    Runs on the multi-precision evaluator, not on the kernels that produced
    the certificate.
    """
    delta = as_fraction(delta)
    box = [(Fraction(iv.lo), Fraction(iv.hi)) for iv in witness]
    if any(lo > hi for lo, hi in box):
        return False
    for c in cs:
        t = c.term if isinstance(c, Constraint) else c
        try:
            lo, hi = mpinterval.enclose_rational(t, box, prec)
        except mpinterval.ZeroDivisor:
            return False
        if lo is None or hi is None or lo < -delta or hi > delta:
            return False
    return True


@dataclass
class _Brancher:
    dims: list[int]
    rule: str
    rng: random.Random | None
    _next: int = field(default=0)

    def choose(self, lo: list[float], hi: list[float], floor: float) -> int | None:
        """Dimension to split, or None when every query dimension is below ``floor``."""
        if self.rule == "round-robin":
            for k in range(len(self.dims)):
                i = self.dims[(self._next + k) % len(self.dims)]
                if hi[i] - lo[i] > floor:
                    self._next = (self._next + k + 1) % len(self.dims)
                    return i
            return None
        best = -1.0
        ties: list[int] = []
        for i in self.dims:
            w = hi[i] - lo[i]
            if w > best:
                best, ties = w, [i]
            elif w == best:
                ties.append(i)
        if best <= floor:
            return None
        if self.rng is not None and len(ties) > 1:
            return self.rng.choice(ties)
        return ties[0]


def _probe_box(lo, hi, dims):
    """The box with every query dimension collapsed to its midpoint."""
    plo, phi = list(lo), list(hi)
    for i in dims:
        m = lo[i] + (hi[i] - lo[i]) / 2.0
        plo[i] = phi[i] = min(max(m, lo[i]), hi[i])
    return plo, phi


def pruning_delta(cfg: IcpConfig) -> Fraction:
    """Half-width of the band boxes are pruned toward."""
    return cfg.delta * PRUNE_FRACTION if cfg.mode == CERTIFICATE else Fraction(0)


def _query_width(lo, hi, dims) -> float:
    return max((hi[i] - lo[i] for i in dims), default=0.0)


def solve_conjunction(cs: Sequence, B0: Sequence[FloatInterval], cfg: IcpConfig | None = None) -> IcpAnswer:
    """Decide ``exists x in B0. AND_i f_i(x) = 0`` up to ``cfg.delta``.

    ``cs`` holds terms or :class:`Constraint` objects; the band of every
    constraint is taken from ``cfg.delta``.  Only variables occurring in
    ``cs`` are split.
    """
    cfg = cfg or IcpConfig()
    box = B0 if isinstance(B0, FloatBox) else FloatBox(B0)
    if box.is_empty:
        raise ValueError("initial box is empty")
    if not all(iv.bounded for iv in box):
        raise ValueError("initial box must be bounded")
    terms = [c.term if isinstance(c, Constraint) else c for c in cs]
    n = len(box)
    certify = cfg.mode == CERTIFICATE
    constraints = [Constraint(t, pruning_delta(cfg)) for t in terms]
    pruner = Pruner(constraints, n, cfg.operator)
    tape = Tape(terms, n_vars=n)
    # outer band for discarding, inner band (doubles inside [-delta, delta]) for accepting
    dlo, dhi = -fraction_bounds(cfg.delta)[1], fraction_bounds(cfg.delta)[1]
    in_hi = fraction_bounds(cfg.delta)[0]
    in_lo = -in_hi
    eps_f = 0.0
    eps = None
    if not certify:
        eps = cfg.epsilon if cfg.epsilon is not None else epsilon_from_delta(terms, box, cfg.delta)
        eps_f = fraction_bounds(eps)[0]
    dims = sorted(set().union(*(free_vars(t) for t in terms))) if terms else []
    brancher = _Brancher(dims, cfg.branch_rule, random.Random(cfg.seed) if cfg.seed is not None else None)

    counter = 0
    start = (box.los(), box.his())
    if cfg.worklist == "dfs":
        stack = [start]
        pop = stack.pop

        def push(item):
            stack.append(item)
    else:
        heap = [(0.0, 0, start)]

        def pop():
            return heapq.heappop(heap)[2]

        def push(item):
            nonlocal counter
            counter += 1
            heapq.heappush(heap, (_query_width(*item, dims), counter, item))
        stack = heap

    probing = certify and cfg.probe

    def inside(ranges) -> bool:
        return all(in_lo <= r[0] and r[1] <= in_hi for r in ranges)

    def certificate(lo, hi, ranges) -> Certificate:
        return Certificate(FloatBox.from_lists(lo, hi), tuple(FloatInterval(*r) for r in ranges), cfg.delta)

    def residual(lo, hi) -> float:
        r, _ = tape.evaluate(*_probe_box(lo, hi, dims))
        return max((max(abs(a), abs(b)) for a, b in r), default=0.0)

    boxes = 0
    stuck = False
    while stack:
        lo, hi = pop()
        boxes += 1
        if boxes > cfg.max_boxes:
            return ResourceOut(f"box budget of {cfg.max_boxes} exhausted", cfg.max_boxes)
        ok, lo, hi = pruner.prune_lists(lo, hi)
        if not ok:
            continue
        ranges, flags = tape.evaluate(lo, hi)
        if certify:
            if any(r[0] > dhi or r[1] < dlo for r in ranges):
                continue
            if not flags and inside(ranges):
                return DeltaSat(certificate(lo, hi, ranges), boxes)
            if probing:
                plo, phi_ = _probe_box(lo, hi, dims)
                pr, pflags = tape.evaluate(plo, phi_)
                if not pflags and inside(pr):
                    return DeltaSat(certificate(plo, phi_, pr), boxes)
        else:
            if any(r[0] > 0.0 or r[1] < 0.0 for r in ranges):
                continue
            if _query_width(lo, hi, dims) < eps_f:
                cert = Certificate(FloatBox.from_lists(lo, hi), tuple(FloatInterval(*r) for r in ranges),
                                   cfg.delta, PAPER_EPSILON, eps)
                return DeltaSat(cert, boxes)
        i = brancher.choose(lo, hi, cfg.floor_width)
        if i is None:
            stuck = True
            continue
        m = lo[i] + (hi[i] - lo[i]) / 2.0
        if not lo[i] < m < hi[i]:
            stuck = True
            continue
        left_hi = list(hi)
        left_hi[i] = m
        right_lo = list(lo)
        right_lo[i] = m
        if probing and residual(right_lo, hi) < residual(lo, left_hi):
            push((lo, left_hi))
            push((right_lo, hi))
        else:
            push((right_lo, hi))
            push((lo, left_hi))
    if stuck:
        return ResourceOut("boxes reached the floor width without a certificate", boxes)
    return Unsat(boxes)


def solve_terms(terms: Sequence[Term], bounds: Sequence, delta, **kw) -> IcpAnswer:
    """Convenience wrapper: ``bounds`` is a list of ``(lo, hi)`` pairs."""
    box = FloatBox(FloatInterval(fraction_bounds(as_fraction(lo))[0], fraction_bounds(as_fraction(hi))[1])
                   for lo, hi in bounds)
    return solve_conjunction(terms, box, IcpConfig(delta=delta, **kw))

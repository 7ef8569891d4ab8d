"""Standard form, delta-weakenings and perturbations.

:func:`to_standard_form` turns the matrix of a bounded existential sentence
into a conjunction of disjunctions of equalities ``f = 0``.  Negations are
pushed into the relations first, the result is distributed into CNF, and
every inequality becomes an equality with a fresh bounded slack variable::

    t >= 0   ~>   t - u = 0,   u in [0, m]
    t >  0   ~>   t - v = 0,   v in (0, m]
    t <  0   ~>  -t - v = 0,   v in (0, m]
    t != 0   ~>  (-t - u = 0  or  t - v = 0),  u, v in (0, m]

``m`` is one more than a rigorous upper bound of the left term over the
closed domain, so the slack can always absorb it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    DimensionMismatch, EmptyInterior, FullLine, NonpositiveDelta, PrecisionUnreachable,
    UnboundedVariable, UndefinedSubterm,
)
from .expr import (
    NEGATED_RELATION, And, Atom, BoundedSigma1, Const, Div, Formula, Not, Or,
    RationalInterval, Sub, Term, Var, as_fraction, decide_abs_le, eval_enclosure, formula_to_sexpr,
    negate, rational_value, subterms, to_sexpr,
)
from .interval import FloatBox, natural_extension

SLACK_PREFIX = "_s"


def nnf(phi: Formula, positive: bool = True) -> Formula:
    """Negation normal form: no ``Not`` remains; negated atoms flip their relation."""
    if isinstance(phi, Atom):
        return phi if positive else Atom(phi.term, NEGATED_RELATION[phi.rel])
    if isinstance(phi, Not):
        return nnf(phi.arg, not positive)
    if isinstance(phi, And):
        args = tuple(nnf(a, positive) for a in phi.args)
        return And(args) if positive else Or(args)
    if isinstance(phi, Or):
        args = tuple(nnf(a, positive) for a in phi.args)
        return Or(args) if positive else And(args)
    raise TypeError(f"not a formula: {phi!r}")


def cnf_clauses(phi: Formula) -> list[list[Atom]]:
    """Clauses of the distributed CNF of an NNF formula (no Tseitin variables)."""
    if isinstance(phi, Atom):
        return [[phi]]
    if isinstance(phi, And):
        out: list[list[Atom]] = []
        for a in phi.args:
            out.extend(cnf_clauses(a))
        return out
    if isinstance(phi, Or):
        acc: list[list[Atom]] = [[]]
        for a in phi.args:
            sub = cnf_clauses(a)
            acc = [c + d for c in acc for d in sub]
        return acc
    raise TypeError(f"expected NNF, got {phi!r}")


@dataclass(frozen=True)
class SlackInfo:
    clause: int
    disjunct: int
    atom: Atom


@dataclass(frozen=True)
class StandardForm:
    """``exists x in bounds. AND_i OR_j clauses[i][j] = 0``.

    Variables ``0..n_original-1`` are the sentence's own; the rest are
    slacks, described by ``slack_map``.
    """

    bounds: tuple[RationalInterval, ...]
    clauses: tuple[tuple[Term, ...], ...]
    names: tuple[str, ...]
    n_original: int
    slack_map: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.bounds)

    def disjuncts(self) -> list[Term]:
        """All disjunct terms in clause-major order (the perturbation index order)."""
        return [t for c in self.clauses for t in c]

    @property
    def matrix(self) -> Formula:
        return And(tuple(Or(tuple(Atom(t, "=") for t in c)) for c in self.clauses))

    def as_sentence(self) -> BoundedSigma1:
        return BoundedSigma1(self.bounds, self.matrix, self.names)

    def __str__(self):
        lines = [f"{nm} in {b}" for nm, b in zip(self.names, self.bounds)]
        lines.append(formula_to_sexpr(self.matrix, self.names))
        return "\n".join(lines)


def _check_bounded(phi: BoundedSigma1) -> None:
    for i, b in enumerate(phi.bounds):
        if not b.bounded:
            raise UnboundedVariable(f"variable {phi.names[i]} has unbounded domain {b}")


def _check_denominators(t: Term, box: FloatBox, names) -> None:
    for s in subterms(t):
        if isinstance(s, Div):
            try:
                d = natural_extension(s.right, box)
            except FullLine:
                d = None
            if d is None or d.lo <= 0.0 <= d.hi:
                raise UndefinedSubterm(
                    f"denominator {to_sexpr(s.right, names)} may vanish on the domain"
                )


def _upper_bound(t: Term, box: FloatBox, names) -> float:
    try:
        hi = natural_extension(t, box).hi
    except FullLine:
        hi = math.inf
    if not math.isfinite(hi):
        raise UndefinedSubterm(f"{to_sexpr(t, names)} has no finite upper bound on the domain")
    return hi


def to_standard_form(phi: BoundedSigma1) -> StandardForm:
    """Equivalent standard form of ``phi`` (equalities only, one slack per inequality)."""
    _check_bounded(phi)
    box = FloatBox.from_bounds([b.closure() for b in phi.bounds])
    clauses_in = cnf_clauses(nnf(phi.matrix))
    bounds = list(phi.bounds)
    names = list(phi.names)
    slack_map: dict[int, SlackInfo] = {}
    out: list[tuple[Term, ...]] = []

    def new_slack(g: Term, strict: bool, ci: int, dj: int, atom: Atom) -> Term:
        m = Fraction(max(math.ceil(_upper_bound(g, box, names)) + 1, 1))
        idx = len(bounds)
        bounds.append(RationalInterval(Fraction(0), m, lo_open=strict))
        names.append(f"{SLACK_PREFIX}{idx - phi.n}")
        slack_map[idx] = SlackInfo(ci, dj, atom)
        return Sub(g, Var(idx))

    for ci, clause in enumerate(clauses_in):
        terms: list[Term] = []
        for atom in clause:
            _check_denominators(atom.term, box, phi.names)
            t, rel = atom.term, atom.rel
            if rel == "=":
                terms.append(t)
            elif rel in (">=", ">"):
                terms.append(new_slack(t, rel == ">", ci, len(terms), atom))
            elif rel in ("<=", "<"):
                terms.append(new_slack(negate(t), rel == "<", ci, len(terms), atom))
            else:  # "!="
                terms.append(new_slack(negate(t), True, ci, len(terms), atom))
                terms.append(new_slack(t, True, ci, len(terms), atom))
        out.append(tuple(terms))
    return StandardForm(tuple(bounds), tuple(out), tuple(names), phi.n, slack_map)


# ----------------------------------------------------------- weakenings


@dataclass(frozen=True)
class DeltaWeakening:
    """Each disjunct ``f = 0`` of ``base`` read as ``|f| <= delta``."""

    base: StandardForm
    delta: Fraction

    @property
    def matrix(self) -> Formula:
        """The weakened matrix as an explicit formula: ``-delta <= f <= delta`` per disjunct."""
        d = Const(self.delta)
        return And(tuple(
            Or(tuple(And((Atom(Sub(t, d), "<="), Atom(Sub(negate(t), d), "<="))) for t in c))
            for c in self.base.clauses
        ))

    def holds_at(self, point: Sequence) -> bool:
        """Exact check of the weakened matrix at ``point`` (a full assignment incl. slacks).

        Bounds are checked on the closure of the domain.
        """
        return weakened_matrix_holds(self.base, self.delta, point)


def delta_weaken(sf: StandardForm, delta) -> DeltaWeakening:
    """``sf`` with every equality relaxed to ``|f| <= delta``.  ``delta = 0`` gives ``sf`` itself."""
    delta = as_fraction(delta)
    if delta < 0:
        raise NonpositiveDelta(f"delta must be non-negative, got {delta}")
    return DeltaWeakening(sf, delta)


def weakened_matrix_holds(sf: StandardForm, delta, point: Sequence) -> bool:
    delta = as_fraction(delta)
    if len(point) != sf.n:
        raise DimensionMismatch(f"point has {len(point)} coordinates, form has {sf.n}")
    if not all(p in b.closure() for p, b in zip(point, sf.bounds)):
        return False
    return all(any(_abs_le(t, point, delta) for t in c) for c in sf.clauses)


def _abs_le(t: Term, point: Sequence, delta: Fraction) -> bool:
    v = rational_value(t, point)
    return abs(v) <= delta if v is not None else decide_abs_le(t, point, delta)


@dataclass(frozen=True)
class Perturbation:
    """One rational per disjunct, in clause-major order."""

    c: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(as_fraction(v) for v in self.c))

    @property
    def norm(self) -> Fraction:
        return max((abs(v) for v in self.c), default=Fraction(0))


def apply_perturbation(sf: StandardForm, c: Perturbation, delta=None) -> StandardForm:
    """The ``c``-perturbed form: disjunct ``f = 0`` becomes ``f - c = 0``."""
    if len(c.c) != len(sf.disjuncts()):
        raise DimensionMismatch(f"perturbation has {len(c.c)} entries, form has {len(sf.disjuncts())} disjuncts")
    if delta is not None and c.norm > as_fraction(delta):
        raise ValueError(f"perturbation norm {c.norm} exceeds delta {delta}")
    it = iter(c.c)
    clauses = []
    for clause in sf.clauses:
        new = []
        for t in clause:
            v = next(it)
            new.append(t if v == 0 else Sub(t, Const(v)))
        clauses.append(tuple(new))
    return StandardForm(sf.bounds, tuple(clauses), sf.names, sf.n_original, sf.slack_map)


# -------------------------------------------------- closure and interior


def _with_bounds(phi, bounds):
    if isinstance(phi, StandardForm):
        return StandardForm(tuple(bounds), phi.clauses, phi.names, phi.n_original, phi.slack_map)
    return BoundedSigma1(tuple(bounds), phi.matrix, phi.names)


def closure(phi):
    """Same matrix over the closed domain."""
    return _with_bounds(phi, [b.closure() for b in phi.bounds])


def interior(phi):
    """Same matrix over the open domain; :class:`EmptyInterior` if some interval is a point."""
    for name, b in zip(phi.names, phi.bounds):
        if b.degenerate:
            raise EmptyInterior(f"domain of {name} is the single point {b.lo}")
    return _with_bounds(phi, [b.interior() for b in phi.bounds])


# --------------------------------------------------- exact point checks


def sign_at(t: Term, point: Sequence, max_precision: int = 4096) -> int:
    """Sign of ``t(point)``.

    Transcendental-free terms are evaluated exactly; otherwise a zero is
    recognized only when the enclosure collapses.
    """
    v = rational_value(t, point)
    if v is not None:
        return (v > 0) - (v < 0)
    bits = 16
    while True:
        try:
            lo, hi = eval_enclosure(t, point, bits, max_precision)
        except PrecisionUnreachable:
            raise PrecisionUnreachable(f"sign of {to_sexpr(t)} is undecidable at this precision") from None
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        if lo == hi == 0:
            return 0
        bits *= 2


_REL_TEST = {
    "<": lambda s: s < 0,
    "<=": lambda s: s <= 0,
    ">": lambda s: s > 0,
    ">=": lambda s: s >= 0,
    "=": lambda s: s == 0,
    "!=": lambda s: s != 0,
}


def formula_holds(phi: Formula, point: Sequence) -> bool:
    """Exact truth value of a quantifier-free formula at a rational point."""
    if isinstance(phi, Atom):
        return _REL_TEST[phi.rel](sign_at(phi.term, point))
    if isinstance(phi, Not):
        return not formula_holds(phi.arg, point)
    if isinstance(phi, And):
        return all(formula_holds(a, point) for a in phi.args)
    if isinstance(phi, Or):
        return any(formula_holds(a, point) for a in phi.args)
    raise TypeError(f"not a formula: {phi!r}")


def sentence_holds_at(phi: BoundedSigma1, point: Sequence) -> bool:
    """``point`` lies in ``dom(phi)`` and satisfies the matrix."""
    return all(p in b for p, b in zip(point, phi.bounds)) and formula_holds(phi.matrix, point)


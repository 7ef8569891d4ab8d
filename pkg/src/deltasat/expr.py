"""Terms, quantifier-free formulas and bounded existential sentences.

Everything here is exact: constants and interval endpoints are
:class:`fractions.Fraction`.  Floating point only shows up once a term is
handed to :mod:`deltasat.interval` or :mod:`deltasat.tape`.

Terms compose with the usual Python operators::

    >>> x, y = Var(0), Var(1)
    >>> free_vars(x - y**2)
    frozenset({0, 1})
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterator, Mapping, Sequence

from .errors import DeltaSatError

if TYPE_CHECKING:  # pragma: no cover
    from .odes import IVP

RELATIONS = ("<", "<=", ">", ">=", "=", "!=")

# relation of Not(t rel 0)
NEGATED_RELATION = {
    "<": ">=",
    "<=": ">",
    ">": "<=",
    ">=": "<",
    "=": "!=",
    "!=": "=",
}


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # floats are exact binary rationals; go through repr to keep decimals readable
        return Fraction(repr(value))
    return Fraction(value)


def as_term(value) -> "Term":
    if isinstance(value, Term):
        return value
    return Const(as_fraction(value))


class Term:
    """Base class of the term AST.  Subclasses are frozen dataclasses."""

    __slots__ = ()

    def __add__(self, other):
        return Add(self, as_term(other))

    def __radd__(self, other):
        return Add(as_term(other), self)

    def __sub__(self, other):
        return Sub(self, as_term(other))

    def __rsub__(self, other):
        return Sub(as_term(other), self)

    def __mul__(self, other):
        return Mul(self, as_term(other))

    def __rmul__(self, other):
        return Mul(as_term(other), self)

    def __truediv__(self, other):
        return Div(self, as_term(other))

    def __rtruediv__(self, other):
        return Div(as_term(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n):
        return Pow(self, n)

    def children(self) -> tuple["Term", ...]:
        return ()

    def __str__(self):
        return to_sexpr(self)


@dataclass(frozen=True, repr=False)
class Var(Term):
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("variable index must be non-negative")

    def __repr__(self):
        return f"Var({self.index})"


@dataclass(frozen=True, repr=False)
class Const(Term):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))

    def __repr__(self):
        return f"Const({self.value})"


@dataclass(frozen=True, repr=False)
class _Unary(Term):
    arg: Term

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"{type(self).__name__}({self.arg!r})"


@dataclass(frozen=True, repr=False)
class _Binary(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


class Neg(_Unary):
    pass


class Exp(_Unary):
    pass


class Sin(_Unary):
    pass


class Cos(_Unary):
    pass


class Abs(_Unary):
    pass


class Add(_Binary):
    pass


class Sub(_Binary):
    pass


class Mul(_Binary):
    pass


class Div(_Binary):
    pass


class Min(_Binary):
    pass


class Max(_Binary):
    pass


@dataclass(frozen=True, repr=False)
class Pow(Term):
    base: Term
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or isinstance(self.exponent, bool) or self.exponent < 1:
            raise ValueError(f"Pow exponent must be a positive integer, got {self.exponent!r}")

    def children(self):
        return (self.base,)

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exponent})"


@dataclass(frozen=True, repr=False)
class Flow(Term):
    """Component ``component`` of the solution of ``ivp`` at absolute time
    ``time`` starting from the initial state ``init``."""

    ivp: "IVP"
    component: int
    time: Term
    init: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "init", tuple(self.init))
        if len(self.init) != self.ivp.dim:
            raise ValueError(
                f"flow {self.ivp.name!r} expects {self.ivp.dim} initial values, got {len(self.init)}"
            )
        if not 0 <= self.component < self.ivp.dim:
            raise ValueError(f"flow component {self.component} out of range")

    def children(self):
        return (self.time,) + self.init

    def __repr__(self):
        return f"Flow({self.ivp.name}, {self.component}, {self.time!r}, {self.init!r})"


UNARY_TYPES = {"neg": Neg, "exp": Exp, "sin": Sin, "cos": Cos, "abs": Abs}
BINARY_TYPES = {"+": Add, "-": Sub, "*": Mul, "/": Div, "min": Min, "max": Max}


# ---------------------------------------------------------------- formulas


class Formula:
    __slots__ = ()

    def __str__(self):
        return formula_to_sexpr(self)


@dataclass(frozen=True)
class Atom(Formula):
    """``term rel 0``."""

    term: Term
    rel: str

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


TRUE = And(())
FALSE = Or(())


def implies(a: Formula, b: Formula) -> Formula:
    return Or((Not(a), b))


# ------------------------------------------------------------------ domains


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction | None  # None encodes -inf
    hi: Fraction | None  # None encodes +inf
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if self.lo is not None:
            object.__setattr__(self, "lo", as_fraction(self.lo))
        if self.hi is not None:
            object.__setattr__(self, "hi", as_fraction(self.hi))
        if self.lo is not None and self.hi is not None:
            if self.lo > self.hi:
                raise ValueError(f"empty interval: lo {self.lo} > hi {self.hi}")
            if self.lo == self.hi and (self.lo_open or self.hi_open):
                raise ValueError("half-open degenerate interval is empty")

    @classmethod
    def closed(cls, lo, hi) -> "RationalInterval":
        return cls(as_fraction(lo), as_fraction(hi))

    @property
    def bounded(self) -> bool:
        return self.lo is not None and self.hi is not None

    @property
    def degenerate(self) -> bool:
        return self.bounded and self.lo == self.hi

    def closure(self) -> "RationalInterval":
        return RationalInterval(self.lo, self.hi, False, False)

    def interior(self) -> "RationalInterval":
        return RationalInterval(self.lo, self.hi, True, True)

    def __contains__(self, x) -> bool:
        x = as_fraction(x)
        if self.lo is not None and (x < self.lo or (self.lo_open and x == self.lo)):
            return False
        if self.hi is not None and (x > self.hi or (self.hi_open and x == self.hi)):
            return False
        return True

    def __str__(self):
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        lo = "-inf" if self.lo is None else str(self.lo)
        hi = "+inf" if self.hi is None else str(self.hi)
        return f"{left}{lo}, {hi}{right}"


@dataclass(frozen=True)
class BoundedSigma1:
    """``exists x_0 in I_0 ... x_{n-1} in I_{n-1}. matrix``."""

    bounds: tuple[RationalInterval, ...]
    matrix: Formula
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple(self.bounds))
        names = tuple(self.names) or tuple(f"x{i}" for i in range(len(self.bounds)))
        object.__setattr__(self, "names", names)
        if len(names) != len(self.bounds):
            raise ValueError("names and bounds differ in length")
        used = formula_free_vars(self.matrix)
        if used and max(used) >= len(self.bounds):
            raise ValueError(f"matrix mentions x{max(used)} but only {len(self.bounds)} bounds given")

    @property
    def n(self) -> int:
        return len(self.bounds)


# --------------------------------------------------------------- traversal


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk over ``t`` (iterative, so deep terms are fine)."""
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        stack.extend(reversed(s.children()))


def free_vars(t: Term) -> frozenset[int]:
    return frozenset(s.index for s in subterms(t) if isinstance(s, Var))


def has_flow(t: Term) -> bool:
    return any(isinstance(s, Flow) for s in subterms(t))


def atoms(phi: Formula) -> Iterator[Atom]:
    if isinstance(phi, Atom):
        yield phi
    elif isinstance(phi, (And, Or)):
        for a in phi.args:
            yield from atoms(a)
    elif isinstance(phi, Not):
        yield from atoms(phi.arg)
    else:
        raise TypeError(f"not a formula: {phi!r}")


def formula_free_vars(phi: Formula) -> frozenset[int]:
    out: set[int] = set()
    for a in atoms(phi):
        out |= free_vars(a.term)
    return frozenset(out)


def map_term(t: Term, fn) -> Term:
    """Bottom-up rebuild; ``fn(node, new_children)`` returns the new node or None to keep
    the default reconstruction."""
    new_children = tuple(map_term(c, fn) for c in t.children())
    out = fn(t, new_children)
    if out is not None:
        return out
    if not new_children:
        return t
    return _rebuild(t, new_children)


def _rebuild(t: Term, kids: tuple[Term, ...]) -> Term:
    if isinstance(t, _Unary):
        return type(t)(kids[0])
    if isinstance(t, _Binary):
        return type(t)(kids[0], kids[1])
    if isinstance(t, Pow):
        return Pow(kids[0], t.exponent)
    if isinstance(t, Flow):
        return Flow(t.ivp, t.component, kids[0], kids[1:])
    raise TypeError(f"cannot rebuild {t!r}")


def substitute(t: Term, mapping: Mapping[int, Term]) -> Term:
    """Replace ``Var(i)`` by ``mapping[i]``; unmapped variables stay."""

    def fn(node, kids):
        if isinstance(node, Var):
            return mapping.get(node.index, node)
        return None

    return map_term(t, fn)


def map_formula_terms(phi: Formula, fn) -> Formula:
    if isinstance(phi, Atom):
        return Atom(fn(phi.term), phi.rel)
    if isinstance(phi, And):
        return And(tuple(map_formula_terms(a, fn) for a in phi.args))
    if isinstance(phi, Or):
        return Or(tuple(map_formula_terms(a, fn) for a in phi.args))
    if isinstance(phi, Not):
        return Not(map_formula_terms(phi.arg, fn))
    raise TypeError(f"not a formula: {phi!r}")


def negate(t: Term) -> Term:
    """``-t`` with the two obvious simplifications, so that ``-(a - b)`` reads ``b - a``."""
    if isinstance(t, Neg):
        return t.arg
    if isinstance(t, Sub):
        return Sub(t.right, t.left)
    if isinstance(t, Const):
        return Const(-t.value)
    return Neg(t)


# ---------------------------------------------------------------- printing


def _fmt_const(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def to_sexpr(t: Term, names: Sequence[str] | None = None) -> str:
    def name(i):
        if names is not None and i < len(names):
            return names[i]
        return f"x{i}"

    def go(s: Term) -> str:
        if isinstance(s, Var):
            return name(s.index)
        if isinstance(s, Const):
            return _fmt_const(s.value)
        if isinstance(s, Neg):
            return f"(- {go(s.arg)})"
        if isinstance(s, _Unary):
            return f"({type(s).__name__.lower()} {go(s.arg)})"
        if isinstance(s, _Binary):
            op = {Add: "+", Sub: "-", Mul: "*", Div: "/", Min: "min", Max: "max"}[type(s)]
            return f"({op} {go(s.left)} {go(s.right)})"
        if isinstance(s, Pow):
            return f"(pow {go(s.base)} {s.exponent})"
        if isinstance(s, Flow):
            comp = s.ivp.var_names[s.component]
            args = " ".join(go(a) for a in s.init)
            return f"(flow {s.ivp.name} {comp} {go(s.time)} {args})"
        raise TypeError(f"unknown term {s!r}")

    return go(t)


def formula_to_sexpr(phi: Formula, names: Sequence[str] | None = None) -> str:
    if isinstance(phi, Atom):
        return f"({phi.rel} {to_sexpr(phi.term, names)} 0)"
    if isinstance(phi, And):
        if not phi.args:
            return "true"
        return "(and " + " ".join(formula_to_sexpr(a, names) for a in phi.args) + ")"
    if isinstance(phi, Or):
        if not phi.args:
            return "false"
        return "(or " + " ".join(formula_to_sexpr(a, names) for a in phi.args) + ")"
    if isinstance(phi, Not):
        return f"(not {formula_to_sexpr(phi.arg, names)})"
    raise TypeError(f"not a formula: {phi!r}")


# -------------------------------------------------------------- evaluation


def eval_point(t: Term, point: Sequence, bits: int = 53, max_precision: int = 4096) -> Fraction:
    """Rational ``r`` with ``|r - t(point)| < 2**-bits``.

    The term is evaluated with multi-precision interval arithmetic at the
    degenerate box ``point``; working precision doubles until the enclosure
    is narrower than ``2**-bits``.

    Raises :class:`NondefinedAtPoint` if a denominator encloses zero at every
    working precision and :class:`PrecisionUnreachable` once the working
    precision would exceed ``max_precision`` bits.
    """
    lo, hi = eval_enclosure(t, point, bits, max_precision)
    return (lo + hi) / 2


def rational_value(t: Term, point: Sequence) -> Fraction | None:
    """Exact value of ``t(point)`` when ``t`` has no transcendental or flow subterm, else None."""
    from .errors import NondefinedAtPoint

    if isinstance(t, Var):
        return as_fraction(point[t.index])
    if isinstance(t, Const):
        return t.value
    if isinstance(t, (Exp, Sin, Cos, Flow)):
        return None
    kids = []
    for c in t.children():
        v = rational_value(c, point)
        if v is None:
            return None
        kids.append(v)
    if isinstance(t, Neg):
        return -kids[0]
    if isinstance(t, Abs):
        return abs(kids[0])
    if isinstance(t, Pow):
        return kids[0] ** t.exponent
    a, b = kids
    if isinstance(t, Div):
        if b == 0:
            raise NondefinedAtPoint(f"division by zero in {to_sexpr(t)}")
        return a / b
    op = {Add: lambda: a + b, Sub: lambda: a - b, Mul: lambda: a * b, Min: lambda: min(a, b),
          Max: lambda: max(a, b)}[type(t)]
    return op()


def eval_enclosure(t: Term, point: Sequence, bits: int = 53, max_precision: int = 4096):
    """Rational enclosure ``(lo, hi)`` of ``t(point)`` of width below ``2**-bits``."""
    from . import mpinterval
    from .errors import NondefinedAtPoint, PrecisionUnreachable

    box = [(as_fraction(p), as_fraction(p)) for p in point]
    target = Fraction(1, 1 << bits) if bits >= 0 else Fraction(1 << -bits)
    prec = max(64, bits + 32)
    last_error: DeltaSatError | None = None
    while prec <= max_precision:
        try:
            lo, hi = mpinterval.enclose_rational(t, box, prec, max_width=target)
        except mpinterval.ZeroDivisor as exc:
            if exc.exact:
                raise NondefinedAtPoint(f"division by zero in {to_sexpr(t)}") from None
            last_error = NondefinedAtPoint(f"denominator encloses zero in {to_sexpr(t)}")
        else:
            if lo is not None and hi is not None and hi - lo < target:
                return lo, hi
        prec *= 2
    if last_error is not None:
        raise last_error
    raise PrecisionUnreachable(f"could not reach 2^-{bits} within {max_precision} bits")


def decide_abs_le(t: Term, point: Sequence, bound: Fraction, max_precision: int = 4096) -> bool:
    """Decide ``|t(point)| <= bound`` by refining the enclosure until it is settled.

    An exact tie can only be settled when the enclosure collapses to a point;
    otherwise :class:`PrecisionUnreachable` is raised.
    """
    from .errors import PrecisionUnreachable

    bound = as_fraction(bound)
    bits = 16
    while True:
        try:
            lo, hi = eval_enclosure(t, point, bits, max_precision)
        except PrecisionUnreachable:
            raise PrecisionUnreachable(f"|t| <= {bound} is undecidable at this precision") from None
        if -bound <= lo and hi <= bound:
            return True
        if hi < -bound or lo > bound:
            return False
        bits *= 2


# ---------------------------------------------------------- differentiation


class NotDifferentiable(DeltaSatError):
    """Raised by :func:`diff` for abs/min/max/flow, which have no symbolic derivative here."""


def _is_zero(t: Term) -> bool:
    return isinstance(t, Const) and t.value == 0


def _is_one(t: Term) -> bool:
    return isinstance(t, Const) and t.value == 1


def _mul(a: Term, b: Term) -> Term:
    if _is_zero(a) or _is_zero(b):
        return Const(0)
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    return Mul(a, b)


def _add(a: Term, b: Term) -> Term:
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return Add(a, b)


def _sub(a: Term, b: Term) -> Term:
    if _is_zero(b):
        return a
    if _is_zero(a):
        return negate(b)
    return Sub(a, b)


def diff(t: Term, i: int) -> Term:
    """Symbolic partial derivative of ``t`` with respect to ``Var(i)``."""
    memo: dict[int, Term] = {}

    def go(s: Term) -> Term:
        key = id(s)
        if key not in memo:
            memo[key] = _d(s)
        return memo[key]

    def _d(s: Term) -> Term:
        if isinstance(s, Var):
            return Const(1 if s.index == i else 0)
        if isinstance(s, Const):
            return Const(0)
        if i not in free_vars(s):
            return Const(0)
        if isinstance(s, Neg):
            d = go(s.arg)
            return Const(0) if _is_zero(d) else negate(d)
        if isinstance(s, Add):
            return _add(go(s.left), go(s.right))
        if isinstance(s, Sub):
            return _sub(go(s.left), go(s.right))
        if isinstance(s, Mul):
            return _add(_mul(go(s.left), s.right), _mul(s.left, go(s.right)))
        if isinstance(s, Div):
            num = _sub(_mul(go(s.left), s.right), _mul(s.left, go(s.right)))
            return Const(0) if _is_zero(num) else Div(num, Pow(s.right, 2))
        if isinstance(s, Pow):
            n = s.exponent
            inner = Const(1) if n == 1 else s.base if n == 2 else Pow(s.base, n - 1)
            inner = _mul(Const(n), inner)
            return _mul(inner, go(s.base))
        if isinstance(s, Exp):
            return _mul(s, go(s.arg))
        if isinstance(s, Sin):
            return _mul(Cos(s.arg), go(s.arg))
        if isinstance(s, Cos):
            d = go(s.arg)
            return Const(0) if _is_zero(d) else _mul(Neg(Sin(s.arg)), d)
        raise NotDifferentiable(f"no symbolic derivative for {type(s).__name__}")

    return go(t)

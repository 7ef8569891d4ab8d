"""Reader for the s-expression problem format.

A problem file declares bounded variables and ODEs, asserts formulas and
optionally sets solver options::

    (declare-var x Real [-1, 1])
    (declare-ivp decay (vars y) (field (- y)) (time 0 1))
    (assert (or (>= (- (exp z) x) 0) (< y (sin x))))
    (set-delta 1/100)

Open interval ends are written with the bracket turned outward, as in
``]0, 3]``.  A transition system uses ``declare-state`` instead of ``declare-var`` and
``init``/``trans``/``unsafe``/``invariant`` instead of ``assert``; inside
``trans`` the primed name ``x'`` refers to the successor state.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import MissingBounds, ParseError, UndeclaredVariable
from ..expr import (
    TRUE, Abs, Add, And, Atom, BoundedSigma1, Const, Cos, Div, Exp, Flow, Formula, Max, Min, Mul,
    Neg, Not, Or, Pow, RationalInterval, Sin, Sub, Term, Var, implies,
)
from ..odes import IVP

MODES = ("certificate", "paper-epsilon")
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?(/\d+)?$")
_TOKEN = re.compile(r"\s+|;[^\n]*|[()\[\],]|[^\s()\[\],;]+")


@dataclass(frozen=True)
class Tok:
    text: str
    line: int
    col: int


@dataclass
class SExpr:
    items: list
    line: int
    col: int


@dataclass(frozen=True)
class TransitionSystem:
    """States ``0..k-1``; in ``trans`` indices ``k..2k-1`` are the primed copies."""

    names: tuple[str, ...]
    bounds: tuple[RationalInterval, ...]
    init: Formula
    trans: Formula
    unsafe: Formula
    inv: Formula | None = None

    @property
    def k(self) -> int:
        return len(self.names)


@dataclass
class ProblemFile:
    names: list[str] = field(default_factory=list)
    bounds: list[RationalInterval] = field(default_factory=list)
    ivps: dict[str, IVP] = field(default_factory=dict)
    assertions: list[Formula] = field(default_factory=list)
    delta: Fraction | None = None
    epsilon: Fraction | None = None
    mode: str | None = None
    system: TransitionSystem | None = None

    def sentence(self) -> BoundedSigma1:
        """The conjunction of all assertions as a bounded existential sentence."""
        if self.system is not None:
            raise ValueError("a transition system has no single sentence; use bmc or invcheck")
        matrix = self.assertions[0] if len(self.assertions) == 1 else And(tuple(self.assertions))
        return BoundedSigma1(tuple(self.bounds), matrix, tuple(self.names))


def tokenize(text: str) -> list[Tok]:
    out = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        s = m.group(0)
        if not s.isspace() and not s.startswith(";"):
            out.append(Tok(s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    return out


def read_sexprs(text: str) -> list[SExpr]:
    toks = tokenize(text)
    top: list = []
    stack: list[SExpr] = []
    for t in toks:
        if t.text == "(":
            stack.append(SExpr([], t.line, t.col))
        elif t.text == ")":
            if not stack:
                raise ParseError("unexpected ')'", t.line, t.col)
            done = stack.pop()
            (stack[-1].items if stack else top).append(done)
        else:
            if not stack:
                raise ParseError(f"unexpected {t.text!r} at top level", t.line, t.col)
            stack[-1].items.append(t)
    if stack:
        s = stack[-1]
        raise ParseError("unclosed '('", s.line, s.col)
    return top


def parse_number(tok) -> Fraction | None:
    if isinstance(tok, Tok) and _NUMBER.match(tok.text):
        try:
            return Fraction(tok.text)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad number {tok.text!r}", tok.line, tok.col) from None
    return None


def _pos(x):
    return x.line, x.col


def _sym(x, what="symbol") -> str:
    if not isinstance(x, Tok):
        raise ParseError(f"expected {what}, got a list", *_pos(x))
    return x.text


def _head(s) -> str | None:
    if isinstance(s, SExpr) and s.items and isinstance(s.items[0], Tok):
        return s.items[0].text
    return None


class _Scope:
    """Name resolution for terms; Var objects are shared per index."""

    def __init__(self, names: dict[str, int], ivps: dict[str, IVP]):
        self.names = names
        self.ivps = ivps
        self._vars: dict[int, Var] = {}

    def var(self, i: int) -> Var:
        if i not in self._vars:
            self._vars[i] = Var(i)
        return self._vars[i]


_UNARY = {"exp": Exp, "sin": Sin, "cos": Cos, "abs": Abs}
_FOLD = {"+": Add, "*": Mul, "min": Min, "max": Max}
_RELS = ("<", "<=", ">", ">=", "=", "!=")


def parse_term(s, scope: _Scope) -> Term:
    if isinstance(s, Tok):
        q = parse_number(s)
        if q is not None:
            return Const(q)
        if s.text in scope.names:
            return scope.var(scope.names[s.text])
        raise UndeclaredVariable(f"undeclared variable {s.text!r}", s.line, s.col)
    if not s.items:
        raise ParseError("empty term", *_pos(s))
    op = _head(s)
    if op is None:
        raise ParseError("expected an operator", *_pos(s))
    args = s.items[1:]

    def need(n):
        if len(args) != n:
            raise ParseError(f"{op} expects {n} argument(s), got {len(args)}", *_pos(s))

    if op in _UNARY:
        need(1)
        return _UNARY[op](parse_term(args[0], scope))
    if op in _FOLD:
        if len(args) < 2:
            raise ParseError(f"{op} expects at least 2 arguments", *_pos(s))
        terms = [parse_term(a, scope) for a in args]
        out = terms[0]
        for t in terms[1:]:
            out = _FOLD[op](out, t)
        return out
    if op == "-":
        if not args:
            raise ParseError("- expects arguments", *_pos(s))
        terms = [parse_term(a, scope) for a in args]
        if len(terms) == 1:
            return Neg(terms[0])
        out = terms[0]
        for t in terms[1:]:
            out = Sub(out, t)
        return out
    if op == "/":
        need(2)
        return Div(parse_term(args[0], scope), parse_term(args[1], scope))
    if op == "pow":
        need(2)
        n = parse_number(args[1])
        if n is None or n.denominator != 1 or n < 1:
            raise ParseError("pow expects a positive integer exponent", *_pos(s))
        return Pow(parse_term(args[0], scope), int(n))
    if op == "flow":
        if len(args) < 3:
            raise ParseError("flow expects an IVP name, a component, a time and initial values", *_pos(s))
        name = _sym(args[0], "IVP name")
        if name not in scope.ivps:
            raise ParseError(f"unknown IVP {name!r}", *_pos(args[0]))
        ivp = scope.ivps[name]
        comp_tok = args[1]
        comp_num = parse_number(comp_tok)
        if comp_num is not None and comp_num.denominator == 1 and 0 <= comp_num < ivp.dim:
            comp = int(comp_num)
        elif isinstance(comp_tok, Tok) and comp_tok.text in ivp.var_names:
            comp = ivp.var_names.index(comp_tok.text)
        else:
            raise ParseError(f"bad component for IVP {name!r}", *_pos(comp_tok))
        init = args[3:]
        if len(init) != ivp.dim:
            raise ParseError(f"IVP {name!r} needs {ivp.dim} initial values, got {len(init)}", *_pos(s))
        return Flow(ivp, comp, parse_term(args[2], scope), tuple(parse_term(a, scope) for a in init))
    raise ParseError(f"unknown function symbol {op!r}", *_pos(s))


def parse_formula(s, scope: _Scope) -> Formula:
    if isinstance(s, Tok):
        if s.text == "true":
            return TRUE
        if s.text == "false":
            return Or(())
        raise ParseError(f"expected a formula, got {s.text!r}", s.line, s.col)
    op = _head(s)
    args = s.items[1:]
    if op in _RELS:
        if len(args) != 2:
            raise ParseError(f"{op} expects 2 arguments", *_pos(s))
        left = parse_term(args[0], scope)
        rz = parse_number(args[1])
        if rz == 0:
            return Atom(left, op)
        return Atom(Sub(left, parse_term(args[1], scope)), op)
    if op in ("and", "or"):
        parts = tuple(parse_formula(a, scope) for a in args)
        return And(parts) if op == "and" else Or(parts)
    if op == "not":
        if len(args) != 1:
            raise ParseError("not expects 1 argument", *_pos(s))
        return Not(parse_formula(args[0], scope))
    if op == "=>":
        if len(args) != 2:
            raise ParseError("=> expects 2 arguments", *_pos(s))
        return implies(parse_formula(args[0], scope), parse_formula(args[1], scope))
    if op is None:
        raise ParseError("expected a formula", *_pos(s))
    raise ParseError(f"unknown connective or relation {op!r}", *_pos(s))


def _parse_bounds(items, where) -> RationalInterval:
    """``[lo, hi]``; a bracket turned outward (``]lo, hi[``) marks an open end."""
    toks = [t for t in items if not (isinstance(t, Tok) and t.text == ",")]
    if not toks:
        raise MissingBounds("variable declared without bounds", *where)
    if len(toks) != 4 or not all(isinstance(t, Tok) for t in toks) or toks[0].text not in ("[", "]") \
            or toks[3].text not in ("[", "]"):
        raise ParseError("bounds must look like [lo, hi]", *where)
    lo, hi = parse_number(toks[1]), parse_number(toks[2])
    if lo is None or hi is None:
        raise MissingBounds("bounds must be finite rational numbers", *where)
    if lo > hi:
        raise ParseError(f"empty bounds [{lo}, {hi}]", *where)
    try:
        return RationalInterval(lo, hi, toks[0].text == "]", toks[3].text == "[")
    except ValueError as exc:
        raise ParseError(str(exc), *where) from None


def _parse_ivp(s: SExpr) -> IVP:
    args = s.items[1:]
    if not args:
        raise ParseError("declare-ivp needs a name", *_pos(s))
    name = _sym(args[0], "IVP name")
    names: list[str] = []
    fields = None
    t0, T = Fraction(0), Fraction(1)
    steps = None
    for part in args[1:]:
        h = _head(part)
        if h == "vars":
            names = [_sym(t) for t in part.items[1:]]
        elif h == "field":
            fields = part.items[1:]
        elif h == "time":
            if len(part.items) != 3:
                raise ParseError("time expects t0 and T", *_pos(part))
            t0, T = parse_number(part.items[1]), parse_number(part.items[2])
            if t0 is None or T is None or t0 > T:
                raise ParseError("time bounds must be rationals with t0 <= T", *_pos(part))
        elif h == "steps":
            n = parse_number(part.items[1]) if len(part.items) == 2 else None
            if n is None or n.denominator != 1 or n < 1:
                raise ParseError("steps expects a positive integer", *_pos(part))
            steps = int(n)
        else:
            raise ParseError(f"unknown IVP clause {h!r}", *_pos(part))
    if fields is None or not names:
        raise ParseError(f"IVP {name!r} needs vars and field", *_pos(s))
    if len(fields) != len(names):
        raise ParseError(f"IVP {name!r} has {len(names)} vars but {len(fields)} field components", *_pos(s))
    scope = _Scope({n: i for i, n in enumerate(names)}, {})
    terms = tuple(parse_term(f, scope) for f in fields)
    kw = {"steps": steps} if steps is not None else {}
    return IVP(name, terms, t0, T, tuple(names), **kw)


def parse(text: str) -> ProblemFile:
    """Parse a problem file; errors carry 1-based line and column."""
    pf = ProblemFile()
    index: dict[str, int] = {}
    state_decls = False
    sys_parts: dict[str, list] = {"init": [], "trans": [], "unsafe": [], "invariant": []}
    raw_asserts = []
    for s in read_sexprs(text):
        h = _head(s)
        where = _pos(s)
        if h in ("declare-var", "declare-state"):
            if len(s.items) < 3:
                raise ParseError(f"{h} expects a name and a sort", *where)
            name = _sym(s.items[1], "variable name")
            if name in index:
                raise ParseError(f"variable {name!r} declared twice", *where)
            if name.endswith("'"):
                raise ParseError("variable names may not end with a prime", *where)
            if _sym(s.items[2], "sort") != "Real":
                raise ParseError("only the sort Real is supported", *_pos(s.items[2]))
            if h == "declare-state":
                state_decls = True
            b = _parse_bounds(s.items[3:], where)
            index[name] = len(pf.names)
            pf.names.append(name)
            pf.bounds.append(b)
        elif h == "declare-ivp":
            ivp = _parse_ivp(s)
            if ivp.name in pf.ivps:
                raise ParseError(f"IVP {ivp.name!r} declared twice", *where)
            pf.ivps[ivp.name] = ivp
        elif h == "assert":
            if len(s.items) != 2:
                raise ParseError("assert expects one formula", *where)
            raw_asserts.append(s.items[1])
        elif h in sys_parts:
            if len(s.items) != 2:
                raise ParseError(f"{h} expects one formula", *where)
            sys_parts[h].append(s.items[1])
        elif h in ("set-delta", "set-epsilon"):
            q = parse_number(s.items[1]) if len(s.items) == 2 else None
            if q is None or q <= 0:
                raise ParseError(f"{h} expects a positive rational", *where)
            if h == "set-delta":
                pf.delta = q
            else:
                pf.epsilon = q
        elif h == "set-mode":
            m = _sym(s.items[1]) if len(s.items) == 2 else None
            if m not in MODES:
                raise ParseError(f"mode must be one of {', '.join(MODES)}", *where)
            pf.mode = m
        elif h is None:
            raise ParseError("expected a command", *where)
        else:
            raise ParseError(f"unknown command {h!r}", *where)
    any_sys = any(sys_parts.values())
    if any_sys or state_decls:
        if raw_asserts:
            raise ParseError("a transition system uses init/trans/unsafe, not assert", 1, 1)
        k = len(pf.names)
        plain = _Scope(dict(index), pf.ivps)
        primed = _Scope({**index, **{n + "'": k + i for n, i in index.items()}}, pf.ivps)

        def conj(key, scope, required=True):
            parts = [parse_formula(x, scope) for x in sys_parts[key]]
            if not parts:
                if required:
                    raise ParseError(f"transition system needs ({key} ...)", 1, 1)
                return None
            return parts[0] if len(parts) == 1 else And(tuple(parts))

        pf.system = TransitionSystem(tuple(pf.names), tuple(pf.bounds), conj("init", plain),
                                     conj("trans", primed), conj("unsafe", plain),
                                     conj("invariant", plain, required=False))
    else:
        scope = _Scope(index, pf.ivps)
        pf.assertions = [parse_formula(a, scope) for a in raw_asserts]
        if not pf.assertions:
            pf.assertions = [TRUE]
    return pf


def parse_file(path) -> ProblemFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())

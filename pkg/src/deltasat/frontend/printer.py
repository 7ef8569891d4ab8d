"""Writer for the problem format; ``parse(print_problem(p))`` rebuilds ``p``."""

from __future__ import annotations

from fractions import Fraction

from ..expr import RationalInterval, formula_to_sexpr, to_sexpr
from ..odes import IVP
from .parser import ProblemFile


def fmt_number(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fmt_bounds(b: RationalInterval) -> str:
    left = "]" if b.lo_open else "["
    right = "[" if b.hi_open else "]"
    return f"{left}{fmt_number(b.lo)}, {fmt_number(b.hi)}{right}"


def fmt_ivp(ivp: IVP) -> str:
    fields = " ".join(to_sexpr(g, ivp.var_names) for g in ivp.field)
    out = (f"(declare-ivp {ivp.name} (vars {' '.join(ivp.var_names)}) (field {fields}) "
           f"(time {fmt_number(ivp.t0)} {fmt_number(ivp.T)})")
    return out + f" (steps {ivp.steps}))"


def print_problem(pf: ProblemFile) -> str:
    lines = []
    for ivp in pf.ivps.values():
        lines.append(fmt_ivp(ivp))
    decl = "declare-state" if pf.system is not None else "declare-var"
    for name, b in zip(pf.names, pf.bounds):
        lines.append(f"({decl} {name} Real {fmt_bounds(b)})")
    if pf.delta is not None:
        lines.append(f"(set-delta {fmt_number(pf.delta)})")
    if pf.epsilon is not None:
        lines.append(f"(set-epsilon {fmt_number(pf.epsilon)})")
    if pf.mode is not None:
        lines.append(f"(set-mode {pf.mode})")
    if pf.system is not None:
        ts = pf.system
        names = list(ts.names)
        primed = names + [n + "'" for n in names]
        lines.append(f"(init {formula_to_sexpr(ts.init, names)})")
        lines.append(f"(trans {formula_to_sexpr(ts.trans, primed)})")
        lines.append(f"(unsafe {formula_to_sexpr(ts.unsafe, names)})")
        if ts.inv is not None:
            lines.append(f"(invariant {formula_to_sexpr(ts.inv, names)})")
    else:
        for phi in pf.assertions:
            lines.append(f"(assert {formula_to_sexpr(phi, pf.names)})")
    return "\n".join(lines) + "\n"

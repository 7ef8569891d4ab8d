"""Encode propositional CNF as a bounded real sentence.

Each propositional variable ``p`` becomes a real ``x`` in ``[-1, 2]``
restricted to ``x = 0 or x = 1``.  The literal ``p`` reads ``x <= 0`` and
``not p`` reads ``x >= 1``.  For ``delta < 1/2`` the weakened literals
(``x <= delta`` versus ``x >= 1 - delta``) stay disjoint, so the sentence
is delta-sat exactly when the CNF is satisfiable and unsat otherwise.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Sequence

from ..errors import ParseError
from ..expr import And, Atom, Const, Or, RationalInterval, Sub, Var
from .parser import ProblemFile

DEFAULT_DELTA = Fraction(1, 4)


def read_dimacs(text: str) -> tuple[int, list[list[int]]]:
    n_vars = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("expected 'p cnf <vars> <clauses>'", lineno, 1)
            n_vars = int(parts[2])
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno, 1) from None
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    if n_vars is None:
        n_vars = max((abs(lit) for c in clauses for lit in c), default=0)
    return n_vars, clauses


def write_dimacs(n_vars: int, clauses: Sequence[Sequence[int]]) -> str:
    lines = [f"p cnf {n_vars} {len(clauses)}"]
    lines += [" ".join(str(lit) for lit in c) + " 0" for c in clauses]
    return "\n".join(lines) + "\n"


def gen_sat_encoding(n_vars: int, clauses: Sequence[Sequence[int]], delta=DEFAULT_DELTA) -> ProblemFile:
    delta = Fraction(delta)
    if not 0 < delta < Fraction(1, 2):
        raise ValueError("the encoding needs 0 < delta < 1/2")
    xs = [Var(i) for i in range(n_vars)]

    def literal(lit: int):
        x = xs[abs(lit) - 1]
        return Atom(x, "<=") if lit > 0 else Atom(Sub(x, Const(1)), ">=")

    parts = [Or((Atom(x, "="), Atom(Sub(x, Const(1)), "="))) for x in xs]
    parts += [Or(tuple(literal(lit) for lit in c)) for c in clauses]
    pf = ProblemFile()
    pf.names = [f"p{i + 1}" for i in range(n_vars)]
    pf.bounds = [RationalInterval.closed(-1, 2)] * n_vars
    pf.assertions = [And(tuple(parts))]
    pf.delta = delta
    return pf


def truth_table_sat(n_vars: int, clauses: Sequence[Sequence[int]]) -> bool:
    for bits in itertools.product((False, True), repeat=n_vars):
        if all(any(bits[abs(lit) - 1] == (lit > 0) for lit in c) for c in clauses):
            return True
    return False


def random_3cnf(n_vars: int, n_clauses: int, rng: random.Random) -> list[list[int]]:
    out = []
    for _ in range(n_clauses):
        vs = rng.sample(range(1, n_vars + 1), 3)
        out.append([v if rng.random() < 0.5 else -v for v in vs])
    return out

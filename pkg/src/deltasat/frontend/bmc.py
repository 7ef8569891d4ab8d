"""Bounded model checking and inductive invariant checks for transition systems."""

from __future__ import annotations

from dataclasses import dataclass

from ..dpll import DpllResult, solve
from ..expr import And, BoundedSigma1, Formula, Not, Var, map_formula_terms, substitute
from ..icp import IcpConfig
from .parser import TransitionSystem


def _shift(phi: Formula, mapping: dict[int, int]) -> Formula:
    subst = {i: Var(j) for i, j in mapping.items()}
    return map_formula_terms(phi, lambda t: substitute(t, subst))


def step_names(ts: TransitionSystem, n: int) -> tuple[str, ...]:
    return tuple(f"{name}@{i}" for i in range(n + 1) for name in ts.names)


def unroll_bmc(ts: TransitionSystem, n: int) -> BoundedSigma1:
    """``exists x_0..x_n. Init(x_0) and Trans(x_0, x_1) and ... and Unsafe(x_n)``.

    Copy ``i`` of state variable ``j`` is variable ``i * k + j``.
    """
    if n < 0:
        raise ValueError("depth must be non-negative")
    k = ts.k
    parts = [ts.init]
    for i in range(n):
        mapping = {j: i * k + j for j in range(k)}
        mapping.update({k + j: (i + 1) * k + j for j in range(k)})
        parts.append(_shift(ts.trans, mapping))
    parts.append(_shift(ts.unsafe, {j: n * k + j for j in range(k)}))
    return BoundedSigma1(tuple(ts.bounds) * (n + 1), And(tuple(parts)), step_names(ts, n))


@dataclass(frozen=True)
class BmcResult:
    depth: int
    result: DpllResult

    @property
    def verdict(self) -> str:
        return self.result.verdict

    def trace(self) -> list[tuple]:
        """Per-step witness intervals ``[(lo, hi) per state variable]`` of a delta-sat answer."""
        box = self.result.answer.certificate.witness_box
        k = self.result.standard_form.n_original // (self.depth + 1)
        return [tuple(box[i * k + j].pair() for j in range(k)) for i in range(self.depth + 1)]


def bmc(ts: TransitionSystem, n: int, cfg: IcpConfig | None = None) -> BmcResult:
    """Unsat: no unsafe state within ``n`` steps.  Delta-sat: an unsafe trace
    exists up to a delta-perturbation; the certificate box holds the trace."""
    return BmcResult(n, solve(unroll_bmc(ts, n), cfg))


INITIATION, CONSECUTION, SAFETY = "initiation", "consecution", "safety"


def invariant_queries(ts: TransitionSystem) -> dict[str, BoundedSigma1]:
    """Existential negations of the three inductiveness conditions."""
    if ts.inv is None:
        raise ValueError("transition system has no invariant")
    k = ts.k
    names = tuple(ts.names)
    primed = names + tuple(n + "'" for n in names)
    inv_next = _shift(ts.inv, {j: k + j for j in range(k)})
    return {
        INITIATION: BoundedSigma1(ts.bounds, And((ts.init, Not(ts.inv))), names),
        CONSECUTION: BoundedSigma1(ts.bounds * 2, And((ts.inv, ts.trans, Not(inv_next))), primed),
        SAFETY: BoundedSigma1(ts.bounds, And((ts.inv, ts.unsafe)), names),
    }


def check_invariant(ts: TransitionSystem, cfg: IcpConfig | None = None) -> dict[str, DpllResult]:
    """Solve each negated condition.  All unsat: the invariant is inductive and
    proves safety.  A delta-sat entry: the condition fails, or fails under a
    delta-perturbation, with the witness in its certificate."""
    return {name: solve(phi, cfg) for name, phi in invariant_queries(ts).items()}

"""Lazy combination of a propositional search with the ICP theory solver.

Every disjunct ``f_ij = 0`` of the standard form gets its own propositional
atom.  A small DPLL engine enumerates models of the Boolean abstraction
(atoms default to false); the conjunction of all atoms a model sets true is
handed to :func:`deltasat.icp.solve_conjunction`.  A refuted model is
blocked by the clause ``not (p_1 and ... and p_k)`` over its true atoms.

Partial assignments are also screened by pruning alone (no branching): if
the true atoms so far already prune the domain to nothing, the set is
shrunk while pruning still refutes it and the remainder is blocked.  This
only ever blocks sets of atoms whose conjunction has no solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .expr import BoundedSigma1, Const, Term
from .icp import DeltaSat, IcpAnswer, IcpConfig, ResourceOut, Unsat, pruning_delta, solve_conjunction
from .interval import FloatBox
from .normalize import StandardForm, to_standard_form
from .prune import Constraint
from .tape import Tape


@dataclass(frozen=True)
class BooleanAbstraction:
    """Clauses over atoms ``1..n``; ``atoms[k]`` is the term of atom ``k + 1``."""

    clauses: tuple[tuple[int, ...], ...]
    atoms: tuple[Term, ...]

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def term(self, atom: int) -> Term:
        return self.atoms[atom - 1]


@dataclass(frozen=True)
class TheoryQuery:
    atoms: frozenset[int]
    constraints: tuple[Term, ...]
    box: FloatBox


@dataclass
class SearchStats:
    theory_queries: int = 0
    early_conflicts: int = 0
    blocked: list[frozenset[int]] = field(default_factory=list)
    resource_outs: int = 0


@dataclass(frozen=True)
class DpllResult:
    answer: IcpAnswer
    standard_form: StandardForm
    abstraction: BooleanAbstraction
    true_atoms: frozenset[int] = frozenset()
    stats: SearchStats = field(default_factory=SearchStats, compare=False)

    @property
    def verdict(self) -> str:
        return self.answer.verdict


def abstract(sf: StandardForm) -> BooleanAbstraction:
    """One atom per disjunct, numbered clause-major from 1."""
    clauses = []
    atoms: list[Term] = []
    for clause in sf.clauses:
        ids = []
        for t in clause:
            atoms.append(t)
            ids.append(len(atoms))
        clauses.append(tuple(ids))
    return BooleanAbstraction(tuple(clauses), tuple(atoms))


class _Engine:
    """Chronological DPLL with unit propagation over clauses of signed ints.

    Learned clauses are all-negative (blocking), so deciding false first
    finds small sets of true atoms early.
    """

    def __init__(self, n: int, clauses: Sequence[Sequence[int]]):
        self.n = n
        self.clauses: list[tuple[int, ...]] = [tuple(c) for c in clauses]
        self.value: list[int] = [0] * (n + 1)  # 0 unassigned, 1 true, -1 false
        self.trail: list[tuple[int, bool]] = []  # (literal, is an unflipped decision)

    def _lit_value(self, lit: int) -> int:
        v = self.value[abs(lit)]
        return v if lit > 0 else -v

    def _assign(self, lit: int, decision: bool) -> None:
        self.value[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append((lit, decision))

    def propagate(self) -> bool:
        """Unit propagation to fixpoint; False on a falsified clause."""
        changed = True
        while changed:
            changed = False
            for c in self.clauses:
                unassigned = None
                count = 0
                sat = False
                for lit in c:
                    v = self._lit_value(lit)
                    if v == 1:
                        sat = True
                        break
                    if v == 0:
                        count += 1
                        unassigned = lit
                if sat:
                    continue
                if count == 0:
                    return False
                if count == 1:
                    self._assign(unassigned, False)
                    changed = True
        return True

    def backtrack(self) -> bool:
        """Undo to the latest unflipped decision and flip it; False when none is left."""
        while self.trail:
            lit, decision = self.trail.pop()
            self.value[abs(lit)] = 0
            if decision:
                self._assign(-lit, False)
                return True
        return False

    def decide(self) -> bool:
        for v in range(1, self.n + 1):
            if self.value[v] == 0:
                self._assign(-v, True)
                return True
        return False

    def true_atoms(self) -> frozenset[int]:
        return frozenset(v for v in range(1, self.n + 1) if self.value[v] == 1)

    def add_clause(self, clause: Sequence[int]) -> None:
        self.clauses.append(tuple(clause))


def _box(sf: StandardForm) -> FloatBox:
    return FloatBox.from_bounds([b.closure() for b in sf.bounds])


def solve(phi: BoundedSigma1 | StandardForm, cfg: IcpConfig | None = None,
          early_prune: bool = True) -> DpllResult:
    """Decide ``phi`` up to ``cfg.delta``.

    ``DeltaSat`` carries the certificate of the successful theory query;
    ``Unsat`` means every model of the abstraction was refuted.  If some
    query ran out of resources and no model succeeded, the answer is
    ``ResourceOut``.
    """
    cfg = cfg or IcpConfig()
    sf = phi if isinstance(phi, StandardForm) else to_standard_form(phi)
    ab = abstract(sf)
    box = _box(sf)
    stats = SearchStats()
    if any(len(c) == 0 for c in ab.clauses):
        return DpllResult(Unsat(0), sf, ab, stats=stats)
    engine = _Engine(ab.n_atoms, ab.clauses)
    screened: dict[frozenset[int], bool] = {frozenset(): True}
    total_boxes = 0
    atom_tape = Tape(ab.atoms, n_vars=sf.n) if early_prune else None
    band = Constraint(Const(0), pruning_delta(cfg)).band
    blo, bhi = box.los(), box.his()

    def consistent(atoms: frozenset[int]) -> bool:
        if atoms not in screened:
            segs = [a - 1 for a in sorted(atoms)]
            st, _, _ = atom_tape.fixpoint(blo, bhi, [band] * len(segs), segments=segs)
            screened[atoms] = st != 0
        return screened[atoms]

    def core(atoms: frozenset[int]) -> frozenset[int]:
        """Drop atoms one at a time while pruning still refutes the rest."""
        kept = set(atoms)
        for a in sorted(atoms):
            if len(kept) > 1 and not consistent(frozenset(kept - {a})):
                kept.discard(a)
        return frozenset(kept)

    def block(atoms: frozenset[int]) -> None:
        stats.blocked.append(atoms)
        engine.add_clause([-a for a in sorted(atoms)])

    while True:
        ok = engine.propagate()
        if ok and early_prune:
            current = engine.true_atoms()
            if not consistent(current):
                stats.early_conflicts += 1
                block(core(current))
                ok = False
        if not ok:
            if not engine.backtrack():
                break
            continue
        if engine.decide():
            continue
        # full model of the abstraction
        atoms = engine.true_atoms()
        stats.theory_queries += 1
        query = TheoryQuery(atoms, tuple(ab.term(a) for a in sorted(atoms)), box)
        ans = solve_conjunction(list(query.constraints), box, cfg)
        total_boxes += ans.boxes
        if isinstance(ans, DeltaSat):
            return DpllResult(DeltaSat(ans.certificate, total_boxes), sf, ab, atoms, stats)
        if isinstance(ans, ResourceOut):
            stats.resource_outs += 1
        block(atoms)
        if not engine.backtrack():
            break
    if stats.resource_outs:
        return DpllResult(ResourceOut(f"{stats.resource_outs} theory queries ran out of resources",
                                      total_boxes), sf, ab, stats=stats)
    return DpllResult(Unsat(total_boxes), sf, ab, stats=stats)

import itertools
import random
from fractions import Fraction

import pytest

from deltasat.dpll import abstract, solve
from deltasat.expr import And, Atom, BoundedSigma1, Const, Mul, Not, Or, RationalInterval, Var
from deltasat.icp import DeltaSat, IcpConfig, Unsat
from deltasat.normalize import StandardForm, to_standard_form
from deltasat.oracle import residual_bounds
from deltasat.frontend.satgen import gen_sat_encoding, random_3cnf, truth_table_sat

x, y = Var(0), Var(1)


def _sf(clauses, n=2):
    bounds = (RationalInterval.closed(0, 1),) * n
    return StandardForm(bounds, tuple(tuple(c) for c in clauses), tuple(f"x{i}" for i in range(n)), n, {})


def test_abstraction_numbers_each_disjunct():
    ab = abstract(_sf([[x]]))
    assert ab.clauses == ((1,),) and ab.n_atoms == 1
    ab = abstract(_sf([[x, y], [x - y]]))
    assert ab.clauses == ((1, 2), (3,)) and ab.term(3) == x - y
    # the same term in two clauses still gets two atoms
    assert abstract(_sf([[x], [x]])).clauses == ((1,), (2,))


def test_unit_clause_forces_the_root():
    phi = BoundedSigma1((RationalInterval.closed(-1, 2),),
                        And((Or((Atom(x, "="), Atom(x - 1, "="))), Atom(x, "="))))
    res = solve(phi, IcpConfig(Fraction(1, 10)))
    assert isinstance(res.answer, DeltaSat)
    w = res.answer.certificate.witness_box[0]
    assert -0.1 <= w.lo and w.hi <= 0.1


def test_sat_encoding_examples():
    # (p or q) and (not p or not q) is satisfiable; p and not p is not
    pf = gen_sat_encoding(2, [[1, 2], [-1, -2]])
    assert solve(pf.sentence(), IcpConfig(pf.delta)).verdict == "delta-sat"
    pf = gen_sat_encoding(1, [[1], [-1]])
    assert solve(pf.sentence(), IcpConfig(pf.delta)).verdict == "unsat"
    with pytest.raises(ValueError):
        gen_sat_encoding(1, [[1]], delta=Fraction(1, 2))


def test_empty_clause_needs_no_theory_call():
    res = solve(BoundedSigma1((RationalInterval.closed(0, 1),), Or(())))
    assert res.verdict == "unsat" and res.stats.theory_queries == 0


def test_small_cnf_corpus_matches_truth_tables():
    rng = random.Random(5)
    for _ in range(6):
        cnf = random_3cnf(4, 14, rng)
        pf = gen_sat_encoding(4, cnf)
        res = solve(pf.sentence(), IcpConfig(pf.delta))
        assert (res.verdict == "delta-sat") == truth_table_sat(4, cnf)


# random positive skeletons over linear equalities on [0, 1]^2

def _linear(rng):
    c = lambda: Fraction(rng.randint(-8, 8), 4)  # noqa: E731
    return Mul(Const(c()), x) + Mul(Const(c()), y) + Const(c())


def _skeleton(rng):
    k = rng.randint(2, 8)
    atoms = [_linear(rng) for _ in range(k)]
    clauses = [sorted(rng.sample(range(k), rng.randint(1, min(3, k)))) for _ in range(rng.randint(1, 4))]
    return atoms, clauses


def _models(k, clauses):
    """Sets of true atoms satisfying every clause, minimal ones only."""
    sets = [frozenset(i for i in range(k) if bits[i])
            for bits in itertools.product((False, True), repeat=k)
            if all(any(bits[i] for i in c) for c in clauses)]
    return [s for s in sets if not any(t < s for t in sets)]


def _exact_root(terms) -> bool:
    """Do the linear equalities have a common solution in [0, 1]^2?  Exact, by elimination."""
    rows = [(t.left.left.left.value, t.left.right.left.value, -t.right.value) for t in terms]
    # a common solution in the box is either the crossing of two non-parallel
    # lines or, when all lines coincide, a point where the line meets the box edge
    cands = []
    for a, b, c in rows:
        for v in (Fraction(0), Fraction(1)):
            if b:
                cands.append((v, (c - a * v) / b))
            if a:
                cands.append(((c - b * v) / a, v))
    for (a1, b1, c1), (a2, b2, c2) in itertools.combinations(rows, 2):
        det = a1 * b2 - a2 * b1
        if det:
            cands.append(((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det))
    if all(a == b == c == 0 for a, b, c in rows):
        return True
    return any(0 <= px <= 1 and 0 <= py <= 1 and all(a * px + b * py == c for a, b, c in rows)
               for px, py in cands)


def test_verdicts_agree_with_truth_tables_and_grids():
    rng = random.Random(17)
    delta = Fraction(1, 10)
    for _ in range(25):
        atoms, clauses = _skeleton(rng)
        res = solve(_sf([[atoms[i] for i in c] for c in clauses]), IcpConfig(delta))
        assert res.verdict in ("delta-sat", "unsat")
        models = _models(len(atoms), clauses)
        if any(_exact_root([atoms[i] for i in m]) for m in models):
            assert res.verdict == "delta-sat"
        bounds = [residual_bounds(_sf([[atoms[i]] for i in sorted(m)]), 256) for m in models]
        if res.verdict == "delta-sat":
            assert min(lo for lo, _ in bounds) <= delta
        else:
            assert min(hi for _, hi in bounds) >= delta


def test_blocking_covers_every_model_before_unsat():
    rng = random.Random(18)
    seen = 0
    for _ in range(40):
        atoms, clauses = _skeleton(rng)
        res = solve(_sf([[atoms[i] for i in c] for c in clauses]), IcpConfig(Fraction(1, 100)), early_prune=False)
        ab = res.abstraction
        assert all(lit > 0 for c in ab.clauses for lit in c)
        if res.verdict != "unsat":
            continue
        seen += 1
        # atom numbers are 1-based and clause-major; map models of the skeleton onto them
        k = ab.n_atoms
        for bits in itertools.product((False, True), repeat=k):
            if all(any(bits[a - 1] for a in c) for c in ab.clauses):
                true = {a for a in range(1, k + 1) if bits[a - 1]}
                assert any(b <= true for b in res.stats.blocked)
        assert res.stats.theory_queries == len(res.stats.blocked)
    assert seen >= 5


def test_early_pruning_does_not_change_verdicts():
    rng = random.Random(19)
    for _ in range(30):
        atoms, clauses = _skeleton(rng)
        sf = _sf([[atoms[i] for i in c] for c in clauses])
        cfg = IcpConfig(Fraction(1, 100))
        assert solve(sf, cfg).verdict == solve(sf, cfg, early_prune=False).verdict


def test_negations_reach_the_theory_as_slacks():
    phi = BoundedSigma1((RationalInterval.closed(-1, 1),), Not(Atom(x, ">")))
    res = solve(phi, IcpConfig(Fraction(1, 100)))
    assert res.verdict == "delta-sat" and res.standard_form.n == 2
    assert isinstance(solve(to_standard_form(
        BoundedSigma1((RationalInterval.closed(1, 2),), Atom(x, "<"))), IcpConfig(Fraction(1, 100))).answer, Unsat)

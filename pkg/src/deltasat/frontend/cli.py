"""Command-line interface: ``deltasat solve|bmc|invcheck|gen-sat``.

Exit codes: 0 delta-sat, 1 unsat, 2 resource limit, 3 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from ..dpll import DpllResult, solve
from ..errors import DeltaSatError
from ..expr import to_sexpr
from ..icp import CERTIFICATE, MODES, DeltaSat, IcpConfig, Unsat
from ..normalize import to_standard_form
from .bmc import CONSECUTION, INITIATION, SAFETY, bmc, check_invariant
from .parser import ProblemFile, parse_file
from .printer import fmt_number, print_problem
from .satgen import gen_sat_encoding, read_dimacs

EXIT = {"delta-sat": 0, "unsat": 1, "unknown (resource limit)": 2}
EXIT_ERROR = 3
DEFAULT_DELTA = Fraction(1, 1000)


def _rational(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if q <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return q


def _config(args, pf: ProblemFile) -> IcpConfig:
    delta = args.delta or pf.delta or DEFAULT_DELTA
    eps = args.epsilon or pf.epsilon
    mode = args.mode or pf.mode or CERTIFICATE
    return IcpConfig(delta=delta, epsilon=eps, mode=mode, seed=args.seed, max_boxes=args.max_boxes)


def _witness(res: DpllResult, verbose: bool) -> dict:
    cert = res.answer.certificate
    sf = res.standard_form
    terms = [res.abstraction.term(a) for a in sorted(res.true_atoms)]
    out = {
        "variables": [{"name": nm, "lo": iv.lo, "hi": iv.hi} for nm, iv in zip(sf.names, cert.witness_box)],
        "ranges": [{"lo": r.lo, "hi": r.hi} for r in cert.per_constraint_ranges],
    }
    if verbose:
        for entry, t in zip(out["ranges"], terms):
            entry["constraint"] = to_sexpr(t, sf.names)
    return out


def _text_witness(w: dict) -> list[str]:
    lines = [f"{v['name']} in [{v['lo']!r}, {v['hi']!r}]" for v in w["variables"]]
    for k, r in enumerate(w["ranges"]):
        label = r.get("constraint", f"constraint {k + 1}")
        lines.append(f"range {label} in [{r['lo']!r}, {r['hi']!r}]")
    return lines


def _emit(args, verdict: str, payload: dict, text_lines: list[str]) -> None:
    if args.format == "structured":
        print(json.dumps({"verdict": verdict, **payload}, sort_keys=True))
    else:
        print(verdict)
        for line in text_lines:
            print(line)


def cmd_solve(args) -> int:
    pf = parse_file(args.file)
    cfg = _config(args, pf)
    phi = pf.sentence()
    if args.oracle:
        from ..oracle import grid_decide

        sf = to_standard_form(phi)
        ans = grid_decide(sf, cfg.delta)
        payload = {"delta": fmt_number(cfg.delta), "grid_exponent": ans.grid.e}
        lines = []
        if ans.verdict == "delta-sat":
            payload["point"] = [{"name": nm, "value": fmt_number(v)} for nm, v in zip(sf.names, ans.point)]
            lines = [f"{nm} = {fmt_number(v)}" for nm, v in zip(sf.names, ans.point)]
        _emit(args, ans.verdict, payload, lines)
        return EXIT[ans.verdict]
    res = solve(phi, cfg)
    payload = {"delta": fmt_number(cfg.delta)}
    lines: list[str] = []
    if isinstance(res.answer, DeltaSat):
        w = _witness(res, args.witness)
        payload["witness"] = w
        lines = _text_witness(w)
    _emit(args, res.verdict, payload, lines)
    return EXIT[res.verdict]


def cmd_bmc(args) -> int:
    pf = parse_file(args.file)
    if pf.system is None:
        raise DeltaSatError("bmc needs a transition system (declare-state, init, trans, unsafe)")
    cfg = _config(args, pf)
    r = bmc(pf.system, args.depth, cfg)
    payload = {"delta": fmt_number(cfg.delta), "depth": args.depth}
    lines: list[str] = []
    if isinstance(r.result.answer, DeltaSat):
        trace = r.trace()
        payload["trace"] = [[{"name": nm, "lo": lo, "hi": hi} for nm, (lo, hi) in zip(pf.system.names, step)]
                            for step in trace]
        for i, step in enumerate(trace):
            cells = ", ".join(f"{nm} in [{lo!r}, {hi!r}]" for nm, (lo, hi) in zip(pf.system.names, step))
            lines.append(f"step {i}: {cells}")
        w = _witness(r.result, args.witness)
        payload["witness"] = w
        lines += _text_witness(w)
    _emit(args, r.verdict, payload, lines)
    return EXIT[r.verdict]


def cmd_invcheck(args) -> int:
    pf = parse_file(args.file)
    if pf.system is None or pf.system.inv is None:
        raise DeltaSatError("invcheck needs a transition system with an invariant")
    cfg = _config(args, pf)
    results = check_invariant(pf.system, cfg)
    verdicts = {k: v.verdict for k, v in results.items()}
    if all(isinstance(v.answer, Unsat) for v in results.values()):
        overall, summary = "unsat", "invariant is inductive and proves safety"
    elif any(isinstance(v.answer, DeltaSat) for v in results.values()):
        overall, summary = "delta-sat", "invariant is not inductive, or fails under a small perturbation"
    else:
        overall, summary = "unknown (resource limit)", "undecided within the resource limit"
    payload = {"delta": fmt_number(cfg.delta), "conditions": verdicts, "summary": summary}
    lines = [f"{k}: {verdicts[k]}" for k in (INITIATION, CONSECUTION, SAFETY)]
    for k in (INITIATION, CONSECUTION, SAFETY):
        if isinstance(results[k].answer, DeltaSat):
            w = _witness(results[k], args.witness)
            payload.setdefault("witnesses", {})[k] = w
            lines.append(f"witness for {k}:")
            lines += ["  " + line for line in _text_witness(w)]
    lines.append(summary)
    _emit(args, overall, payload, lines)
    return EXIT[overall]


def cmd_gen_sat(args) -> int:
    with open(args.file, encoding="utf-8") as fh:
        n, clauses = read_dimacs(fh.read())
    pf = gen_sat_encoding(n, clauses, args.delta or Fraction(1, 4))
    text = print_problem(pf)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=_rational)
    p.add_argument("--epsilon", type=_rational)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--seed", type=int, help="seeded random tie-breaking between equally wide dimensions")
    p.add_argument("--max-boxes", type=int, default=100_000)
    p.add_argument("--witness", action="store_true", help="label range lines with their constraints")
    p.add_argument("--format", choices=("text", "structured"), default="text")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="deltasat", description="delta-complete decision procedure")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", help="decide a problem file")
    p.add_argument("file")
    p.add_argument("--oracle", action="store_true", help="use the grid oracle instead of branch-and-prune")
    _solver_flags(p)
    p.set_defaults(func=cmd_solve)
    p = sub.add_parser("bmc", help="bounded model checking of a transition system")
    p.add_argument("file")
    p.add_argument("--depth", type=int, required=True)
    _solver_flags(p)
    p.set_defaults(func=cmd_bmc)
    p = sub.add_parser("invcheck", help="check that the invariant is inductive and proves safety")
    p.add_argument("file")
    _solver_flags(p)
    p.set_defaults(func=cmd_invcheck)
    p = sub.add_parser("gen-sat", help="encode a DIMACS CNF as a problem file")
    p.add_argument("file")
    p.add_argument("--delta", type=_rational)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_sat)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (DeltaSatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

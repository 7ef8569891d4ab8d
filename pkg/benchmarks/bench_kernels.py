"""Compare the pure-Python and compiled tape kernels.

Times forward evaluation, a single HC4 revise and a multi-constraint
fixpoint on a few representative constraint sets, and checks that both
backends return identical bounds.

    python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import random
import timeit

from deltasat.expr import Const, Cos, Exp, Mul, Pow, Sin, Var
from deltasat.prune import Constraint
from deltasat.tape import Tape, available_backends

x, y, z = Var(0), Var(1), Var(2)

CASES = {
    "parabola": [x - Pow(y, 2)],
    "circle+line": [Pow(x, 2) + Pow(y, 2) - Const(1), y - x],
    "trig-exp": [Exp(z) - x - Const(1), Sin(x) * Cos(y) - z, x * y - Const(1) / Const(4)],
    "poly-chain": [Mul(x, y) * z - Pow(x, 3) + Pow(y, 2) * z - Const(2), x + y + z - Const(1)],
}


def boxes(n_vars: int, count: int, rng: random.Random):
    out = []
    for _ in range(count):
        lo = [rng.uniform(-3, 2) for _ in range(n_vars)]
        out.append((lo, [a + rng.uniform(0.01, 2) for a in lo]))
    return out


def run(repeat: int) -> None:
    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the Python kernels are available")
    rng = random.Random(7)
    print(f"{'case':<12} {'op':<9} " + " ".join(f"{b:>12}" for b in backends) + "   speedup")
    for name, terms in CASES.items():
        band = Constraint(Const(0), 1e-3).band
        test_boxes = boxes(3, 50, rng)
        tapes = {b: Tape(terms, n_vars=3, backend=mod) for b, mod in backends.items()}
        ops = {
            "evaluate": lambda t: [t.evaluate(lo, hi) for lo, hi in test_boxes],
            "revise": lambda t: [t.revise(0, lo, hi, band) for lo, hi in test_boxes],
            "fixpoint": lambda t: [t.fixpoint(lo, hi, [band] * len(terms)) for lo, hi in test_boxes],
        }
        for op, fn in ops.items():
            results = {b: fn(t) for b, t in tapes.items()}
            ref = results["python"]
            assert all(r == ref for r in results.values()), f"backends disagree on {name}/{op}"
            times = {b: min(timeit.repeat(lambda t=t: fn(t), number=1, repeat=repeat)) for b, t in tapes.items()}
            speed = times["python"] / times["cython"] if "cython" in times else 1.0
            cells = " ".join(f"{1e6 * times[b] / len(test_boxes):>10.1f}us" for b in backends)
            print(f"{name:<12} {op:<9} {cells}   {speed:6.1f}x")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    run(ap.parse_args().repeat)

"""The compiled and pure-Python kernels must agree bit for bit."""

import os
import random
import subprocess
import sys

import pytest

from deltasat.prune import Constraint
from deltasat.tape import BACKEND_NAME, Tape, available_backends, get_backend

from termgen import random_box, random_term

backends = available_backends()
needs_compiled = pytest.mark.skipif("cython" not in backends, reason="compiled kernels not built")


def _tapes(terms, n):
    return Tape(terms, n_vars=n, backend="python"), Tape(terms, n_vars=n, backend="cython")


def test_backend_registry():
    assert "python" in backends
    assert get_backend("python").NAME == "python"
    with pytest.raises(ValueError):
        get_backend("fortran")


@needs_compiled
def test_compiled_backend_is_default():
    assert BACKEND_NAME == "cython"


def test_pure_python_env_switch():
    env = dict(os.environ, DELTASAT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import deltasat.tape as t; print(t.BACKEND_NAME)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
def test_evaluate_agrees():
    rng = random.Random(11)
    for _ in range(1500):
        n = rng.randint(1, 3)
        terms = [random_term(rng, n, 4) for _ in range(rng.randint(1, 3))]
        lo, hi = random_box(rng, n)
        py, cy = _tapes(terms, n)
        assert py.evaluate(lo, hi) == cy.evaluate(lo, hi)


@needs_compiled
def test_revise_and_fixpoint_agree():
    rng = random.Random(12)
    for _ in range(1500):
        n = rng.randint(1, 3)
        terms = [random_term(rng, n, 3) for _ in range(rng.randint(1, 3))]
        lo, hi = random_box(rng, n, max_width=4.0)
        py, cy = _tapes(terms, n)
        band = Constraint(terms[0], rng.choice((0, 1e-3, 0.5))).band
        for seg in range(len(terms)):
            assert py.revise(seg, lo, hi, band) == cy.revise(seg, lo, hi, band)
        bands = [band] * len(terms)
        assert py.fixpoint(lo, hi, bands) == cy.fixpoint(lo, hi, bands)
        segs = [len(terms) - 1]
        assert py.fixpoint(lo, hi, [band], segments=segs) == cy.fixpoint(lo, hi, [band], segments=segs)

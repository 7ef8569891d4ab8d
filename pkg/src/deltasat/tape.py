"""Compilation of terms into flat node tapes, and kernel backend selection.

A :class:`Tape` holds one segment per constraint term.  Within a segment
nodes are in post-order with common subexpressions shared, so a forward pass
is a single loop and the HC4 backward pass is the same loop reversed.

The compiled kernel (``deltasat._ckernels``) is used when it is importable
and the environment variable ``DELTASAT_PURE_PYTHON`` is unset; otherwise
the pure-Python kernel runs.  Tapes containing ODE flow nodes always run on
the Python kernel, since flow enclosures call back into :mod:`deltasat.odes`.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from . import _pykernels
from .errors import BlowUp, StepRejected
from .expr import (
    Abs, Add, Const, Cos, Div, Exp, Flow, Max, Min, Mul, Neg, Pow, Sin, Sub, Term, Var, free_vars,
)
from .interval import FloatInterval, fraction_bounds

K = _pykernels

_compiled = None
if not os.environ.get("DELTASAT_PURE_PYTHON"):
    try:
        from . import _ckernels as _compiled  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

DEFAULT_BACKEND = _compiled if _compiled is not None else _pykernels
BACKEND_NAME = DEFAULT_BACKEND.NAME


def available_backends() -> dict:
    out = {"python": _pykernels}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


def get_backend(name: str | None = None):
    if name is None:
        return DEFAULT_BACKEND
    try:
        return available_backends()[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available") from None


_UNARY_OPS = {Neg: K.NEG, Exp: K.EXP, Sin: K.SIN, Cos: K.COS, Abs: K.ABS}
_BINARY_OPS = {Add: K.ADD, Sub: K.SUB, Mul: K.MUL, Div: K.DIV, Min: K.MIN, Max: K.MAX}


class Tape:
    """Flattened terms ready for repeated interval evaluation and narrowing."""

    def __init__(self, terms: Sequence[Term], n_vars: int | None = None, backend=None):
        self.terms = tuple(terms)
        used = set()
        for t in self.terms:
            used |= free_vars(t)
        self.n_vars = n_vars if n_vars is not None else (max(used) + 1 if used else 0)
        if used and max(used) >= self.n_vars:
            raise ValueError(f"term mentions x{max(used)} but the box has {self.n_vars} variables")
        ops: list[int] = []
        a1: list[int] = []
        a2: list[int] = []
        ia: list[int] = []
        clo: list[float] = []
        chi: list[float] = []
        self.flows: dict[int, tuple[Flow, int, tuple[int, ...]]] = {}
        starts, ends = [], []
        for t in self.terms:
            starts.append(len(ops))
            memo: dict = {}
            self._emit(t, memo, ops, a1, a2, ia, clo, chi)
            ends.append(len(ops))
        self.size = len(ops)
        self.has_flow = bool(self.flows)
        # lists for the Python kernel, arrays for the compiled one
        self._lists = (ops, a1, a2, ia, clo, chi)
        self._arrays = (
            np.asarray(ops, dtype=np.intc),
            np.asarray(a1, dtype=np.intc),
            np.asarray(a2, dtype=np.intc),
            np.asarray(ia, dtype=np.intc),
            np.asarray(clo, dtype=np.float64),
            np.asarray(chi, dtype=np.float64),
        )
        self.starts = starts
        self.ends = ends
        self._starts_arr = np.asarray(starts, dtype=np.intp)
        self._ends_arr = np.asarray(ends, dtype=np.intp)
        if backend is None or isinstance(backend, str):
            backend = get_backend(backend)
        if self.has_flow:
            backend = _pykernels
        self.backend = backend

    # -------------------------------------------------------- compilation

    def _emit(self, t: Term, memo, ops, a1, a2, ia, clo, chi) -> int:
        # iterative post-order so deep terms do not hit the recursion limit
        stack: list[tuple[Term, bool]] = [(t, False)]
        while stack:
            s, expanded = stack.pop()
            key = _key(s)
            if key in memo:
                continue
            kids = s.children()
            if not expanded and kids:
                stack.append((s, True))
                for c in reversed(kids):
                    if _key(c) not in memo:
                        stack.append((c, False))
                continue
            idx = len(ops)
            x = memo[_key(kids[0])] if kids else 0
            y = memo[_key(kids[1])] if len(kids) > 1 else 0
            lo = hi = 0.0
            iarg = 0
            if isinstance(s, Var):
                op, iarg = K.VAR, s.index
            elif isinstance(s, Const):
                op = K.CONST
                lo, hi = fraction_bounds(s.value)
            elif isinstance(s, Pow):
                op, iarg = K.POW, s.exponent
            elif isinstance(s, Flow):
                op = K.FLOW
                self.flows[idx] = (s, memo[_key(s.time)], tuple(memo[_key(a)] for a in s.init))
            elif type(s) in _UNARY_OPS:
                op = _UNARY_OPS[type(s)]
            elif type(s) in _BINARY_OPS:
                op = _BINARY_OPS[type(s)]
            else:
                raise TypeError(f"cannot compile {s!r}")
            ops.append(op)
            a1.append(x)
            a2.append(y)
            ia.append(iarg)
            clo.append(lo)
            chi.append(hi)
            memo[key] = idx
        return memo[_key(t)]

    # ------------------------------------------------------------ running

    def _flow_hook(self, k, vlo, vhi):
        from .odes import ode_extension

        flow, t_idx, init_idx = self.flows[k]
        t_iv = FloatInterval.from_pair((vlo[t_idx], vhi[t_idx]))
        y0 = [FloatInterval.from_pair((vlo[j], vhi[j])) for j in init_idx]
        if t_iv.is_empty or any(iv.is_empty for iv in y0):
            return K.EMPTY
        if not t_iv.bounded or not all(iv.bounded for iv in y0):
            return K.ENTIRE
        try:
            r = ode_extension(flow.ivp, flow.component, t_iv, y0)
        except (StepRejected, BlowUp):
            return K.ENTIRE
        return r.lo, r.hi

    def _prepare(self, box_lo, box_hi):
        if len(box_lo) != self.n_vars or len(box_hi) != self.n_vars:
            raise ValueError(f"box has {len(box_lo)} dimensions, tape expects {self.n_vars}")
        if self.backend is _pykernels:
            return self._lists, [float(v) for v in box_lo], [float(v) for v in box_hi], \
                [0.0] * self.size, [0.0] * self.size
        return (
            self._arrays,
            np.array(box_lo, dtype=np.float64),
            np.array(box_hi, dtype=np.float64),
            np.empty(self.size, dtype=np.float64),
            np.empty(self.size, dtype=np.float64),
        )

    def evaluate(self, box_lo, box_hi) -> tuple[list[tuple[float, float]], int]:
        """Forward pass over every segment; returns the root enclosures and status flags."""
        data, blo, bhi, vlo, vhi = self._prepare(box_lo, box_hi)
        flags = 0
        hook = self._flow_hook if self.has_flow else None
        for s, e in zip(self.starts, self.ends):
            flags |= self.backend.forward(*data, s, e, blo, bhi, vlo, vhi, hook)
        roots = [(float(vlo[e - 1]), float(vhi[e - 1])) for e in self.ends]
        return roots, flags

    def revise(self, seg: int, box_lo, box_hi, band: tuple[float, float]):
        """HC4-revise segment ``seg`` toward ``band``.

        Returns ``(status, lo, hi)``: status 0 means the box is empty, 1
        unchanged, 2 narrowed.
        """
        data, blo, bhi, vlo, vhi = self._prepare(box_lo, box_hi)
        hook = self._flow_hook if self.has_flow else None
        st = self.backend.revise(*data, self.starts[seg], self.ends[seg], blo, bhi,
                                 float(band[0]), float(band[1]), vlo, vhi, hook)
        return st, _floats(blo), _floats(bhi)

    def fixpoint(self, box_lo, box_hi, bands, rel_tol=0.01, abs_tol=1e-12, max_sweeps=1000,
                 segments=None):
        """Revise all segments (or only ``segments``) round-robin until no sweep
        makes significant progress; ``bands`` has one entry per revised segment.

        Returns ``(status, lo, hi)`` with status 0 for an empty box.
        """
        starts, ends = self.starts, self.ends
        if segments is not None:
            starts = [self.starts[k] for k in segments]
            ends = [self.ends[k] for k in segments]
        if not starts:
            return 1, _floats(box_lo), _floats(box_hi)
        data, blo, bhi, vlo, vhi = self._prepare(box_lo, box_hi)
        tl = [float(b[0]) for b in bands]
        th = [float(b[1]) for b in bands]
        hook = self._flow_hook if self.has_flow else None
        if self.backend is _pykernels:
            st = self.backend.fixpoint(*data, starts, ends, tl, th, blo, bhi,
                                       rel_tol, abs_tol, max_sweeps, vlo, vhi, hook)
        else:
            if segments is None:
                sa, ea = self._starts_arr, self._ends_arr
            else:
                sa, ea = np.asarray(starts, dtype=np.intp), np.asarray(ends, dtype=np.intp)
            st = self.backend.fixpoint(*data, sa, ea,
                                       np.asarray(tl), np.asarray(th), blo, bhi,
                                       rel_tol, abs_tol, max_sweeps, vlo, vhi, hook)
        return st, _floats(blo), _floats(bhi)


def _floats(v) -> list[float]:
    return [float(x) for x in v]


def _key(t: Term):
    # leaves are shared structurally, inner nodes by identity (structural
    # hashing of frozen dataclasses would re-walk the whole subtree each time)
    if isinstance(t, Var):
        return ("v", t.index)
    if isinstance(t, Const):
        return ("c", t.value)
    return id(t)


def enclosure(t: Term, box_lo, box_hi, backend=None) -> tuple[float, float]:
    """Root enclosure of a single term; the empty pair on empty input."""
    tape = Tape([t], n_vars=len(box_lo), backend=backend)
    (r,), _ = tape.evaluate(box_lo, box_hi)
    return r


"""A delta-complete decision procedure for bounded existential sentences over
the reals with polynomials, exp, sin, cos, abs, min, max and ODE flows."""

from .dpll import DpllResult, solve
from .errors import DeltaSatError, NonpositiveDelta, ParseError
from .expr import (Abs, Add, And, Atom, BoundedSigma1, Const, Cos, Div, Exp, Flow, Max, Min, Mul, Neg, Not,
                   Or, Pow, RationalInterval, Sin, Sub, Var)
from .icp import Certificate, DeltaSat, IcpConfig, ResourceOut, Unsat, certificate_check, solve_conjunction
from .interval import FloatBox, FloatInterval, natural_extension
from .normalize import StandardForm, to_standard_form
from .odes import IVP
from .tape import BACKEND_NAME

__version__ = "0.1.0"

__all__ = [
    "Abs", "Add", "And", "Atom", "BACKEND_NAME", "BoundedSigma1", "Certificate", "Const", "Cos", "DeltaSat",
    "DeltaSatError", "Div", "DpllResult", "Exp", "FloatBox", "FloatInterval", "Flow", "IVP", "IcpConfig", "Max",
    "Min", "Mul", "Neg", "NonpositiveDelta", "Not", "Or", "ParseError", "Pow", "RationalInterval",
    "ResourceOut", "Sin", "StandardForm", "Sub", "Unsat", "Var", "certificate_check", "natural_extension",
    "solve", "solve_conjunction", "to_standard_form",
]

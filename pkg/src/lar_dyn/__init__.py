"""Preference dynamics on the probability simplex and its lifted phase space."""

from .errors import (
    ConvergenceError, DegenerateSpectrumError, DomainError, IllConditionedError,
    InvariantFailure, LarError, NumericalError, OrthogonalStartError, RangeError,
    ScenarioParseError, ScenarioValidationError, SingularMatrixError,
)
from .linalg import EigenDecomposition, expm, general_eig, linear_solve, sym_eig, sym_skew_split
from .onshell import PreferenceOperator, onshell_flow
from .lifted import PhaseState, lifted_flow

__version__ = "0.1.0"

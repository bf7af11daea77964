"""Exception hierarchy shared by the numerical modules and the CLI.

Every error carries a short machine-readable ``code`` and the process exit
status the CLI uses when the error escapes a run.
"""


class LarError(Exception):
    code = "E_LAR"
    exit_code = 5


class DomainError(LarError, ValueError):
    """Input outside an operation's precondition (shape, symmetry, support)."""

    code = "E_DOMAIN"


class NumericalError(LarError, ArithmeticError):
    code = "E_NUMERICAL"


class SingularMatrixError(NumericalError):
    code = "E_SINGULAR"


class ConvergenceError(NumericalError):
    code = "E_CONVERGENCE"


class RangeError(NumericalError, OverflowError):
    code = "E_RANGE"


class IllConditionedError(NumericalError):
    code = "E_ILL_CONDITIONED"


class DegenerateSpectrumError(NumericalError):
    code = "E_DEGENERATE_TOP"


class OrthogonalStartError(NumericalError):
    code = "E_ORTHOGONAL_START"


class ScenarioParseError(LarError):
    code = "E_PARSE"
    exit_code = 2


class ScenarioValidationError(LarError):
    code = "E_VALIDATION"
    exit_code = 3

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class InvariantFailure(LarError):
    code = "E_INVARIANT"
    exit_code = 4

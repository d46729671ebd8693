"""Exception hierarchy shared by all modules.

Validation problems (bad parameters, unsupported laws) derive from
`ValidationError`; numerical failures (overflow, non-convergence, poles)
derive from `NumericalError`.  The command-line runner maps the first
family to exit code 2 and the second to exit code 3.
"""


class Error(Exception):
    """Base class for package errors."""


class ValidationError(Error, ValueError):
    """Invalid parameters or unsupported model options."""


class DomainError(ValidationError):
    """Argument outside the validated domain of a special function."""


class NumericalError(Error, ArithmeticError):
    """A computation failed numerically."""


class MatrixOverflowError(NumericalError, OverflowError):
    """A matrix entry exceeded the overflow guard; renormalize first."""


class DivergenceError(NumericalError):
    """A running product produced a zero or non-finite norm."""


class NonConvergence(NumericalError):
    """An iteration failed to converge within its cap."""


class PoleHit(NumericalError):
    """Evaluation landed on a pole (an eigenvalue for real spectral parameter)."""


class TailUnresolved(NumericalError):
    """Histogram tails are too noisy or too short for a tail fit."""


class StepTooLarge(NumericalError):
    """SDE time step too coarse for the blow-up threshold."""


class FitUnstable(NumericalError):
    """Linear fit quality below the required threshold."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not reach the requested accuracy."""

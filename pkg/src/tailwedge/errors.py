"""Exception hierarchy.

Every message starts with a short tag (``below-mean``, ``moment-exploded``,
...) so that command-line diagnostics can be grepped.  Two families exist:
invalid input (the caller asked for something outside a precondition) and
numerical failure (the computation itself could not be carried out).
"""


class TailwedgeError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TailwedgeError, ValueError):
    """Arguments violate a documented precondition."""


class BelowMeanError(InvalidInputError):
    """Tail level at or below the mean, where the Legendre transform is zero."""


class PreconditionError(InvalidInputError):
    """Sign conditions on the superposition weights are not met."""


class NumericalError(TailwedgeError, ArithmeticError):
    """A numerical procedure failed or left its domain of validity."""


class DomainError(NumericalError):
    """Evaluation requested outside the domain of a function."""


class MomentExplodedError(DomainError):
    """The moment generating function is infinite at the requested horizon."""

    def __init__(self, t, t_star):
        self.t = t
        self.t_star = t_star
        super().__init__(f"moment-exploded at t*={t_star:.17g} (requested t={t:.17g})")


class ConvergenceError(NumericalError):
    """Root finding, quadrature, ODE integration or fitting did not converge."""

"""Exception hierarchy."""


class QSFormsError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(QSFormsError, ValueError):
    """An argument violates the documented preconditions of an operation."""


class RangeError(QSFormsError, ArithmeticError):
    """A result would leave the representable range (e.g. exp overflow)."""


class NotSectorialError(QSFormsError):
    """The form is not (quasi-)sectorial with the requested angle/vertex.

    ``report`` carries the failing :class:`~qsforms.forms.SectorCheckReport`
    when one is available.
    """

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class NotCoerciveError(QSFormsError):
    """The real part of a form on V is not positive definite."""


class WellDefinednessError(QSFormsError):
    """A map does not descend to the quotient by the seminorm kernel."""

    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals or {}


class ResolventSetError(QSFormsError):
    """The spectral parameter is not in the guaranteed resolvent set."""

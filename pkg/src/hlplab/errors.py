"""Exception hierarchy shared by all modules."""


class HLPLabError(Exception):
    """Base class for every error raised by hlplab."""


class DomainError(HLPLabError, ValueError):
    """Arguments outside the domain of an operation."""


class DivergenceError(HLPLabError, ArithmeticError):
    """A radial integral does not converge."""


class KernelAdmissibilityError(DivergenceError):
    """The nested kernel constant is infinite, so the kernel is not admissible."""


class UnsupportedShapeError(HLPLabError):
    """A piecewise function falls outside the class an exact routine handles."""


class IntegrandError(HLPLabError, FloatingPointError):
    """An integrand returned a non-finite value."""

    def __init__(self, message: str, abscissa: float):
        super().__init__(f"{message} (at r={abscissa!r})")
        self.abscissa = abscissa


class UnboundedNormError(HLPLabError, ArithmeticError):
    """A weak norm supremum is infinite."""


class HypothesisWarning(UserWarning):
    """Parameters violate a theorem hypothesis; the computation still runs."""

"""Exception hierarchy shared by all floquetkit modules."""


class FloquetError(Exception):
    """Base class for every error raised by floquetkit."""


class DimensionMismatch(FloquetError, ValueError):
    pass


# -- expr ---------------------------------------------------------------

class PolySyntaxError(FloquetError, ValueError):
    """Malformed polynomial text.  ``position`` is a 0-based column."""

    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        if text:
            message = f"{message} at column {position}\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class UnknownVariable(FloquetError, KeyError):
    def __init__(self, name, position=None):
        self.name = name
        self.position = position
        super().__init__(name)

    def __str__(self):
        where = "" if self.position is None else f" (column {self.position})"
        return f"unknown variable {self.name!r}{where}"


# -- specfun ------------------------------------------------------------

class DomainError(FloquetError, ValueError):
    pass


# -- numlin -------------------------------------------------------------

class NotSquare(DimensionMismatch):
    pass


class SingularMatrix(FloquetError, ArithmeticError):
    pass


class ConvergenceFailure(FloquetError, ArithmeticError):
    pass


class NoSolution(FloquetError, ArithmeticError):
    pass


# -- ode ----------------------------------------------------------------

class IntegrationError(FloquetError, RuntimeError):
    pass


class StepLimitExceeded(IntegrationError):
    pass


class StepUnderflow(IntegrationError):
    pass


# -- floquet / systems --------------------------------------------------

class HypothesisViolated(FloquetError):
    """A precondition of the cofactor method failed.

    ``check`` names the failed gate (``orbit``, ``invariance``,
    ``transversality``, ``gradient``) and ``value`` is the measured quantity.
    """

    def __init__(self, check, value, threshold, detail=""):
        self.check = check
        self.value = value
        self.threshold = threshold
        msg = f"{check} check failed: value {value:.3e} vs threshold {threshold:.1e}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class GradientVanishes(HypothesisViolated):
    def __init__(self, value, threshold=1e-8):
        super().__init__("gradient", value, threshold, "grad f vanishes on the orbit")


class InvalidParameters(FloquetError, ValueError):
    pass


class StructureViolation(FloquetError):
    pass

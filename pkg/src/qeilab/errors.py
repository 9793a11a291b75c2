"""Exception hierarchy for qeilab."""


class QeiLabError(Exception):
    """Base class for all errors raised by this package."""


class ModelSpecError(QeiLabError, ValueError):
    """A ModelSpec does not satisfy its invariants."""


class ConjugationViolation(ModelSpecError):
    pass


class RangeViolation(ModelSpecError):
    pass


class MassViolation(ModelSpecError):
    pass


class PoleEncountered(QeiLabError, ArithmeticError):
    pass


class StripViolation(QeiLabError, ValueError):
    """Argument lies outside the strip where the integral representation converges."""


class QuadratureFailure(QeiLabError, RuntimeError):
    pass


class ResidualImaginary(QeiLabError, ArithmeticError):
    """Imaginary parts of conjugate-pair contributions failed to cancel."""


class DivergentLimit(QeiLabError, ArithmeticError):
    pass


class GridTooSmall(QeiLabError, ValueError):
    pass


class WitnessNotFound(QeiLabError, RuntimeError):
    pass


class NonConvergent(QeiLabError, RuntimeError):
    pass


class ConvergenceFailure(QeiLabError, RuntimeError):
    pass


class DegenerateFit(QeiLabError, ValueError):
    pass


class ConfigError(QeiLabError, ValueError):
    """Malformed sweep configuration or CLI input."""

"""Exception hierarchy shared by every module of the package."""


class QMMError(Exception):
    """Base class for all package errors."""


class ValidationError(QMMError, ValueError):
    """A configuration or run card violates a stated constraint."""


class DomainError(QMMError, ValueError):
    """An analytic formula was evaluated outside its domain of definition."""


class DegenerateInputError(QMMError, ValueError):
    """Inputs make an operation singular (for example orthogonal states)."""


class RangeError(QMMError, ValueError):
    """A history query fell outside the recorded time coverage."""


class PoleError(QMMError, ArithmeticError):
    """A polar-angle evaluation came too close to a Bloch-sphere pole."""


class AccuracyError(QMMError, ArithmeticError):
    """The integrator detected a step-size induced loss of accuracy."""

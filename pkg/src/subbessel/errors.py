"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class QuadratureError(ArithmeticError):
    """An adaptive rule exhausted its budget before reaching tolerance.

    ``point`` carries the evaluation point when a caller knows it.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class HypothesisError(ValueError):
    """A point violates the hypothesis of the inequality being checked."""


class ConfigError(ValueError):
    """A verification config failed validation; ``path`` names the field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path

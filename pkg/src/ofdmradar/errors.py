"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or out-of-domain input."""


class NumericError(ArithmeticError):
    """Numerical failure (non-finite iterates, factorization breakdown, divergence)."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class DegenerateDictionaryError(NumericError):
    """Least-squares dictionary is rank deficient beyond tolerance."""

    def __init__(self, message, pairs=None):
        super().__init__(message)
        self.pairs = list(pairs) if pairs else []

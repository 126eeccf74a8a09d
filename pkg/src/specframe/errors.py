class InvalidArgument(ValueError):
    pass


class DegenerateSupportError(ValueError):
    """The spectral support of the generating function is (numerically) empty."""


class ConfigError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class NumericWarning(UserWarning):
    """Truncation tail, solver budget or boundedness probe out of tolerance."""

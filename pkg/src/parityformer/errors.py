class IndeterminateDecision(ArithmeticError):
    """The decision coordinate came out exactly zero."""


class ConfigurationError(ValueError):
    pass


class DocumentError(ValueError):
    """Malformed spec or trace document; ``location`` names the bad field."""

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)

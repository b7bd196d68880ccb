"""Exception types shared across the package."""


class WahtorError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(WahtorError, ValueError):
    """A system, ansatz or generator specification is malformed."""


class CapabilityError(WahtorError):
    """The request exceeds what this implementation supports (e.g. too many orbitals)."""


class FcidumpError(WahtorError, ValueError):
    """FCIDUMP parsing failed; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConsistencyError(WahtorError, ArithmeticError):
    """A quantity that must be real (or otherwise constrained) fell outside tolerance."""


class ConfigError(WahtorError, ValueError):
    """Experiment configuration file is invalid."""

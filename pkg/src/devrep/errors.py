"""Exception hierarchy shared across the package.

CLI exit codes: ValidationError and its subclasses map to 1,
ConvergenceError to 2.
"""


class DevrepError(Exception):
    """Base class for all devrep errors."""


class ValidationError(DevrepError):
    """Invalid input, argument, or configuration."""


class InputError(ValidationError):
    """A source stream or file could not be read."""


class CorruptInputError(InputError):
    """More than half of an event stream failed to parse."""


class SamplingError(ValidationError):
    """A survey sample could not be drawn; message names the group."""


class StaleArtifactError(ValidationError):
    """A workspace artifact no longer matches the inputs that produced it."""


class ConvergenceError(DevrepError):
    """An iterative computation did not converge within its budget."""

"""Exception taxonomy shared across the package.

CLI exit codes: config problems exit 2, data problems exit 3, verification
failures exit 4 (see cli.main).
"""


class GscnetError(Exception):
    """Base class for all package errors."""


class InputError(GscnetError, ValueError):
    """Structurally invalid argument: bad index, shape mismatch, bad range."""


class DegenerateInputError(InputError):
    """Input is well-formed but degenerate for the operation (e.g. no edges)."""


class SizeGuardError(InputError):
    """A dense verification tool was asked to densify beyond its guard."""


class ContractViolationError(InputError):
    """A caller broke a stated mathematical hypothesis (e.g. negative weight
    passed to a non-negative-combination check)."""


class DataError(GscnetError):
    """Malformed or inconsistent dataset files; carries file/line context."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc = f" [{loc}]"
        super().__init__(message + loc)
        self.path = path
        self.line = line


class ConfigError(GscnetError):
    """Invalid experiment configuration."""

"""Exception types shared across the simulator.

ConfigError maps to CLI exit code 2, DataError to exit code 3.
"""


class InferwattError(Exception):
    """Base class for all simulator errors."""


class ConfigError(InferwattError):
    """Invalid configuration value or inconsistent parameter combination."""


class UnknownProfileError(ConfigError):
    """Requested GPU or model profile is not in the builtin catalog."""

    def __init__(self, kind: str, name: str, available: list[str]):
        self.kind = kind
        self.name = name
        self.available = sorted(available)
        super().__init__(
            f"unknown {kind} profile '{name}'; available: {', '.join(self.available)}"
        )


class CapacityError(ConfigError):
    """A single request does not fit the cluster's token budget."""


class DataError(InferwattError):
    """Malformed input file or trace that does not cover the required window."""


class ParseError(DataError):
    """CSV/config parse failure; carries a line number when known."""

    def __init__(self, path: str, line: int | None, message: str):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")


class CoverageError(DataError):
    """An environment trace does not span the requested simulation window."""

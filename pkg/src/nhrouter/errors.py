"""Exception hierarchy shared by the solvers and the command line."""


class RouterError(Exception):
    """Base class for all package errors."""


class SolverError(RouterError):
    """A numerical solve or integration did not produce a valid result."""


class NonUniqueSteadyState(SolverError):
    def __init__(self, kernel_dim):
        self.kernel_dim = kernel_dim
        super().__init__(f"non-unique steady state: kernel dimension {kernel_dim}")


class NoSteadyState(SolverError):
    """The generator has no unit-trace fixed point (e.g. it is trace-decreasing)."""


class IntegrationError(SolverError):
    def __init__(self, message, t):
        self.t = t
        super().__init__(f"{message} at t={t!r}")


class FullyBlocked(RouterError):
    """A qubit channel transmitted (numerically) nothing."""


class ConfigError(RouterError):
    """Invalid configuration; ``field`` names the offending dotted path."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(field)
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)

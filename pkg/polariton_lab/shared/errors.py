"""Exception hierarchy for polariton_lab.

Every domain failure raised by the library derives from ``PolaritonError`` so the
runner can turn it into a nonzero exit status with one ``except`` clause.
"""

from typing import Optional


class PolaritonError(Exception):
    """Base class for all simulator errors."""


class PoleError(PolaritonError):
    """Undamped response evaluated at (or numerically on top of) a resonance pole."""


class OutOfCavityError(PolaritonError):
    """A field point or sample volume lies outside the cavity box."""


class DegenerateFieldError(PolaritonError):
    """Polarisation requested where the field vanishes."""


class UnsupportedModePairError(PolaritonError):
    """Closed-form energy requested for a geometry it was not derived for."""


class GridError(PolaritonError):
    """Sweep grid is empty, non-finite or not strictly monotone."""


class ParameterError(PolaritonError):
    """A scalar argument lies outside its physical range."""


class StepTooLargeError(PolaritonError):
    """Time step does not resolve the precession."""


class NotSettledError(PolaritonError):
    """Trajectory window has not reached a steady precession cone."""


class NoDipError(PolaritonError):
    """Spectrum has no interior extremum to fit."""


class NonConvergenceError(PolaritonError):
    """Least-squares fit hit its iteration cap."""


class UnresolvedSplittingError(PolaritonError):
    """Hybrid dips merge; no splitting can be reported."""


class ConfigError(PolaritonError):
    """Invalid run configuration.

    ``diagnostics`` lists one human-readable entry per problem (``field.path: message``
    or ``line N, column M: message``).
    """

    def __init__(self, message: str, diagnostics: Optional[list] = None):
        self.diagnostics = list(diagnostics or [])
        if self.diagnostics:
            message = message + "\n  " + "\n  ".join(self.diagnostics)
        super().__init__(message)


class ParseError(PolaritonError):
    """Malformed row in an ingested spectra file."""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class UnitError(PolaritonError):
    """Spectra file does not declare unambiguous frequency units."""

"""Exception and warning types raised by the numerical engine."""


class ThermoWeakError(Exception):
    """Base class for all errors raised by this package."""


class OrthogonalSelection(ThermoWeakError, ValueError):
    """Pre- and post-selected states are (numerically) orthogonal."""


class ZeroPostselection(ThermoWeakError):
    """The all-order post-selection probability vanishes."""


class GridUnderresolved(ThermoWeakError):
    """The momentum grid truncates or undersamples the state."""


class ImaginaryDenominator(ThermoWeakError):
    """A closed-form SNR radicand came out negative."""


class SingularCovariance(ThermoWeakError, ValueError):
    """Covariance matrix determinant below tolerance."""


class DegenerateSupport(ThermoWeakError):
    """The derivative carries weight on the numerical null space of the state."""


class NonPositiveState(ThermoWeakError):
    """A discretized density matrix has significantly negative eigenvalues."""


class ConfigError(ThermoWeakError, ValueError):
    """Invalid sweep configuration.

    ``line`` and ``field`` locate the problem when it comes from a file.
    """

    def __init__(self, message, *, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class ValidityWarning(UserWarning):
    """The weak-coupling approximation is outside its range of validity."""

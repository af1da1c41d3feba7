"""Exceptions raised by pinsker-lib.

Everything derives from ValueError so callers that already guard numeric
input with ``except ValueError`` keep working.
"""


class PinskerError(ValueError):
    """Base class for library errors."""


class GridError(PinskerError):
    """Invalid grid: bad support, size that is not a power of two, step mismatch."""


class SpectralTailError(PinskerError):
    """Too much multiplier-weighted energy near the edge of the frequency band."""

    def __init__(self, fraction, threshold, omega_max, advice=None):
        if advice is None:
            advice = "increase omega_max beyond %.6g (refine the grid)" % omega_max
        super().__init__(
            "Spectral check failed: %.3g exceeds the limit %.3g; %s"
            % (fraction, threshold, advice)
        )
        self.fraction = fraction
        self.threshold = threshold
        self.omega_max = omega_max


class SymmetryError(PinskerError):
    """Spectrum is not Hermitian, its inverse would not be real."""


class DensityError(PinskerError):
    """Input is not a density or not a characteristic function."""


class ParameterError(PinskerError):
    """Argument outside its admissible range."""


class ConfigError(PinskerError):
    """Unknown key or badly typed value in an experiment config."""


class AcceptanceError(PinskerError):
    """An acceptance criterion failed."""

    def __init__(self, criterion, detail):
        super().__init__("criterion %s failed: %s" % (criterion, detail))
        self.criterion = criterion
        self.detail = detail

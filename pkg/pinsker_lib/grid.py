"""
  Grid-sampled functions in the time and frequency domains.
"""

import math
from collections import namedtuple

import attr
import numpy as np

from .const import (
    DEFAULT_GRID_POINTS,
    DENSITY_MASS_TOL,
    DENSITY_NEGATIVE_TOL,
)
from .errors import DensityError, GridError, ParameterError
from .util import is_power_of_two, next_power_of_two

Membership = namedtuple("Membership", "member, margin")


def _read_only(values, dtype):
    array = np.array(values, dtype=dtype)
    array.flags.writeable = False
    return array


def _real_values(values):
    return _read_only(values, np.float64)


def _complex_values(values):
    return _read_only(values, np.complex128)


def _check_size(instance, attribute, value):
    if value < 2 or not is_power_of_two(value):
        raise GridError("Grid size must be a power of two >= 2, got %s" % value)


@attr.s(frozen=True)
class Grid:
    """Uniform grid x_j = lo + j*dx, j < n_points, dx = (hi - lo)/n_points."""

    lo = attr.ib(converter=float)
    hi = attr.ib(converter=float)
    n_points = attr.ib(converter=int, default=DEFAULT_GRID_POINTS, validator=_check_size)

    def __attrs_post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo >= self.hi:
            raise GridError("Invalid support [%s, %s)" % (self.lo, self.hi))

    @classmethod
    def centered(cls, half_width, n_points=DEFAULT_GRID_POINTS):
        """Grid on [-half_width, half_width)."""
        return cls(-half_width, half_width, n_points)

    @classmethod
    def padded(cls, lo, hi, padding, n_points=DEFAULT_GRID_POINTS):
        """Grid on the interval [lo, hi] widened `padding` times around its centre."""
        if padding < 1:
            raise GridError("Padding factor must be >= 1, got %s" % padding)
        centre = 0.5 * (lo + hi)
        half = 0.5 * padding * (hi - lo)
        return cls(centre - half, centre + half, n_points)

    @classmethod
    def with_step(cls, dx, min_half_width):
        """Zero-centred grid with step dx covering [-min_half_width, min_half_width]."""
        n_points = next_power_of_two(max(2.0 * min_half_width / dx, 2))
        return cls(-0.5 * n_points * dx, 0.5 * n_points * dx, n_points)

    @property
    def length(self):
        """Period of the grid."""
        return self.hi - self.lo

    @property
    def dx(self):
        """Sample spacing."""
        return self.length / self.n_points

    @property
    def x(self):
        """Sample locations."""
        return self.lo + self.dx * np.arange(self.n_points)

    @property
    def nyquist(self):
        """Nyquist frequency pi/dx."""
        return math.pi / self.dx

    @property
    def d_omega(self):
        """Frequency spacing of the grid's discrete transform."""
        return 2.0 * math.pi / self.length

    @property
    def omegas(self):
        """Frequency lattice [-nyquist, nyquist) matching the discrete transform."""
        return -self.nyquist + self.d_omega * np.arange(self.n_points)

    def same_step(self, other, rtol=1e-12):
        """True if both grids share the sample spacing."""
        return math.isclose(self.dx, other.dx, rel_tol=rtol)

    def widened(self, left, right):
        """Grid with the same step extended by at least left/right on each side."""
        steps_left = int(math.ceil(left / self.dx - 1e-9))
        steps_right = int(math.ceil(right / self.dx - 1e-9))
        count = next_power_of_two(self.n_points + steps_left + steps_right)
        lo = self.lo - steps_left * self.dx
        return Grid(lo, lo + count * self.dx, count)


@attr.s(frozen=True, eq=False)
class GridFunction:
    """Real function sampled on a Grid."""

    grid = attr.ib(validator=attr.validators.instance_of(Grid))
    values = attr.ib(converter=_real_values)
    density = attr.ib(default=False, converter=bool)

    def __attrs_post_init__(self):
        if self.values.shape != (self.grid.n_points,):
            raise GridError(
                "Expected %d samples, got shape %s" % (self.grid.n_points, self.values.shape)
            )
        if not np.all(np.isfinite(self.values)):
            raise GridError("Grid function holds non-finite samples")
        if self.density:
            self.check_density()

    @property
    def support_lo(self):
        """Left end of the support interval."""
        return self.grid.lo

    @property
    def support_hi(self):
        """Right end of the support interval."""
        return self.grid.hi

    @property
    def n_points(self):
        """Number of samples."""
        return self.grid.n_points

    @property
    def dx(self):
        """Sample spacing."""
        return self.grid.dx

    @property
    def x(self):
        """Sample locations."""
        return self.grid.x

    def integral(self):
        """Trapezoid rule over one grid period."""
        return float(self.dx * np.sum(self.values))

    def norm_sq(self):
        """Squared L2 norm."""
        return float(self.dx * np.sum(self.values**2))

    def check_density(self):
        """Raise DensityError unless the samples are a probability density."""
        low = float(np.min(self.values))
        if low < -DENSITY_NEGATIVE_TOL:
            raise DensityError("Density takes negative value %.3g" % low)
        mass = self.integral()
        if abs(mass - 1.0) > DENSITY_MASS_TOL:
            raise DensityError("Density integrates to %.12g, not 1" % mass)

    def is_density(self):
        """True if check_density passes."""
        try:
            self.check_density()
        except DensityError:
            return False
        return True

    def as_density(self):
        """Same samples flagged as a density (checked)."""
        return GridFunction(self.grid, self.values, density=True)

    def with_values(self, values, density=False):
        """New function on the same grid."""
        return GridFunction(self.grid, values, density=density)

    def __call__(self, points):
        """Linear interpolation, zero outside the grid."""
        return np.interp(points, self.x, self.values, left=0.0, right=0.0)

    def resample(self, grid, density=False):
        """Interpolate onto another grid (exact on aligned nodes)."""
        return GridFunction(grid, self(grid.x), density=density)


@attr.s(frozen=True, eq=False)
class SpectralFunction:
    """Complex function sampled on the symmetric frequency grid [-omega_max, omega_max)."""

    omega_max = attr.ib(converter=float)
    values = attr.ib(converter=_complex_values)

    def __attrs_post_init__(self):
        if not self.omega_max > 0:
            raise GridError("omega_max must be positive, got %s" % self.omega_max)
        _check_size(self, None, len(self.values))
        if not np.all(np.isfinite(self.values)):
            raise GridError("Spectral function holds non-finite samples")

    @property
    def n_points(self):
        """Number of frequency samples."""
        return len(self.values)

    @property
    def d_omega(self):
        """Frequency spacing."""
        return 2.0 * self.omega_max / self.n_points

    @property
    def omegas(self):
        """Frequency sample locations."""
        return -self.omega_max + self.d_omega * np.arange(self.n_points)

    @property
    def zero_index(self):
        """Index of omega = 0."""
        return self.n_points // 2

    def at_zero(self):
        """Value at omega = 0."""
        return complex(self.values[self.zero_index])

    def hermitian_defect(self):
        """max |F(-w) - conj F(w)| relative to max |F|, over bins that have a partner."""
        scale = float(np.max(np.abs(self.values)))
        if scale == 0.0:
            return 0.0
        head = self.values[1:]
        mirrored = np.conj(self.values[:0:-1])
        return float(np.max(np.abs(head - mirrored))) / scale

    def hermitian_part(self):
        """(F(w) + conj F(-w))/2 on paired bins; the unpaired -omega_max bin is kept."""
        values = self.values.copy()
        values[1:] = 0.5 * (self.values[1:] + np.conj(self.values[:0:-1]))
        return self.with_values(values)

    def with_values(self, values):
        """New spectrum on the same frequency grid."""
        return SpectralFunction(self.omega_max, values)


@attr.s(frozen=True)
class SobolevClass:
    """Densities with (1/2pi) int |w|^(2 beta) |f^(w)|^2 dw <= L."""

    beta = attr.ib(converter=float)
    L = attr.ib(converter=float)

    def __attrs_post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ParameterError("Smoothness beta must be > 0, got %s" % self.beta)
        if not (math.isfinite(self.L) and self.L > 0):
            raise ParameterError("Budget L must be finite and > 0, got %s" % self.L)

    def require_lower_bound_range(self):
        """Lower-bound routines need beta > 1/2."""
        if self.beta <= 0.5:
            raise ParameterError(
                "Lower-bound construction needs beta > 1/2, got %s" % self.beta
            )

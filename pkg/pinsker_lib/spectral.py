"""Fourier bridge, fractional derivatives and Sobolev seminorms on uniform grids.

Conventions: f^(w) = int f(x) exp(i w x) dx and
f(x) = (1/2pi) int F(w) exp(-i x w) dw. Both directions are Riemann sums on
the grid, evaluated with an FFT when the frequency lattice is the grid's own
(omega_max = pi/dx) and with a chirp-z transform otherwise.
"""

import logging
import math

import numpy as np
from scipy import signal

from .const import HERMITIAN_TOL, TAIL_FRACTION, TAIL_THRESHOLD
from .errors import GridError, ParameterError, SpectralTailError, SymmetryError
from .grid import Grid, GridFunction, Membership, SpectralFunction
from .util import next_power_of_two

LOG = logging.getLogger(__name__)


def _phase_sum(values, t0, dt, s0, ds, count, sign):
    """Return sum_n values[n] exp(sign i (s0 + k ds)(t0 + n dt)) for k < count."""
    size = len(values)
    weighted = values * np.exp(sign * 1j * s0 * dt * np.arange(size))
    if count == size and math.isclose(ds * dt * size, 2.0 * math.pi, rel_tol=1e-12):
        if sign > 0:
            core = size * np.fft.ifft(weighted)
        else:
            core = np.fft.fft(weighted)
    else:
        core = signal.czt(weighted, m=count, w=np.exp(sign * 1j * ds * dt), a=1.0)
    return core * np.exp(sign * 1j * (s0 + ds * np.arange(count)) * t0)


def forward_transform(f, omega_max=None):
    """Sample f^(w) on [-omega_max, omega_max); default omega_max is the Nyquist frequency."""
    grid = f.grid
    if omega_max is None:
        omega_max = grid.nyquist
    if not omega_max > 0:
        raise GridError("omega_max must be positive, got %s" % omega_max)
    size = grid.n_points
    values = grid.dx * _phase_sum(
        f.values, grid.lo, grid.dx, -omega_max, 2.0 * omega_max / size, size, 1
    )
    return SpectralFunction(omega_max, values)


def inverse_transform(spectrum, support=None, n_points=None, tolerance=HERMITIAN_TOL):
    """Real grid function whose transform is `spectrum`.

    Without a support the grid is the one dual to the frequency lattice,
    centred on zero.
    """
    defect = spectrum.hermitian_defect()
    if defect > tolerance:
        raise SymmetryError(
            "Spectrum is not Hermitian (defect %.3g > %.3g)" % (defect, tolerance)
        )
    if n_points is None:
        n_points = spectrum.n_points
    if support is None:
        half = math.pi / spectrum.d_omega
        grid = Grid(-half, half, n_points)
    else:
        grid = Grid(support[0], support[1], n_points)
    values = _phase_sum(
        spectrum.values,
        -spectrum.omega_max,
        spectrum.d_omega,
        grid.lo,
        grid.dx,
        grid.n_points,
        -1,
    )
    return GridFunction(grid, spectrum.d_omega / (2.0 * math.pi) * values.real)


def multiplier(omegas, gamma):
    """(-i w)^gamma on the principal branch: |w|^gamma exp(-i sgn(w) gamma pi/2)."""
    return np.abs(omegas) ** gamma * np.exp(-1j * np.sign(omegas) * gamma * math.pi / 2)


def tail_fraction(spectrum, order=0.0):
    """Share of the |w|^(2 order)-weighted energy beyond TAIL_FRACTION*omega_max."""
    power = np.abs(spectrum.values) ** 2
    if order != 0:
        power = power * np.abs(spectrum.omegas) ** (2.0 * order)
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    edge = np.abs(spectrum.omegas) > TAIL_FRACTION * spectrum.omega_max
    return float(np.sum(power[edge])) / total


def check_tail(spectrum, order=0.0, threshold=TAIL_THRESHOLD):
    """Raise SpectralTailError if the band edge carries too much weighted energy."""
    fraction = tail_fraction(spectrum, max(order, 0.0))
    LOG.debug("Tail fraction %.3g at order %g", fraction, order)
    if fraction > threshold:
        raise SpectralTailError(fraction, threshold, spectrum.omega_max)
    return fraction


def weighted_energy(spectrum, order):
    """(1/2pi) sum |w|^(2 order) |F(w)|^2 dw over the frequency grid.

    Orders in (-1/2, 0) use the exact cell average of |w|^(2 order) in the
    w = 0 cell. For order > 0 the unpaired Nyquist bin is left out, as
    fractional_derivative does.
    """
    if order <= -0.5:
        raise ParameterError("Weighted energy needs order > -1/2, got %s" % order)
    d_omega = spectrum.d_omega
    power = np.abs(spectrum.values) ** 2
    if order == 0:
        return float(d_omega / (2.0 * math.pi) * np.sum(power))
    omegas = spectrum.omegas
    weights = np.zeros_like(omegas)
    nonzero = omegas != 0
    weights[nonzero] = np.abs(omegas[nonzero]) ** (2.0 * order)
    if order < 0:
        exponent = 2.0 * order + 1.0
        weights[spectrum.zero_index] = 2.0 * (d_omega / 2) ** exponent / exponent / d_omega
    else:
        weights[0] = 0.0
    return float(d_omega / (2.0 * math.pi) * np.sum(weights * power))


def fractional_derivative(f, gamma, threshold=TAIL_THRESHOLD):
    """Inverse transform of (-i w)^gamma f^(w); gamma = 0 returns f unchanged."""
    if gamma < 0:
        raise ParameterError("Derivative order must be >= 0, got %s" % gamma)
    if gamma == 0:
        return GridFunction(f.grid, f.values)
    spectrum = forward_transform(f)
    defect = spectrum.hermitian_defect()
    if defect > HERMITIAN_TOL:
        raise SymmetryError("Spectrum of f is not Hermitian (defect %.3g)" % defect)
    check_tail(spectrum, gamma, threshold)
    factor = multiplier(spectrum.omegas, gamma)
    factor[0] = 0.0  # Nyquist bin has no mirror
    # rounding noise scaled by |w|^gamma is not Hermitian
    product = spectrum.with_values(spectrum.values * factor).hermitian_part()
    return inverse_transform(
        product,
        (f.support_lo, f.support_hi),
        f.n_points,
    )


def sobolev_seminorm_sq(f, beta, threshold=TAIL_THRESHOLD):
    """(1/2pi) int |w|^(2 beta) |f^(w)|^2 dw."""
    if beta < 0:
        raise ParameterError("Seminorm order must be >= 0, got %s" % beta)
    spectrum = forward_transform(f)
    check_tail(spectrum, beta, threshold)
    return weighted_energy(spectrum, beta)


def class_membership(f, cls, threshold=TAIL_THRESHOLD):
    """Membership of the density f in the Sobolev class, with margin L - seminorm^2."""
    f.check_density()
    seminorm = sobolev_seminorm_sq(f, cls.beta, threshold)
    margin = cls.L - seminorm
    return Membership(margin >= 0, margin)


def convolve(f, g):
    """Linear convolution (f*g)(x) = int f(t) g(x - t) dt of two grid functions."""
    if not f.grid.same_step(g.grid):
        raise GridError("Convolution needs a common step, got %g and %g" % (f.dx, g.dx))
    dx = f.dx
    full = signal.fftconvolve(f.values, g.values) * dx
    size = next_power_of_two(len(full))
    values = np.zeros(size)
    values[: len(full)] = full
    lo = f.support_lo + g.support_lo
    return GridFunction(Grid(lo, lo + size * dx, size), values)

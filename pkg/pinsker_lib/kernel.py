"""Pinsker's constant and the minimax kernel of the Sobolev class."""

import functools
import logging
import math

import attr
import numpy as np
from scipy import special

from .const import (
    DEFAULT_GRID_POINTS,
    DEFAULT_KERNEL_HALF_WIDTH,
    KERNEL_PEAK_TOL,
    KERNEL_TAIL_TOL,
)
from .errors import GridError, ParameterError, SpectralTailError
from .grid import Grid, SpectralFunction
from .spectral import inverse_transform

LOG = logging.getLogger(__name__)


def _positive(instance, attribute, value):
    if not (math.isfinite(value) and value > 0):
        raise ParameterError("%s must be finite and > 0, got %s" % (attribute.name, value))


@attr.s(frozen=True)
class KernelSpec:
    """Kernel with transform (1 - c|w|^beta)_+."""

    beta = attr.ib(converter=float, validator=_positive)
    c = attr.ib(converter=float, validator=_positive)

    @classmethod
    def minimax(cls, sobolev, n):
        """Kernel of the minimax estimator for sample size n."""
        return cls(sobolev.beta, c_min(sobolev, n))

    @property
    def omega_edge(self):
        """Frequency where the transform reaches zero."""
        return self.c ** (-1.0 / self.beta)

    @property
    def peak(self):
        """K(0) = (1/2pi) int K^(w) dw."""
        return self.beta / (self.beta + 1.0) * self.omega_edge / math.pi


def _factor(sobolev):
    beta = sobolev.beta
    return math.pi * (2 * beta + 1) * (beta + 1) / beta


def pinsker_constant(sobolev):
    """gamma(beta, L) = (2b+1) (pi(2b+1)(b+1)/b)^(-2b/(2b+1)) L^(1/(2b+1))."""
    beta = sobolev.beta
    return (
        (2 * beta + 1)
        * _factor(sobolev) ** (-2 * beta / (2 * beta + 1))
        * sobolev.L ** (1 / (2 * beta + 1))
    )


def c_min(sobolev, n):
    """c_min = (n L pi(2b+1)(b+1)/b)^(-b/(2b+1))."""
    if not n >= 1:
        raise ParameterError("Sample size must be >= 1, got %s" % n)
    beta = sobolev.beta
    return (n * sobolev.L * _factor(sobolev)) ** (-beta / (2 * beta + 1))


def kernel_hat(spec, omega):
    """max(0, 1 - c |w|^beta); scalar in, scalar out."""
    values = np.maximum(0.0, 1.0 - spec.c * np.abs(omega) ** spec.beta)
    if np.ndim(values) == 0:
        return float(values)
    return values


def kernel_tail_mass(spec, half_width):
    """Bound on |int_{|x| > H} K| for the support [-H, H].

    Two terms: the |w|^beta kink of K^ at the origin gives a tail
    c Gamma(beta+1) sin(pi beta/2) / (pi |x|^(1+beta)), and the corner at the
    edge frequency an oscillating tail of amplitude beta / (pi omega_edge x^2).
    """
    if not half_width > 0:
        raise GridError("Kernel half-width must be positive, got %s" % half_width)
    beta = spec.beta
    origin = (
        2.0
        * spec.c
        * special.gamma(beta)
        * abs(math.sin(math.pi * beta / 2))
        / (math.pi * half_width**beta)
    )
    edge = 4.0 * beta / (math.pi * spec.omega_edge**2 * half_width**2)
    return origin + edge


def kernel_half_width(spec, tail_tol=KERNEL_TAIL_TOL):
    """Smallest half-width, at least DEFAULT_KERNEL_HALF_WIDTH, with tail mass <= tail_tol."""
    if not tail_tol > 0:
        raise ParameterError("Tail tolerance must be > 0, got %s" % tail_tol)
    beta = spec.beta
    origin = 2.0 * spec.c * special.gamma(beta) * abs(math.sin(math.pi * beta / 2)) / math.pi
    edge = 4.0 * beta / (math.pi * spec.omega_edge**2)
    half = DEFAULT_KERNEL_HALF_WIDTH
    if origin > 0:
        half = max(half, (2.0 * origin / tail_tol) ** (1.0 / beta))
    return max(half, math.sqrt(2.0 * edge / tail_tol))


@functools.lru_cache(maxsize=32)
def _kernel_on_grid(spec, grid, tail_tol):
    if not grid.lo < 0 < grid.hi:
        raise GridError("Kernel support %s must contain 0" % (grid,))
    if grid.nyquist <= spec.omega_edge:
        raise GridError(
            "Grid Nyquist frequency %.6g does not reach the kernel edge %.6g; refine the grid"
            % (grid.nyquist, spec.omega_edge)
        )
    tail = kernel_tail_mass(spec, min(-grid.lo, grid.hi))
    if tail > tail_tol:
        raise SpectralTailError(
            tail,
            tail_tol,
            grid.nyquist,
            advice="widen the kernel support to +-%.6g" % kernel_half_width(spec, tail_tol),
        )
    spectrum = SpectralFunction(grid.nyquist, kernel_hat(spec, grid.omegas))
    kernel = inverse_transform(spectrum, (grid.lo, grid.hi), grid.n_points)
    peak = float(kernel(0.0))
    error = abs(peak - spec.peak) / spec.peak
    LOG.debug(
        "Kernel beta=%g c=%.6g on %s: tail mass <= %.3g, K(0)=%.12g, relative error %.3g",
        spec.beta,
        spec.c,
        grid,
        tail,
        peak,
        error,
    )
    if error > KERNEL_PEAK_TOL:
        raise SpectralTailError(error, KERNEL_PEAK_TOL, grid.nyquist)
    return kernel


def kernel_time_domain(spec, support=None, n_points=DEFAULT_GRID_POINTS, tail_tol=KERNEL_TAIL_TOL):
    """Kernel K on the grid, the inverse of K^ on the grid's frequency lattice.

    Without a support the half-width is kernel_half_width(spec, tail_tol).
    The samples are the kernel folded onto one grid period, so their integral
    is exactly K^(0) = 1; the mass the fold moves is bounded by
    kernel_tail_mass and must stay within tail_tol. K(0) is also compared
    with its closed form.
    """
    if support is None:
        half = kernel_half_width(spec, tail_tol)
        support = (-half, half)
    return _kernel_on_grid(spec, Grid(support[0], support[1], n_points), tail_tol)

"""Kernel density estimation with the minimax kernel, and its risk."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import attr
import numpy as np
from scipy import special

from .const import (
    CHARACTERISTIC_TOL,
    KERNEL_MASS_TOL,
    KERNEL_TAIL_TOL,
    MAX_KERNEL_POINTS,
    SUPPORT_CUTOFF,
)
from .errors import DensityError, GridError, ParameterError, SpectralTailError
from .grid import Grid, GridFunction
from .kernel import KernelSpec, kernel_half_width, kernel_hat, kernel_time_domain
from .rng import generator_of
from .spectral import class_membership, convolve, forward_transform, sobolev_seminorm_sq
from .util import compensated_mean, next_power_of_two

LOG = logging.getLogger(__name__)

MAX_REJECTION_ROUNDS = 10000


def _read_only(values):
    array = np.array(values, dtype=np.float64)
    array.flags.writeable = False
    return array


@attr.s(frozen=True, eq=False)
class Sample:
    """Observations and the stream they were drawn from."""

    values = attr.ib(converter=_read_only)
    lineage = attr.ib(default="")

    def __attrs_post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("Sample holds non-finite values")

    def __len__(self):
        return len(self.values)


@attr.s(frozen=True)
class MiseEstimate:
    """Monte Carlo estimate of E ||f_n - f||^2."""

    mean = attr.ib(converter=float)
    std_error = attr.ib(converter=float)
    replications = attr.ib(converter=int)
    n = attr.ib(converter=int)


MiseTerms = attr.make_class("MiseTerms", ["variance", "bias"], frozen=True)


def gaussian_density(grid, scale=1.0):
    """Centred normal density with standard deviation `scale`, renormalized on the grid."""
    x = grid.x
    values = np.exp(-0.5 * (x / scale) ** 2) / (scale * math.sqrt(2 * math.pi))
    values /= grid.dx * np.sum(values)
    return GridFunction(grid, values, density=True)


def gaussian_seminorm_sq(beta, scale=1.0):
    """Analytic (1/2pi) int |w|^(2 beta) exp(-s^2 w^2) dw."""
    return special.gamma(beta + 0.5) / (2 * math.pi * scale ** (2 * beta + 1))


def in_class_scale(sobolev, fill=0.9):
    """Smallest scale >= 1 whose Gaussian uses at most `fill` of the class budget."""
    ratio = gaussian_seminorm_sq(sobolev.beta) / (fill * sobolev.L)
    return max(1.0, ratio ** (1.0 / (2 * sobolev.beta + 1)))


def in_class_gaussian(sobolev, grid, fill=0.9):
    """Gaussian density of the class: standard unless it must be widened."""
    scale = in_class_scale(sobolev, fill)
    LOG.debug("In-class Gaussian for %s uses scale %.6g", sobolev, scale)
    return gaussian_density(grid, scale)


def rejection_sample(f, n, stream, batch=None):
    """Draw n points from the piecewise-linear density f by uniform rejection."""
    f.check_density()
    if n < 1:
        raise ParameterError("Sample size must be >= 1, got %s" % n)
    generator = generator_of(stream)
    values = f.values
    ceiling = float(np.max(values))
    inside = np.nonzero(values > ceiling * SUPPORT_CUTOFF)[0]
    lo, hi = f.x[inside[0]], f.x[inside[-1]]
    if hi <= lo:
        lo, hi = lo - f.dx, hi + f.dx
    acceptance = 1.0 / (ceiling * (hi - lo))
    if batch is None:
        batch = int(min(max(1.2 * n / acceptance, 1024), 2**22))
    draws = []
    accepted = 0
    for _ in range(MAX_REJECTION_ROUNDS):
        proposals = generator.uniform(lo, hi, batch)
        keep = generator.uniform(0.0, ceiling, batch) <= f(proposals)
        draws.append(proposals[keep])
        accepted += int(np.count_nonzero(keep))
        if accepted >= n:
            break
    else:
        raise DensityError("Rejection sampler stalled after %d rounds" % MAX_REJECTION_ROUNDS)
    lineage = getattr(stream, "lineage", "")
    return Sample(np.concatenate(draws)[:n], lineage)


def bin_sample(sample, grid):
    """Histogram density of the sample on the grid's nodes (nearest node)."""
    index = np.floor((sample.values - grid.lo) / grid.dx + 0.5).astype(np.int64)
    if index.min() < 0 or index.max() >= grid.n_points:
        raise GridError("Sample falls outside the evaluation grid %s" % (grid,))
    counts = np.bincount(index, minlength=grid.n_points)
    return GridFunction(grid, counts / (len(sample) * grid.dx))


def _check_kernel(sample, kernel):
    if len(sample) == 0:
        raise ParameterError("Cannot estimate from an empty sample")
    mass = kernel.integral()
    if abs(mass - 1.0) > KERNEL_MASS_TOL:
        raise DensityError("Kernel integrates to %.12g, not 1" % mass)


def kde_evaluate(sample, kernel, eval_grid, clip=False):
    """(1/n) sum_i K(x - X_i) on eval_grid, by binning and FFT convolution."""
    _check_kernel(sample, kernel)
    if not kernel.grid.same_step(eval_grid):
        raise GridError("Kernel step %g differs from grid step %g" % (kernel.dx, eval_grid.dx))
    estimate = convolve(bin_sample(sample, eval_grid), kernel).resample(eval_grid)
    if clip:
        return clip_and_renormalize(estimate)
    return estimate


def kde_evaluate_naive(sample, kernel, eval_grid, chunk=256):
    """Direct O(n * grid) evaluation, the reference for kde_evaluate."""
    _check_kernel(sample, kernel)
    x = eval_grid.x
    values = np.empty_like(x)
    for start in range(0, len(x), chunk):
        block = x[start : start + chunk, None] - sample.values[None, :]
        values[start : start + chunk] = kernel(block).mean(axis=1)
    return GridFunction(eval_grid, values)


def clip_and_renormalize(estimate):
    """Positive part of the estimate, rescaled to unit mass."""
    values = np.maximum(estimate.values, 0.0)
    mass = estimate.dx * np.sum(values)
    if mass <= 0:
        raise DensityError("Estimate has no positive mass")
    return estimate.with_values(values / mass)


def evaluation_grid(f, kernel):
    """Grid of f extended by the kernel support on each side."""
    if not f.grid.same_step(kernel.grid):
        raise GridError("Density step %g differs from kernel step %g" % (f.dx, kernel.dx))
    return f.grid.widened(-kernel.support_lo, kernel.support_hi)


def integrated_squared_error(estimate, f):
    """||estimate - f||^2 by the trapezoid rule on the estimate's grid."""
    truth = f.resample(estimate.grid)
    return float(estimate.dx * np.sum((estimate.values - truth.values) ** 2))


def mise_terms(f_hat, k_hat, n):
    """Variance and squared-bias parts of the exact MISE."""
    modulus = np.abs(f_hat.values)
    if float(np.max(modulus)) > 1.0 + CHARACTERISTIC_TOL:
        raise DensityError("|f^| reaches %.12g > 1: not a characteristic function" % modulus.max())
    k_hat = np.asarray(k_hat, dtype=np.float64)
    if k_hat.shape != modulus.shape:
        raise GridError("Kernel transform has %d samples, spectrum %d" % (k_hat.size, modulus.size))
    if k_hat.min() < 0 or k_hat.max() > 1:
        raise ParameterError("Kernel transform must lie in [0, 1]")
    power = np.minimum(modulus**2, 1.0)
    scale = f_hat.d_omega / (2 * math.pi)
    bias = scale * float(np.sum((1.0 - k_hat) ** 2 * power))
    if math.isinf(n):
        return MiseTerms(0.0, bias)
    if not n >= 1:
        raise ParameterError("Sample size must be >= 1, got %s" % n)
    variance = scale * float(np.sum(k_hat**2 * (1.0 - power))) / n
    return MiseTerms(variance, bias)


def exact_mise(f_hat, k_hat, n):
    """(1/2pi) int [K^2 (1 - |f^|^2)/n + (1 - K^)^2 |f^|^2] dw."""
    terms = mise_terms(f_hat, k_hat, n)
    return terms.variance + terms.bias


def exact_mise_for(f, spec, n):
    """exact_mise of the kernel `spec` at the density f."""
    f_hat = forward_transform(f)
    return exact_mise(f_hat, kernel_hat(spec, f_hat.omegas), n)


def minimax_kernel_for(f, sobolev, n, tail_tol=KERNEL_TAIL_TOL):
    """Minimax kernel sampled with the density's step.

    The support covers the density's grid and is widened, in power-of-two
    steps, until the kernel's tail mass is within tail_tol.
    """
    spec = KernelSpec.minimax(sobolev, n)
    half = max(0.5 * f.grid.length, kernel_half_width(spec, tail_tol))
    n_points = next_power_of_two(2.0 * half / f.dx - 1e-9)
    if n_points > MAX_KERNEL_POINTS:
        raise GridError(
            "Kernel for %s, n=%d needs %d points at step %.3g for tail mass %.3g; "
            "loosen the tail tolerance" % (sobolev, n, n_points, f.dx, tail_tol)
        )
    half = 0.5 * n_points * f.dx
    return kernel_time_domain(spec, (-half, half), n_points, tail_tol)


def monte_carlo_mise(f, sobolev, n, replications, stream, kernel=None, workers=1):
    """Average ISE of the minimax estimator over independent replications."""
    if replications < 2:
        raise ParameterError("Need at least 2 replications, got %s" % replications)
    try:
        membership = class_membership(f, sobolev)
    except SpectralTailError as exc:
        LOG.warning("Class membership of the density not checked: %s", exc)
    else:
        if not membership.member:
            LOG.warning(
                "Density outside the class %s (margin %.6g); risk bound does not apply",
                sobolev,
                membership.margin,
            )
    if kernel is None:
        kernel = minimax_kernel_for(f, sobolev, n)
    grid = evaluation_grid(f, kernel)

    def replicate(index):
        sample = rejection_sample(f, n, stream.child(index))
        return integrated_squared_error(kde_evaluate(sample, kernel, grid), f)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        errors = list(pool.map(replicate, range(replications)))
    mean = compensated_mean(errors)
    spread = math.sqrt(math.fsum((e - mean) ** 2 for e in errors) / (replications - 1))
    LOG.debug("MISE n=%d over %d replications: %.6g", n, replications, mean)
    return MiseEstimate(mean, spread / math.sqrt(replications), replications, n)


def asymptotic_scaled_risk(f, sobolev):
    """Limit of n^(2b/(2b+1)) MISE of the minimax estimator at the fixed density f.

    The variance part is int K^2 / (2 pi n); the bias part is c^2 times the
    seminorm of f, its large-n form.
    """
    beta = sobolev.beta
    spec = KernelSpec.minimax(sobolev, 1)
    variance = spec.omega_edge * 2 * beta**2 / (math.pi * (beta + 1) * (2 * beta + 1))
    return variance + spec.c**2 * sobolev_seminorm_sq(f, beta)

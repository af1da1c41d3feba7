"""Least favorable densities: the smooth plateau f0 * g_A and its trigonometric perturbations."""

import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor

import attr
import numpy as np
from scipy import optimize

from .const import (
    BUMP_BANDWIDTH_TOL,
    BUMP_GRID_HALF_WIDTH,
    CALIBRATION_RANGE,
    CALIBRATION_SCAN_POINTS,
    DEFAULT_BUMP_A,
    DEFAULT_GRID_POINTS,
    DEFAULT_PADDING,
    EDGE_GUARD,
    FD_MIN_STEP,
    FD_RELATIVE_STEP,
    MIN_HALF_SUPPORT,
    RICHARDSON_TOL,
    ProbeKind,
)
from .errors import DensityError, GridError, ParameterError
from .grid import Grid, GridFunction
from .rng import generator_of
from .spectral import (
    check_tail,
    convolve,
    forward_transform,
    fractional_derivative,
    weighted_energy,
)
from .util import next_power_of_two

LOG = logging.getLogger(__name__)

ThetaMembership = attr.make_class(
    "ThetaMembership", ["member", "l1_margin", "quad_margin"], frozen=True
)
IdentityCheck = attr.make_class("IdentityCheck", ["lhs", "rhs", "rel_gap"], frozen=True)


def _default_bump_grid():
    return Grid.centered(BUMP_GRID_HALF_WIDTH, DEFAULT_GRID_POINTS)


def _cell_indicator(grid, lo, hi):
    """Fraction of each grid cell [x - dx/2, x + dx/2) lying in [lo, hi]."""
    x = grid.x
    half = 0.5 * grid.dx
    overlap = np.minimum(x + half, hi) - np.maximum(x - half, lo)
    return np.clip(overlap / grid.dx, 0.0, 1.0)


@attr.s(frozen=True, eq=False)
class BumpDensity:
    """f0(x) = c_a exp(-a / ((x + 1/2)(1/2 - x))) on (-1/2, 1/2)."""

    a = attr.ib(converter=float)
    c_a = attr.ib(converter=float)
    function = attr.ib()

    @property
    def grid(self):
        """Grid the bump is sampled on."""
        return self.function.grid

    def spectrum(self):
        """Fourier transform of f0 up to the grid's Nyquist frequency."""
        return forward_transform(self.function)

    def bandwidth(self, rel_tol=BUMP_BANDWIDTH_TOL):
        """Largest |w| where |f0^(w)| still exceeds rel_tol."""
        spectrum = self.spectrum()
        above = np.nonzero(np.abs(spectrum.values) > rel_tol)[0]
        return float(np.max(np.abs(spectrum.omegas[above])))


@functools.lru_cache(maxsize=64)
def bump_density(a=DEFAULT_BUMP_A, grid=None):
    """The bump f0 for shape constant a, normalized on the grid."""
    if not (math.isfinite(a) and a > 0):
        raise ParameterError("Bump constant a must be > 0, got %s" % a)
    if grid is None:
        grid = _default_bump_grid()
    if grid.lo > -0.5 or grid.hi < 0.5:
        raise GridError("Bump grid %s does not cover [-1/2, 1/2]" % (grid,))
    x = grid.x
    inside = np.abs(x) < 0.5
    values = np.zeros(grid.n_points)
    values[inside] = np.exp(-a / ((x[inside] + 0.5) * (0.5 - x[inside])))
    mass = grid.dx * np.sum(values)
    if mass <= 0:
        raise GridError("Grid %s is too coarse to resolve the bump" % (grid,))
    return BumpDensity(a, 1.0 / mass, GridFunction(grid, values / mass, density=True))


def calibration_integral(a, grid=None):
    """int |f0^(w) sin(w/2)/(w/2)| dw over the grid's frequency band."""
    spectrum = bump_density(a, grid).spectrum()
    weight = np.sinc(spectrum.omegas / (2.0 * math.pi))
    return float(spectrum.d_omega * np.sum(np.abs(spectrum.values * weight)))


@attr.s(frozen=True)
class Calibration:
    """Outcome of the search for a with calibration integral 2 pi."""

    a = attr.ib()
    c_a = attr.ib()
    bracketed = attr.ib()
    roots = attr.ib()
    scan = attr.ib()
    integral = attr.ib()


@functools.lru_cache(maxsize=8)
def calibrate_a(grid=None, lo=CALIBRATION_RANGE[0], hi=CALIBRATION_RANGE[1]):
    """Scan a in [lo, hi] for roots of I(a) - 2 pi; fall back to a = 1 when none exists."""

    def residual(a):
        return calibration_integral(a, grid) - 2.0 * math.pi

    points = np.geomspace(lo, hi, CALIBRATION_SCAN_POINTS)
    scan = tuple((float(a), residual(a)) for a in points)
    for a, value in scan:
        LOG.debug("Calibration scan a=%.6g residual=%.3g", a, value)
    roots = []
    for (a0, r0), (a1, r1) in zip(scan, scan[1:]):
        if r0 == 0.0:
            roots.append(a0)
        elif r0 * r1 < 0:
            roots.append(optimize.brentq(residual, a0, a1, xtol=1e-12, rtol=1e-12))
    if scan[-1][1] == 0.0:
        roots.append(scan[-1][0])
    if roots:
        a = min(roots, key=lambda root: abs(math.log(root)))
        if len(roots) > 1:
            LOG.warning("Calibration found %d roots %s; using a=%.12g", len(roots), roots, a)
    else:
        a = DEFAULT_BUMP_A
        LOG.warning(
            "Calibration integral never crosses 2 pi on a in [%g, %g] (min residual %.3g); "
            "using a=%g",
            lo,
            hi,
            min(value for _, value in scan),
            a,
        )
    bump = bump_density(a, grid)
    return Calibration(
        a, bump.c_a, bool(roots), tuple(roots), scan, calibration_integral(a, grid)
    )


def _require_half_support(A):
    if not (math.isfinite(A) and A >= MIN_HALF_SUPPORT):
        raise ParameterError("Half-support A must be >= %d, got %s" % (MIN_HALF_SUPPORT, A))


def indicator_density(A, grid):
    """g_A: uniform density on [-(A - 1/2), A - 1/2], cell-averaged on the grid."""
    edge = A - 0.5
    return GridFunction(grid, _cell_indicator(grid, -edge, edge) / (2.0 * edge))


@functools.lru_cache(maxsize=32)
def plateau_density(A, grid=None, a=None):
    """f0 * g_A on the grid; equals 1/(2A - 1) on [-A + 1, A - 1] and vanishes beyond A."""
    _require_half_support(A)
    if grid is None:
        grid = Grid.centered(4.0 * A, DEFAULT_GRID_POINTS)
    if a is None:
        a = calibrate_a().a
    dx = grid.dx
    bump = bump_density(a, Grid.with_step(dx, 1.0)).function
    indicator = indicator_density(A, Grid.with_step(dx, A + 1.0))
    plateau = convolve(bump, indicator).resample(grid)
    LOG.debug("Plateau A=%g on %s: f(0)=%.15g", A, grid, plateau.values[grid.n_points // 2])
    return plateau.as_density()


def perturbation(k, A, grid=None):
    """phi_k: cos(k pi x / A)/sqrt(A) for k > 0, sin(k pi x / A)/sqrt(A) for k < 0, on [-A, A]."""
    if k == 0 or int(k) != k:
        raise ParameterError("Perturbation index must be a nonzero integer, got %s" % k)
    if grid is None:
        grid = Grid.centered(A, DEFAULT_GRID_POINTS)
    frequency = k * math.pi / A
    if abs(frequency) >= grid.nyquist:
        raise GridError(
            "Perturbation k=%d needs Nyquist above %.6g, grid has %.6g"
            % (k, abs(frequency), grid.nyquist)
        )
    x = grid.x
    wave = np.cos(frequency * x) if k > 0 else np.sin(frequency * x)
    if math.isclose(grid.lo, -A) and math.isclose(grid.hi, A):
        window = 1.0
    else:
        window = _cell_indicator(grid, -A, A)
    return GridFunction(grid, window * wave / math.sqrt(A))


def _as_int_array(values):
    array = np.array(values, dtype=np.int64).reshape(-1)
    array.flags.writeable = False
    return array


def _as_float_array(values):
    array = np.array(values, dtype=np.float64).reshape(-1)
    array.flags.writeable = False
    return array


@attr.s(frozen=True, eq=False)
class Theta:
    """Finitely supported coefficients k -> theta_k, k a nonzero integer."""

    ks = attr.ib(converter=_as_int_array)
    values = attr.ib(converter=_as_float_array)

    def __attrs_post_init__(self):
        if self.ks.shape != self.values.shape:
            raise ParameterError("Theta needs one value per index")
        if np.any(self.ks == 0):
            raise ParameterError("Theta index 0 is not a perturbation")
        if len(np.unique(self.ks)) != len(self.ks):
            raise ParameterError("Theta indices must be distinct")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("Theta holds non-finite values")

    @classmethod
    def zero(cls):
        """The empty perturbation."""
        return cls([], [])

    @classmethod
    def from_dict(cls, mapping):
        """Build from {k: theta_k}; zero entries are dropped."""
        items = sorted((int(k), float(v)) for k, v in mapping.items() if v != 0)
        return cls([k for k, _ in items], [v for _, v in items])

    def as_dict(self):
        """{k: theta_k} over the support."""
        return {int(k): float(v) for k, v in zip(self.ks, self.values)}

    def __len__(self):
        return len(self.ks)

    def with_value(self, k, value):
        """Copy with theta_k replaced."""
        mapping = self.as_dict()
        mapping[int(k)] = value
        return Theta(list(mapping.keys()), list(mapping.values()))

    def l1(self):
        """sum |theta_k|."""
        return float(np.sum(np.abs(self.values)))

    def frequency_sum(self, power, A):
        """sum theta_k^2 (|k| pi / A)^power."""
        if len(self) == 0:
            return 0.0
        return float(np.sum(self.values**2 * (np.abs(self.ks) * math.pi / A) ** power))

    def quad(self, beta, A):
        """sum theta_k^2 (k pi / A)^(2 beta)."""
        return self.frequency_sum(2.0 * beta, A)

    def summary(self):
        """Compact 'k:value' listing for result files."""
        return " ".join("%d:%.6g" % (k, v) for k, v in zip(self.ks, self.values))


@attr.s(frozen=True)
class ParameterSet:
    """Theta_A(L): sum |theta_k| <= A^(1 - 2 beta) and sum theta_k^2 (k pi/A)^(2 beta) <= 4 A^2 L."""

    A = attr.ib(converter=float)
    beta = attr.ib(converter=float)
    L = attr.ib(converter=float)

    def __attrs_post_init__(self):
        _require_half_support(self.A)
        if not self.beta > 0:
            raise ParameterError("Smoothness beta must be > 0, got %s" % self.beta)
        if not (math.isfinite(self.L) and self.L > 0):
            raise ParameterError("Budget L must be finite and > 0, got %s" % self.L)

    @property
    def l1_budget(self):
        """A^(1 - 2 beta)."""
        return self.A ** (1.0 - 2.0 * self.beta)

    @property
    def quad_budget(self):
        """4 A^2 L."""
        return 4.0 * self.A**2 * self.L

    def membership(self, theta):
        """Both inequalities with their slacks."""
        l1_margin = self.l1_budget - theta.l1()
        quad_margin = self.quad_budget - theta.quad(self.beta, self.A)
        return ThetaMembership(l1_margin >= 0 and quad_margin >= 0, l1_margin, quad_margin)

    def saturate(self, ks, weights):
        """Theta along `weights` scaled onto the boundary of the set."""
        ks = np.asarray(ks, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.float64)
        l1 = np.sum(np.abs(weights))
        quad = np.sum(weights**2 * (np.abs(ks) * math.pi / self.A) ** (2.0 * self.beta))
        scale = min(self.l1_budget / l1, math.sqrt(self.quad_budget / quad))
        return Theta(ks, weights * scale * (1.0 - 1e-12))

    def random_member(self, rng, k_max, support_size):
        """Random theta in the set with `support_size` indices among +-1..+-k_max."""
        generator = generator_of(rng)
        if support_size < 1 or support_size > 2 * k_max:
            raise ParameterError(
                "Support size %s does not fit indices up to %s" % (support_size, k_max)
            )
        pool = np.concatenate([np.arange(1, k_max + 1), -np.arange(1, k_max + 1)])
        ks = generator.choice(pool, size=support_size, replace=False)
        weights = generator.standard_normal(support_size)
        saturated = self.saturate(ks, weights)
        return Theta(saturated.ks, saturated.values * generator.uniform(0.0, 1.0))

    def boundary_frequency(self):
        """Largest k at which a single theta_k at the l1 budget stays inside the quadratic budget."""
        ratio = math.sqrt(self.quad_budget) / self.l1_budget
        return max(int(math.floor(ratio ** (1.0 / self.beta) * self.A / math.pi)), 1)


def theta_membership(theta, parameter_set):
    """Membership of theta in the parameter set, with both margins."""
    return parameter_set.membership(theta)


def extremal_theta(parameter_set, k, sign=1.0):
    """Single-frequency theta as large as both inequalities allow."""
    if k == 0:
        raise ParameterError("Index 0 is not a perturbation")
    A, beta = parameter_set.A, parameter_set.beta
    value = min(
        parameter_set.l1_budget,
        math.sqrt(parameter_set.quad_budget) / (abs(k) * math.pi / A) ** beta,
    )
    return Theta([k], [math.copysign(value, sign)])


@functools.lru_cache(maxsize=16)
def _plateau_spectrum(plateau):
    return forward_transform(plateau)


def _plateau_moment(plateau, k, A):
    """int P phi_k, by a direct sum on the plateau's grid."""
    frequency = k * math.pi / A
    if abs(frequency) >= plateau.grid.nyquist:
        raise GridError("Perturbation k=%d is not resolved on %s" % (k, plateau.grid))
    x = plateau.x
    wave = np.cos(frequency * x) if k > 0 else np.sin(frequency * x)
    return float(plateau.dx * np.sum(plateau.values * wave)) / math.sqrt(A)


@attr.s(frozen=True, eq=False)
class PerturbedDensity:
    """f_theta = P (1 + sum theta_k phi_k) / b(theta) with P = f0 * g_A."""

    A = attr.ib(converter=float)
    theta = attr.ib()
    plateau = attr.ib()
    b_theta = attr.ib(converter=float)

    def bracket(self):
        """1 + sum theta_k phi_k on the plateau grid."""
        values = np.ones(self.plateau.n_points)
        for k, value in zip(self.theta.ks, self.theta.values):
            values += value * perturbation(int(k), self.A, self.plateau.grid).values
        return values

    @property
    def function(self):
        """f_theta sampled on the plateau grid."""
        values = self.plateau.values * self.bracket() / self.b_theta
        return GridFunction(self.plateau.grid, values, density=True)

    def spectrum(self):
        """Fourier transform of f_theta, assembled from shifted copies of the plateau spectrum."""
        base = _plateau_spectrum(self.plateau)
        length = self.plateau.grid.length
        values = base.values.astype(np.complex128)
        for k, value in zip(self.theta.ks, self.theta.values):
            exact = k * length / (2.0 * self.A)
            shift = int(round(exact))
            if abs(exact - shift) > 1e-9:
                raise GridError(
                    "Frequency %d pi/%g is not on the plateau's frequency lattice" % (k, self.A)
                )
            if abs(shift) >= base.n_points // 2:
                raise GridError("Perturbation k=%d lies beyond the grid's band" % k)
            up = np.roll(base.values, -shift)
            down = np.roll(base.values, shift)
            if k > 0:
                values += value * (up + down) / (2.0 * math.sqrt(self.A))
            else:
                values += value * (up - down) / (2j * math.sqrt(self.A))
        return base.with_values(values / self.b_theta)

    def seminorm_sq(self, beta, check=True):
        """||f_theta^(beta)||^2 from the shifted spectrum."""
        spectrum = self.spectrum()
        if check:
            check_tail(spectrum, beta)
        return weighted_energy(spectrum, beta)

    def coefficient(self, kappa):
        """sqrt(A) int f_theta phi_kappa: Re f_theta^(kappa pi/A) for kappa > 0, Im for kappa < 0."""
        return math.sqrt(self.A) * float(
            self.plateau.dx * np.sum(self.function.values * self._wave(kappa))
        )

    def _wave(self, kappa):
        return perturbation(kappa, self.A, self.plateau.grid).values


def build_f_theta(theta, A, plateau=None, parameter_set=None):
    """The perturbed density for theta; checks positivity and, for members, the normalizer bracket."""
    _require_half_support(A)
    if plateau is None:
        plateau = plateau_density(A)
    if theta.l1() / math.sqrt(A) >= 1.0:
        pd = PerturbedDensity(A, theta, plateau, 1.0)
        support = plateau.values > 0
        low = float(np.min(pd.bracket()[support]))
        if low <= 0:
            raise DensityError(
                "1 + sum theta_k phi_k reaches %.6g; f_theta would not be a density" % low
            )
    b_theta = 1.0 + math.fsum(
        value * _plateau_moment(plateau, int(k), A) for k, value in zip(theta.ks, theta.values)
    )
    if parameter_set is not None and parameter_set.membership(theta).member:
        slack = A**-1.5
        if not 1.0 - slack <= b_theta <= 1.0 + slack:
            raise DensityError(
                "Normalizer b(theta)=%.12g outside [1 - A^-3/2, 1 + A^-3/2] for A=%g"
                % (b_theta, A)
            )
    return PerturbedDensity(A, theta, plateau, b_theta)


def derivative_identity_check(theta, A, gamma, n_points=DEFAULT_GRID_POINTS):
    """Compare ||(sum theta_k phi_k)^(gamma)||^2 on one period with sum theta_k^2 (k pi/A)^(2 gamma)."""
    grid = Grid.centered(A, n_points)
    values = np.zeros(n_points)
    for k, value in zip(theta.ks, theta.values):
        values += value * perturbation(int(k), A, grid).values
    lhs = fractional_derivative(GridFunction(grid, values), gamma).norm_sq()
    rhs = theta.frequency_sum(2.0 * gamma, A)
    gap = abs(lhs - rhs) / rhs if rhs > 0 else abs(lhs - rhs)
    return IdentityCheck(lhs, rhs, gap)


def weighted_sum_bound_check(theta, parameter_set, l):
    """sum theta_k^2 (k pi/A)^(2 beta - l) <= (1 + 4L) A^(2 - l), for 0 < l < 2 beta."""
    beta, A = parameter_set.beta, parameter_set.A
    if not 0 < l < 2 * beta:
        raise ParameterError("Exponent l must lie in (0, %g), got %s" % (2 * beta, l))
    lhs = theta.frequency_sum(2.0 * beta - l, A)
    return lhs <= (1.0 + 4.0 * parameter_set.L) * A ** (2.0 - l)


def sweep_grid(parameter_set, k_top, padding=DEFAULT_PADDING, bandwidth=None):
    """Grid on which P and its shifts up to k_top pi/A are resolved, with 2A-commensurate length."""
    A = parameter_set.A
    if bandwidth is None:
        bandwidth = bump_density(calibrate_a().a).bandwidth()
    nyquist = (k_top * math.pi / A + bandwidth) / 0.9
    length = 2.0 * padding * A
    n_points = next_power_of_two(length * nyquist / math.pi)
    return Grid.centered(0.5 * length, n_points)


@attr.s(frozen=True)
class ProbeResult:
    """One evaluated point of the parameter set."""

    A = attr.ib()
    kind = attr.ib()
    theta = attr.ib(eq=False)
    l1 = attr.ib()
    quad = attr.ib()
    seminorm_sq = attr.ib()


@attr.s(frozen=True)
class SweepRow:
    """Best seminorm found at one A, and the plateau's own contribution."""

    A = attr.ib()
    best = attr.ib()
    gap = attr.ib()
    plateau_term = attr.ib()
    plateau_bound = attr.ib()
    k_boundary = attr.ib()
    n_points = attr.ib()
    best_probe = attr.ib(eq=False)
    probes = attr.ib(eq=False)


def _probe_points(parameter_set, budget, generator):
    """(kind, theta) pairs: structured probes first, random members to fill the budget."""
    beta = parameter_set.beta
    k_star = parameter_set.boundary_frequency()
    probes = [(ProbeKind.ZERO, Theta.zero())]
    singles = sorted(
        {k_star + d for d in (-2, -1, 0, 1, 2)}
        | {int(round(1.1 * k_star)), int(round(1.25 * k_star))}
    )
    for k in singles:
        if k < 1:
            continue
        for mode in (k, -k):
            for sign in (1.0, -1.0):
                probes.append((ProbeKind.SINGLE, extremal_theta(parameter_set, mode, sign)))
    k_pair = max(int(round(k_star * 2.0 ** (1.0 / (2.0 * beta)))), 1)
    for ks in ((k_pair, -k_pair), (k_pair, k_pair + 1), (-k_pair, -k_pair - 1)):
        probes.append((ProbeKind.PAIR, parameter_set.saturate(ks, [1.0, 1.0])))
    for width in (3, 5):
        ks = [k_star - width // 2 + i for i in range(width)]
        ks = [k for k in ks if k > 0]
        if not ks:
            continue
        probes.append((ProbeKind.BAND, parameter_set.saturate(ks, np.ones(len(ks)))))
    lo, hi = max(k_star // 2, 1), int(1.25 * k_star) + 1
    while len(probes) < budget:
        size = int(generator.integers(1, 9))
        ks = generator.choice(np.arange(lo, hi + 1), size=min(size, hi - lo + 1), replace=False)
        ks = ks * generator.choice([-1, 1], size=len(ks))
        weights = generator.standard_normal(len(ks))
        probes.append((ProbeKind.RANDOM, parameter_set.saturate(ks, weights)))
    return probes[: max(budget, 1)], k_pair


def _probe_order(result):
    """Sort key: larger seminorm first, then smaller |k|, then positive k."""
    ks = result.theta.ks
    if len(ks) == 0:
        return (-result.seminorm_sq, 0, 0)
    lead = ks[np.argmin(np.abs(ks))]
    return (-result.seminorm_sq, int(abs(lead)), 0 if lead > 0 else 1)


def theorem2_sweep(beta, L, A_list, budget, stream, workers=1, padding=DEFAULT_PADDING):
    """Largest ||f_theta^(beta)||^2 found over probes of Theta_A(L), for each A."""
    if beta <= 0.5:
        raise ParameterError("Sweep needs beta > 1/2, got %s" % beta)
    if budget < 1:
        raise ParameterError("Probe budget must be >= 1, got %s" % budget)
    bump = bump_density(calibrate_a().a)
    bandwidth = bump.bandwidth()
    rows = []
    for index, A in enumerate(A_list):
        parameter_set = ParameterSet(A, beta, L)
        probes, k_pair = _probe_points(parameter_set, budget, generator_of(stream.child(index)))
        widest = max((int(np.max(np.abs(t.ks))) for _, t in probes if len(t)), default=1)
        k_top = max(widest, k_pair + 1)
        grid = sweep_grid(parameter_set, k_top, padding, bandwidth)
        plateau = plateau_density(float(A), grid)
        LOG.info(
            "Sweep A=%g: %d probes, k*=%d, grid of %d points",
            A,
            len(probes),
            parameter_set.boundary_frequency(),
            grid.n_points,
        )

        def evaluate(probe):
            kind, theta = probe
            pd = build_f_theta(theta, A, plateau, parameter_set)
            return ProbeResult(
                A,
                kind,
                theta,
                theta.l1(),
                theta.quad(beta, A),
                pd.seminorm_sq(beta),
            )

        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            results = list(pool.map(evaluate, probes))
        best = min(results, key=_probe_order)
        plateau_term = results[0].seminorm_sq
        bump_energy = weighted_energy(bump.spectrum(), beta - 1.0)
        rows.append(
            SweepRow(
                A,
                best.seminorm_sq,
                abs(best.seminorm_sq - L),
                plateau_term,
                bump_energy / (A - 0.5) ** 2,
                parameter_set.boundary_frequency(),
                grid.n_points,
                best,
                tuple(results),
            )
        )
        LOG.info("Sweep A=%g: best %.8g (gap %.3g)", A, best.seminorm_sq, abs(best.seminorm_sq - L))
    return rows


def fisher_info_numeric(pd, kappa):
    """int (d f_theta / d theta_kappa)^2 / f_theta dx, zero where the plateau vanishes."""
    plateau = pd.plateau
    phi = perturbation(kappa, pd.A, plateau.grid).values
    moment = _plateau_moment(plateau, kappa, pd.A)
    f = pd.function.values
    derivative = (plateau.values * phi - f * moment) / pd.b_theta
    integrand = np.zeros_like(f)
    live = plateau.values >= EDGE_GUARD
    integrand[live] = derivative[live] ** 2 / f[live]
    return float(plateau.dx * np.sum(integrand))


def fourier_coeff_derivative_numeric(pd, kappa, step=None, beta=None, sigma=0.0):
    """d/d theta_kappa of sqrt(A) int f_theta phi_kappa, by central differences."""
    if step is None:
        if beta is None:
            step = 1e-6
        else:
            step = FD_RELATIVE_STEP * max(sigma, pd.A ** (-2.0 * beta))
    if step < FD_MIN_STEP:
        raise ParameterError("Finite-difference step %.3g underflows" % step)
    centre = pd.theta.as_dict().get(int(kappa), 0.0)

    def coefficient(value):
        theta = pd.theta.with_value(kappa, value)
        return build_f_theta(theta, pd.A, pd.plateau).coefficient(kappa)

    def difference(h):
        return (coefficient(centre + h) - coefficient(centre - h)) / (2.0 * h)

    coarse = difference(step)
    fine = difference(0.5 * step)
    if abs(coarse - fine) > RICHARDSON_TOL * abs(fine):
        raise ParameterError(
            "Finite differences at h=%.3g and h/2 disagree (%.12g vs %.12g)" % (step, coarse, fine)
        )
    return fine

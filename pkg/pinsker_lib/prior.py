"""Product prior on perturbation coefficients and the van Trees lower bound."""

import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor

import attr
import numpy as np
from scipy import integrate, optimize

from .const import DEFAULT_VARIANCE_SCALE, MIN_SCHEDULE_A, XiLawKind
from .errors import ParameterError
from .grid import SobolevClass
from .kernel import pinsker_constant
from .least_favorable import Theta
from .rng import generator_of
from .util import schedule_half_support, wilson_interval

LOG = logging.getLogger(__name__)

TAIL_BLOCK = 256
MAX_SAMPLING_ROUNDS = 1000


def _rejection_draws(generator, size, propose, accept):
    """size draws from propose() thinned by acceptance probabilities accept(t)."""
    count = int(np.prod(size))
    kept = []
    total = 0
    for _ in range(MAX_SAMPLING_ROUNDS):
        proposals = propose(max(2 * (count - total), 64))
        keep = generator.uniform(size=len(proposals)) < accept(proposals)
        kept.append(proposals[keep])
        total += int(np.count_nonzero(keep))
        if total >= count:
            return np.concatenate(kept)[:count].reshape(size)
    raise ParameterError("Sampler stalled after %d rounds" % MAX_SAMPLING_ROUNDS)


class RaisedCosineLaw:
    """rho(t) = (1 + cos(pi t/T)) / (2T) on [-T, T], T chosen for unit variance."""

    kind = XiLawKind.RAISED_COSINE
    FISHER_INFORMATION = math.pi**2 / 3 - 2

    def __init__(self):
        self.bound = 1.0 / math.sqrt(1.0 / 3 - 2.0 / math.pi**2)

    def density(self, t):
        t = np.asarray(t, dtype=np.float64)
        T = self.bound
        return np.where(np.abs(t) <= T, (1 + np.cos(math.pi * t / T)) / (2 * T), 0.0)

    def fisher_information(self):
        """pi^2/3 - 2, confirmed by quadrature."""
        T = self.bound

        def integrand(t):
            return (math.pi / T) ** 2 * (1 - math.cos(math.pi * t / T)) / (2 * T)

        value, _ = integrate.quad(integrand, -T, T)
        if not math.isclose(value, self.FISHER_INFORMATION, rel_tol=1e-9):
            LOG.warning("Raised cosine Fisher information by quadrature: %.12g", value)
        return self.FISHER_INFORMATION

    def sample(self, rng, size):
        generator = generator_of(rng)
        T = self.bound
        return _rejection_draws(
            generator,
            size,
            lambda m: generator.uniform(-T, T, m),
            lambda t: 0.5 * (1 + np.cos(math.pi * t / T)),
        )

    def __repr__(self):
        return "RaisedCosineLaw(T=%.6g)" % self.bound


class TaperedGaussianLaw:
    """rho(t) proportional to exp(-t^2/2s^2) cos^2(pi t/2G) on [-G, G], unit variance."""

    kind = XiLawKind.TAPERED_GAUSSIAN

    def __init__(self, bound):
        if not bound >= 3:
            raise ParameterError("Tapered Gaussian needs G >= 3, got %s" % bound)
        self.bound = float(bound)
        self.scale = _tapered_scale(self.bound)

    @classmethod
    def for_eps(cls, eps):
        """Law whose Fisher information is 1 + eps/2."""
        return cls(_tapered_bound(eps))

    def density(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(
            np.abs(t) <= self.bound,
            _tapered_weight(t, self.scale, self.bound) / _tapered_moment(self.scale, self.bound, 0),
            0.0,
        )

    def fisher_information(self):
        """int (rho')^2 / rho by quadrature."""
        return _tapered_fisher(self.bound)

    def sample(self, rng, size):
        generator = generator_of(rng)
        G, s = self.bound, self.scale

        def accept(t):
            return np.where(np.abs(t) <= G, np.cos(math.pi * t / (2 * G)) ** 2, 0.0)

        return _rejection_draws(generator, size, lambda m: generator.normal(0.0, s, m), accept)

    def __repr__(self):
        return "TaperedGaussianLaw(G=%.6g, s=%.6g)" % (self.bound, self.scale)


def _tapered_weight(t, scale, bound):
    return np.exp(-0.5 * (t / scale) ** 2) * np.cos(math.pi * t / (2 * bound)) ** 2


def _tapered_moment(scale, bound, power):
    edge = min(bound, 40.0 * scale)
    value, _ = integrate.quad(
        lambda t: t**power * _tapered_weight(t, scale, bound), -edge, edge, limit=200
    )
    return value


@functools.lru_cache(maxsize=64)
def _tapered_scale(bound):
    def excess(scale):
        return _tapered_moment(scale, bound, 2) / _tapered_moment(scale, bound, 0) - 1.0

    return optimize.brentq(excess, 0.5, 1e3, xtol=1e-14)


@functools.lru_cache(maxsize=64)
def _tapered_fisher(bound):
    scale = _tapered_scale(bound)
    norm = _tapered_moment(scale, bound, 0)
    edge = min(bound, 40.0 * scale)

    def integrand(t):
        u = math.pi * t / (2 * bound)
        score = (t / scale**2) * math.cos(u) + (math.pi / bound) * math.sin(u)
        return math.exp(-0.5 * (t / scale) ** 2) * score**2

    value, _ = integrate.quad(integrand, -edge, edge, limit=200)
    return value / norm


@functools.lru_cache(maxsize=64)
def _tapered_bound(eps):
    target = 1.0 + 0.5 * eps
    lo, hi = 3.0, 3000.0
    if _tapered_fisher(hi) >= target:
        raise ParameterError("eps=%s is too small for a tapered Gaussian with G <= %g" % (eps, hi))
    if _tapered_fisher(lo) <= target:
        return lo
    return optimize.brentq(lambda G: _tapered_fisher(G) - target, lo, hi, xtol=1e-10)


def xi_law(kind, eps):
    """Base law for the prior coefficients."""
    kind = XiLawKind(kind)
    if kind is XiLawKind.RAISED_COSINE:
        return RaisedCosineLaw()
    return TaperedGaussianLaw.for_eps(eps)


def _check_prior_args(beta, n, eps):
    if not 0 < eps < 1:
        raise ParameterError("Slack eps must lie in (0, 1), got %s" % eps)
    if not beta > 0.5:
        raise ParameterError("Prior needs beta > 1/2, got %s" % beta)
    if not n >= 1:
        raise ParameterError("Sample size must be >= 1, got %s" % n)


@attr.s(frozen=True, eq=False)
class PriorSpec:
    """Independent theta_k = sigma_k xi_k for 0 < |k| < W."""

    beta = attr.ib()
    L = attr.ib()
    n = attr.ib()
    eps = attr.ib()
    A = attr.ib()
    W = attr.ib()
    ks = attr.ib()
    sigma_sq = attr.ib()
    xi_law = attr.ib()
    variance_scale = attr.ib()

    @property
    def G(self):
        """Almost-sure bound on |xi_k|."""
        return self.xi_law.bound

    def sigma_sq_of(self, k):
        """sigma_k^2, zero outside 0 < |k| < W."""
        return variance_profile(k, self.W, self.A, self.n, self.beta, self.variance_scale)


def variance_profile(k, W, A, n, beta, variance_scale=DEFAULT_VARIANCE_SCALE):
    """(scale A/n) ((W/|k|)^beta - 1)_+."""
    k = np.abs(np.asarray(k, dtype=np.float64))
    with np.errstate(divide="ignore"):
        ratio = np.where(k > 0, W / np.where(k > 0, k, 1.0), 0.0)
    values = variance_scale * A / n * np.maximum(ratio**beta - 1.0, 0.0)
    if np.ndim(values) == 0:
        return float(values)
    return values


def prior_cutoff(beta, L, n, eps, A):
    """W = (A/pi) (L(1 - eps) n (2b+1)(b+1) pi / b)^(1/(2b+1))."""
    factor = L * (1 - eps) * n * (2 * beta + 1) * (beta + 1) * math.pi / beta
    return A / math.pi * factor ** (1.0 / (2 * beta + 1))


def prior_spec(beta, L, n, eps, A=None, law=None, variance_scale=DEFAULT_VARIANCE_SCALE):
    """Prior for sample size n with slack eps; A defaults to max(ceil(ln n), 4)."""
    _check_prior_args(beta, n, eps)
    if A is None:
        A = schedule_half_support(n, MIN_SCHEDULE_A)
    if law is None:
        law = TaperedGaussianLaw.for_eps(eps)
    elif isinstance(law, (str, XiLawKind)):
        law = xi_law(law, eps)
    fisher = law.fisher_information()
    if fisher > 1 + eps:
        LOG.warning(
            "%r has Fisher information %.6g > 1 + eps = %.6g; the van Trees bound is optimistic",
            law,
            fisher,
            1 + eps,
        )
    W = prior_cutoff(beta, L, n, eps, A)
    top = int(math.ceil(W)) - 1
    positive = np.arange(1, max(top, 0) + 1)
    ks = np.concatenate([positive, -positive])
    sigma_sq = variance_profile(ks, W, A, n, beta, variance_scale)
    LOG.debug("Prior n=%g A=%g: W=%.6g, %d active coefficients", n, A, W, len(ks))
    return PriorSpec(beta, L, n, eps, A, W, ks, sigma_sq, law, variance_scale)


def prior_sample(spec, rng):
    """One theta drawn from the prior."""
    if len(spec.ks) == 0:
        return Theta.zero()
    xi = spec.xi_law.sample(rng, len(spec.ks))
    return Theta(spec.ks, np.sqrt(spec.sigma_sq) * xi)


def van_trees_bound(spec):
    """sum over active k of 1/(n + 2A/sigma_k^2), divided by 2A(1 + eps)."""
    if len(spec.ks) == 0:
        return 0.0
    terms = 1.0 / (spec.n + 2.0 * spec.A / spec.sigma_sq)
    return math.fsum(terms) / (2.0 * spec.A * (1.0 + spec.eps))


def van_trees_closed_form(beta, L, n, eps):
    """n^(-2b/(2b+1)) gamma(b, L) (1 - eps)^(1/(2b+1)) / (1 + eps)."""
    _check_prior_args(beta, n, eps)
    gamma = pinsker_constant(SobolevClass(beta, L))
    exponent = 1.0 / (2 * beta + 1)
    return n ** (-2 * beta * exponent) * gamma * (1 - eps) ** exponent / (1 + eps)


@attr.s(frozen=True)
class TailAudit:
    """Monte Carlo frequency of prior draws falling outside the parameter set."""

    trials = attr.ib()
    failures = attr.ib()
    frequency = attr.ib()
    ci_low = attr.ib()
    ci_high = attr.ib()
    l1_failures = attr.ib()


def lemma1_tail_probability(spec, parameter_set, trials, stream, workers=1):
    """Count prior draws violating the quadratic inequality; l1 violations reported apart."""
    if trials < 1000:
        raise ParameterError("Tail audit needs >= 1000 trials, got %s" % trials)
    A, beta = parameter_set.A, parameter_set.beta
    weights = (np.abs(spec.ks) * math.pi / A) ** (2 * beta)
    sigma = np.sqrt(spec.sigma_sq)
    blocks = [(i, min(TAIL_BLOCK, trials - i * TAIL_BLOCK)) for i in range(-(-trials // TAIL_BLOCK))]

    def run(block):
        index, size = block
        if len(spec.ks) == 0:
            return 0, 0
        xi = spec.xi_law.sample(stream.child(index), (size, len(spec.ks)))
        theta = xi * sigma
        quad = (theta**2 * weights).sum(axis=1)
        l1 = np.abs(theta).sum(axis=1)
        return (
            int(np.count_nonzero(quad > parameter_set.quad_budget)),
            int(np.count_nonzero(l1 > parameter_set.l1_budget)),
        )

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        counts = list(pool.map(run, blocks))
    failures = sum(count for count, _ in counts)
    l1_failures = sum(count for _, count in counts)
    low, high = wilson_interval(failures, trials)
    LOG.info(
        "Tail audit: %d/%d quadratic failures, %d l1 failures", failures, trials, l1_failures
    )
    return TailAudit(trials, failures, failures / trials, low, high, l1_failures)

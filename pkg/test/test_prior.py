import logging
import math

import numpy as np
import pytest
from scipy import integrate

from pinsker_lib.const import XiLawKind
from pinsker_lib.errors import ParameterError
from pinsker_lib.grid import SobolevClass
from pinsker_lib.kernel import pinsker_constant
from pinsker_lib.least_favorable import ParameterSet
from pinsker_lib.prior import (
    RaisedCosineLaw,
    TaperedGaussianLaw,
    lemma1_tail_probability,
    prior_cutoff,
    prior_sample,
    prior_spec,
    van_trees_bound,
    van_trees_closed_form,
    variance_profile,
    xi_law,
)
from pinsker_lib.rng import RngStream


def test_variance_profile():
    assert variance_profile(1, 4.0, 2.0, 10, 1.0) == pytest.approx(1.2)
    assert variance_profile(-1, 4.0, 2.0, 10, 1.0) == pytest.approx(1.2)
    assert variance_profile(1, 4.0, 2.0, 10, 1.0, variance_scale=4.0) == pytest.approx(2.4)
    for k in (0, 4, 5, -7):
        assert variance_profile(k, 4.0, 2.0, 10, 1.0) == 0.0
    values = variance_profile(np.array([1, 2, 3]), 4.0, 2.0, 10, 2.0)
    assert np.allclose(values, 0.4 * np.array([15.0, 3.0, 16.0 / 9 - 1]))


def test_prior_spec_layout():
    spec = prior_spec(2.0, 1.0, 1000, 0.1)
    assert spec.A == 7
    assert spec.W == pytest.approx(prior_cutoff(2.0, 1.0, 1000, 0.1, 7))
    assert 16 < spec.W < 17
    assert sorted(spec.ks) == sorted(list(range(1, 17)) + list(range(-16, 0)))
    assert np.all(spec.sigma_sq > 0)
    assert spec.sigma_sq_of(3) == pytest.approx(variance_profile(3, spec.W, 7, 1000, 2.0))
    assert spec.sigma_sq_of(17) == 0.0
    assert spec.G == spec.xi_law.bound
    doubled = prior_spec(2.0, 1.0, 1000, 0.1, variance_scale=4.0)
    assert np.allclose(doubled.sigma_sq, 2 * spec.sigma_sq)


def test_prior_cutoff_formula():
    beta, L, n, eps, A = 1.5, 2.0, 5000, 0.25, 9.0
    expected = A / math.pi * (L * 0.75 * n * 4 * 2.5 * math.pi / 1.5) ** 0.25
    assert prior_cutoff(beta, L, n, eps, A) == pytest.approx(expected)


def test_prior_without_active_coefficients():
    spec = prior_spec(2.0, 1.0, 1, 0.5, A=1.0)
    assert spec.W < 1
    assert len(spec.ks) == 0
    assert len(prior_sample(spec, RngStream(0))) == 0
    assert van_trees_bound(spec) == 0.0


@pytest.mark.parametrize(
    "beta, n, eps", [(0.5, 100, 0.1), (2.0, 0, 0.1), (2.0, 100, 0.0), (2.0, 100, 1.0)]
)
def test_prior_rejects_bad_arguments(beta, n, eps):
    with pytest.raises(ParameterError):
        prior_spec(beta, 1.0, n, eps)
    with pytest.raises(ParameterError):
        van_trees_closed_form(beta, 1.0, n, eps)


def test_prior_draws_are_bounded():
    spec = prior_spec(2.0, 1.0, 1000, 0.1)
    rng = RngStream(3)
    for index in range(20):
        theta = prior_sample(spec, rng.child(index))
        assert list(theta.ks) == list(spec.ks)
        assert np.all(np.abs(theta.values) <= spec.G * np.sqrt(spec.sigma_sq))


def test_tapered_gaussian_law():
    law = TaperedGaussianLaw.for_eps(0.1)
    G = law.bound
    assert G >= 3
    assert law.fisher_information() == pytest.approx(1.05, rel=1e-6)
    mass, _ = integrate.quad(lambda t: float(law.density(t)), -G, G, limit=200)
    variance, _ = integrate.quad(lambda t: t * t * float(law.density(t)), -G, G, limit=200)
    assert mass == pytest.approx(1.0, rel=1e-8)
    assert variance == pytest.approx(1.0, rel=1e-8)
    assert law.density(G + 0.1) == 0.0
    draws = law.sample(RngStream(5), 20000)
    assert np.all(np.abs(draws) <= G)
    assert abs(draws.mean()) < 0.03
    assert draws.var() == pytest.approx(1.0, abs=0.05)


def test_tapered_gaussian_needs_room():
    with pytest.raises(ParameterError):
        TaperedGaussianLaw(2.0)


def test_smaller_slack_needs_a_wider_taper():
    assert TaperedGaussianLaw.for_eps(0.05).bound > TaperedGaussianLaw.for_eps(0.2).bound


def test_raised_cosine_law():
    law = RaisedCosineLaw()
    T = law.bound
    assert law.fisher_information() == pytest.approx(math.pi**2 / 3 - 2)
    variance, _ = integrate.quad(lambda t: t * t * float(law.density(t)), -T, T)
    assert variance == pytest.approx(1.0, rel=1e-10)
    draws = law.sample(RngStream(6), (100, 50))
    assert draws.shape == (100, 50)
    assert np.all(np.abs(draws) <= T)
    assert draws.var() == pytest.approx(1.0, abs=0.05)


def test_xi_law_lookup():
    assert isinstance(xi_law("raised-cosine", 0.1), RaisedCosineLaw)
    assert isinstance(xi_law(XiLawKind.TAPERED_GAUSSIAN, 0.1), TaperedGaussianLaw)
    with pytest.raises(ValueError):
        xi_law("uniform", 0.1)


def test_raised_cosine_prior_warns_about_fisher_information(caplog):
    with caplog.at_level(logging.WARNING, logger="pinsker_lib.prior"):
        spec = prior_spec(2.0, 1.0, 1000, 0.1, law="raised-cosine")
    assert isinstance(spec.xi_law, RaisedCosineLaw)
    assert "Fisher information" in caplog.text


def test_van_trees_sum_tracks_closed_form():
    beta, L, n, eps = 2.0, 1.0, 10**6, 0.1
    spec = prior_spec(beta, L, n, eps)
    ratio = van_trees_bound(spec) / van_trees_closed_form(beta, L, n, eps)
    assert ratio < 1
    assert ratio == pytest.approx(1 - (beta + 1) / (2 * beta * spec.W), abs=2e-3)


def test_closed_form_at_vanishing_slack():
    beta, L, n = 2.0, 1.0, 10**5
    scaled = van_trees_closed_form(beta, L, n, 1e-12) * n ** (2 * beta / (2 * beta + 1))
    assert scaled == pytest.approx(pinsker_constant(SobolevClass(beta, L)), rel=1e-9)


def test_tail_audit_without_failures():
    spec = prior_spec(1.0, 1.0, 10**6, 0.2)
    parameter_set = ParameterSet(spec.A, 1.0, 1.0)
    audit = lemma1_tail_probability(spec, parameter_set, 1000, RngStream(8))
    assert audit.trials == 1000
    assert audit.failures == 0
    assert audit.frequency == 0.0
    assert audit.ci_low == pytest.approx(0.0, abs=1e-12)
    assert 0 < audit.ci_high < 0.005
    assert audit.l1_failures == 1000


def test_tail_audit_with_shrunken_budget():
    spec = prior_spec(1.0, 1.0, 10**6, 0.2)
    audit = lemma1_tail_probability(spec, ParameterSet(spec.A, 1.0, 1e-3), 1000, RngStream(8))
    assert audit.failures == 1000
    assert audit.frequency == 1.0


def test_tail_audit_is_reproducible_across_workers():
    spec = prior_spec(1.0, 1.0, 10**4, 0.2)
    parameter_set = ParameterSet(spec.A, 1.0, 0.9)
    serial = lemma1_tail_probability(spec, parameter_set, 1200, RngStream(9))
    threaded = lemma1_tail_probability(spec, parameter_set, 1200, RngStream(9), workers=4)
    assert serial == threaded


def test_tail_audit_needs_enough_trials():
    spec = prior_spec(1.0, 1.0, 10**4, 0.2)
    with pytest.raises(ParameterError):
        lemma1_tail_probability(spec, ParameterSet(spec.A, 1.0, 1.0), 999, RngStream(0))

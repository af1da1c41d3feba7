import math

import numpy as np
import pytest
from scipy import special

from pinsker_lib.errors import GridError, ParameterError, SpectralTailError
from pinsker_lib.grid import SobolevClass
from pinsker_lib.kernel import (
    KernelSpec,
    c_min,
    kernel_half_width,
    kernel_hat,
    kernel_tail_mass,
    kernel_time_domain,
    pinsker_constant,
)
from pinsker_lib.spectral import forward_transform


def parabola_kernel(x):
    """Inverse transform of (1 - w^2)_+, by its closed form."""
    x = np.asarray(x, dtype=np.float64)
    safe = np.where(np.abs(x) < 1e-3, 1.0, x)
    values = 2 * (np.sin(safe) - safe * np.cos(safe)) / safe**3 / math.pi
    return np.where(np.abs(x) < 1e-3, (2 / 3) * (1 - x**2 / 10) / math.pi, values)


def test_pinsker_constant_beta_one():
    gamma = pinsker_constant(SobolevClass(1, 1))
    assert gamma == pytest.approx(3 * (6 * math.pi) ** (-2 / 3), rel=1e-14)
    assert gamma == pytest.approx(0.4236, abs=1e-4)


def test_pinsker_constant_beta_two():
    assert pinsker_constant(SobolevClass(2, 1)) == pytest.approx(5 * (7.5 * math.pi) ** -0.8)


def test_pinsker_constant_scaling_law():
    for beta in (0.75, 1.5, 2.0):
        base = pinsker_constant(SobolevClass(beta, 0.5))
        scaled = pinsker_constant(SobolevClass(beta, 0.5 * 2 ** (2 * beta + 1)))
        assert scaled == pytest.approx(2 * base, rel=1e-12)


def test_c_min_values_and_power_law():
    sobolev = SobolevClass(1, 1)
    assert c_min(sobolev, 1000) == pytest.approx((6000 * math.pi) ** (-1 / 3))
    assert c_min(sobolev, 1000) == pytest.approx(0.03757, abs=1e-5)
    assert c_min(sobolev, 8000) == pytest.approx(c_min(sobolev, 1000) / 2)
    beta = 1.5
    sobolev = SobolevClass(beta, 2.0)
    ratio = c_min(sobolev, 1) / c_min(sobolev, 2 ** ((2 * beta + 1) / beta))
    assert ratio == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(ParameterError):
        c_min(sobolev, 0)


def test_kernel_hat():
    spec = KernelSpec(2, 0.25)
    assert kernel_hat(spec, 0.0) == 1.0
    assert kernel_hat(spec, 1.0) == 0.75
    assert kernel_hat(spec, -1.0) == 0.75
    assert kernel_hat(spec, spec.omega_edge) == 0.0
    assert kernel_hat(spec, 10.0) == 0.0
    values = kernel_hat(spec, np.linspace(-3, 3, 61))
    assert np.all((values >= 0) & (values <= 1))
    assert np.allclose(values, values[::-1])


def test_kernel_spec_validation_and_edge():
    spec = KernelSpec(2, 0.25)
    assert spec.omega_edge == pytest.approx(2.0)
    assert spec.peak == pytest.approx(2 / 3 * 2 / math.pi)
    with pytest.raises(ParameterError):
        KernelSpec(0, 1)
    with pytest.raises(ParameterError):
        KernelSpec(1, -1)


def test_minimax_spec_uses_c_min():
    sobolev = SobolevClass(1.5, 2.0)
    assert KernelSpec.minimax(sobolev, 500).c == c_min(sobolev, 500)


def test_kernel_matches_periodized_closed_form():
    kernel = kernel_time_domain(KernelSpec(2, 1), (-32.0, 32.0), 2**10, tail_tol=1e-2)
    shifts = 64.0 * np.arange(-2000, 2001)
    expected = parabola_kernel(kernel.x[:, None] + shifts[None, :]).sum(axis=1)
    assert np.max(np.abs(kernel.values - expected)) < 1e-6


def test_kernel_mass_symmetry_and_peak():
    spec = KernelSpec.minimax(SobolevClass(2, 1), 1000)
    kernel = kernel_time_domain(spec)
    assert kernel.integral() == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(kernel.values[1:], kernel.values[:0:-1], atol=1e-12)
    assert kernel(0.0) == pytest.approx(spec.peak, rel=1e-4)


def test_kernel_transform_reproduces_kernel_hat():
    for beta in (0.75, 1.0, 1.5, 2.0):
        for n in (1000, 100000):
            spec = KernelSpec.minimax(SobolevClass(beta, 1.0), n)
            kernel = kernel_time_domain(spec, (-32.0, 32.0), tail_tol=math.inf)
            spectrum = forward_transform(kernel)
            band = np.abs(spectrum.omegas) <= spec.omega_edge
            error = np.abs(spectrum.values[band] - kernel_hat(spec, spectrum.omegas[band]))
            assert np.max(error) < 1e-5


def test_kernel_is_cached():
    spec = KernelSpec(1.5, 0.05)
    assert kernel_time_domain(spec) is kernel_time_domain(spec)


def test_kernel_rejects_narrow_support():
    with pytest.raises(SpectralTailError):
        kernel_time_domain(KernelSpec(2, 1e4), (-32.0, 32.0), 2**10)


def test_kernel_rejects_coarse_grid():
    with pytest.raises(GridError):
        kernel_time_domain(KernelSpec(2, 1e-8), (-32.0, 32.0), 2**10)


def test_kernel_tail_mass_follows_the_origin_kink():
    spec = KernelSpec.minimax(SobolevClass(0.75, 1.0), 1000)
    expected = 2 * spec.c * special.gamma(0.75) * math.sin(0.375 * math.pi) / (math.pi * 32**0.75)
    assert kernel_tail_mass(spec, 32.0) == pytest.approx(expected, rel=1e-3)
    assert kernel_tail_mass(spec, 32.0) > 2e-3
    assert kernel_tail_mass(spec, 64.0) < kernel_tail_mass(spec, 32.0)
    with pytest.raises(GridError):
        kernel_tail_mass(spec, 0.0)


def test_kernel_tail_mass_matches_a_wide_kernel():
    spec = KernelSpec.minimax(SobolevClass(1, 1), 1000)
    wide = kernel_time_domain(spec, (-256.0, 256.0), 2**17, tail_tol=math.inf)
    inside = wide.dx * float(np.sum(wide.values[np.abs(wide.x) < 32.0]))
    assert 1.0 - inside == pytest.approx(2 * spec.c / (32 * math.pi), rel=0.02)
    assert 1.0 - inside <= kernel_tail_mass(spec, 32.0)


def test_kernel_rejects_a_heavy_tail_on_narrow_support():
    spec = KernelSpec.minimax(SobolevClass(0.75, 1.0), 1000)
    with pytest.raises(SpectralTailError) as info:
        kernel_time_domain(spec, (-32.0, 32.0))
    assert "widen the kernel support" in str(info.value)
    assert info.value.fraction == pytest.approx(kernel_tail_mass(spec, 32.0))


def test_default_support_meets_the_tail_tolerance():
    spec = KernelSpec.minimax(SobolevClass(2, 1), 1000)
    half = kernel_half_width(spec)
    assert half > 32.0
    assert kernel_tail_mass(spec, half) <= 1e-6
    kernel = kernel_time_domain(spec)
    assert kernel.support_hi == pytest.approx(half)
    assert kernel_half_width(spec, 1e-3) < half
    assert kernel_half_width(spec, math.inf) == 32.0
    with pytest.raises(ParameterError):
        kernel_half_width(spec, 0.0)

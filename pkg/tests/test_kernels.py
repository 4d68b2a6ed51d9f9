"""Kernel contracts checked against independent closed forms.

The sin-squared kernel sin^2(mu)/(pi m u^2) has the exact distribution
function

    F(u) = 1/2 + Si(2 m u)/pi - sin^2(m u)/(pi m u)

(differentiate and the Si term's sin(2mu)/(pi u) cancels against the
product-rule cross term, leaving the density).  That one formula is an
independent oracle for interval masses, full-line normalization, and the
rejection sampler, none of which go through the same code path as
kernel_mass.
"""

import math

import numpy as np
import pytest
from scipy.special import erf, sici

from pathdensity import (
    AnalyticModeOnlyError,
    KernelSpec,
    exact_delta,
    fejer,
    gaussian,
    kernel_log_eval,
    kernel_mass,
    kernel_sample,
    truncated_fejer,
)


def fejer_cdf(u, m):
    """Closed-form distribution function of the sin-squared kernel."""
    u = np.asarray(u, dtype=float)
    si = sici(2.0 * m * u)[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        bump = np.where(u == 0.0, 0.0, np.sin(m * u) ** 2 / (np.pi * m * u))
    return 0.5 + si / np.pi - bump


# ----------------------------------------------------------------- specs --


def test_spec_validation():
    with pytest.raises(ValueError):
        gaussian(0.0)
    with pytest.raises(ValueError):
        fejer(-1.0)
    with pytest.raises(ValueError):
        truncated_fejer(1.0, 0.0)
    with pytest.raises(ValueError):
        KernelSpec("gaussian", 2.0, 5.0)  # radius only for truncated
    with pytest.raises(ValueError):
        KernelSpec("no_such_family", 2.0)


def test_exact_delta_is_special():
    k = exact_delta()
    assert k.is_exact
    assert k.width == 0.0
    with pytest.raises(AnalyticModeOnlyError):
        kernel_log_eval(k, 0.3)


def test_width_scale():
    assert gaussian(2.0).width == pytest.approx(1.0 / (2.0 * math.sqrt(2.0)))
    assert fejer(4.0).width == pytest.approx(1.0 / (4.0 * math.sqrt(2.0)))


# ------------------------------------------------------------ pointwise --


def test_gaussian_log_eval_closed_form():
    m = 3.0
    u = np.array([-1.2, -0.3, 0.0, 0.7, 2.0])
    expected = np.log(m / math.sqrt(math.pi)) - (m * u) ** 2
    np.testing.assert_allclose(kernel_log_eval(gaussian(m), u), expected, rtol=1e-14)


def test_fejer_log_eval_closed_form_off_node():
    m = 2.0
    for u in (0.13, -0.41, 1.07, 3.9):
        expected = math.log(math.sin(m * u) ** 2 / (math.pi * m * u * u))
        assert kernel_log_eval(fejer(m), u) == pytest.approx(expected, rel=1e-12)


def test_fejer_peak_value():
    # sin^2(mu)/(pi m u^2) -> m/pi as u -> 0
    m = 5.0
    assert kernel_log_eval(fejer(m), 0.0) == pytest.approx(math.log(m / math.pi))


def test_fejer_nodes_are_exact_zeros():
    m = 2.0
    k = fejer(m)
    for j in (1, 2, 3, 7):
        u = j * math.pi / m
        assert kernel_log_eval(k, u) == -math.inf
        assert kernel_log_eval(k, -u) == -math.inf
        # one ulp off the node must still be flushed to the node
        assert kernel_log_eval(k, np.nextafter(u, 2 * u)) == -math.inf


def test_truncated_fejer_support():
    k = truncated_fejer(1.0, 5.0)
    assert kernel_log_eval(k, 5.1) == -math.inf
    assert kernel_log_eval(k, -5.1) == -math.inf
    # inside the cut it matches the untruncated values
    assert kernel_log_eval(k, 1.3) == kernel_log_eval(fejer(1.0), 1.3)


def test_scalar_and_array_agree():
    k = fejer(1.5)
    us = np.linspace(-3.0, 3.0, 11)
    arr = kernel_log_eval(k, us)
    for i, u in enumerate(us):
        assert arr[i] == kernel_log_eval(k, float(u))


# ----------------------------------------------------------------- mass --


def test_gaussian_mass_interval_matches_erf():
    m = 2.5
    for a, b in ((-0.4, 0.9), (-3.0, -1.0), (0.0, 10.0)):
        expected = 0.5 * (erf(m * b) - erf(m * a))
        assert kernel_mass(gaussian(m), a, b) == pytest.approx(expected, abs=1e-12)


def test_gaussian_mass_full_line():
    for m in (0.5, 1.0, 8.0):
        assert abs(kernel_mass(gaussian(m), -math.inf, math.inf) - 1.0) < 1e-9


def test_fejer_mass_full_line():
    for m in (0.5, 1.0, 3.0, 16.0):
        assert abs(kernel_mass(fejer(m), -math.inf, math.inf) - 1.0) < 1e-6


def test_fejer_mass_matches_si_cdf():
    m = 2.0
    k = fejer(m)
    for a, b in ((-1.0, 1.0), (0.3, 4.0), (-7.5, -0.2), (-20.0, 0.1)):
        expected = float(fejer_cdf(b, m) - fejer_cdf(a, m))
        assert kernel_mass(k, a, b) == pytest.approx(expected, abs=1e-8)


def test_fejer_half_line_mass():
    m = 1.7
    assert kernel_mass(fejer(m), 0.0, math.inf) == pytest.approx(0.5, abs=1e-7)
    assert kernel_mass(fejer(m), -math.inf, 0.0) == pytest.approx(0.5, abs=1e-7)


def test_mass_additivity():
    k = fejer(1.0)
    pieces = kernel_mass(k, -2.0, 0.5) + kernel_mass(k, 0.5, 6.0)
    assert pieces == pytest.approx(kernel_mass(k, -2.0, 6.0), abs=1e-9)


def test_truncated_mass_equals_windowed_untruncated():
    m, r = 1.0, 20.0
    t = truncated_fejer(m, r)
    expected = float(fejer_cdf(r, m) - fejer_cdf(-r, m))
    assert kernel_mass(t, -math.inf, math.inf) == pytest.approx(expected, abs=1e-7)
    # nothing outside the cut
    assert kernel_mass(t, r, math.inf) == 0.0


def test_exact_delta_mass_is_indicator():
    k = exact_delta()
    assert kernel_mass(k, -1.0, 1.0) == 1.0
    assert kernel_mass(k, 0.5, 2.0) == 0.0


# ------------------------------------------------------------- sampling --


def test_gaussian_sampler_moments():
    m = 2.0
    rng = np.random.default_rng(101)
    u = kernel_sample(gaussian(m), rng, 200_000)
    assert abs(u.mean()) < 4.0 / math.sqrt(2.0 * m * m * len(u))
    assert u.var() == pytest.approx(1.0 / (2.0 * m * m), rel=0.02)


def test_fejer_sampler_ks_against_si_cdf():
    m = 1.0
    rng = np.random.default_rng(7)
    u = np.sort(kernel_sample(fejer(m), rng, 30_000))
    f = fejer_cdf(u, m)
    grid = np.arange(1, u.size + 1) / u.size
    d = np.max(np.maximum(np.abs(grid - f), np.abs(grid - 1.0 / u.size - f)))
    print(f"fejer sampler KS distance at n=30000: {d:.5f}")
    assert d < 0.015


def test_fejer_sampler_scales_with_m():
    # u ~ density(m) iff m*u ~ density(1)
    rng = np.random.default_rng(8)
    m = 4.0
    u = np.sort(kernel_sample(fejer(m), rng, 30_000))
    f = fejer_cdf(m * u, 1.0)
    grid = np.arange(1, u.size + 1) / u.size
    assert np.max(np.abs(grid - f)) < 0.015


def test_truncated_sampler_stays_inside_and_renormalizes():
    m, r = 1.0, 10.0
    rng = np.random.default_rng(9)
    u = kernel_sample(truncated_fejer(m, r), rng, 40_000)
    assert np.all(np.abs(u) <= r)
    # conditional CDF given |u| <= r
    inside = float(fejer_cdf(r, m) - fejer_cdf(-r, m))
    us = np.sort(u)
    f = (fejer_cdf(us, m) - fejer_cdf(-r, m)) / inside
    grid = np.arange(1, us.size + 1) / us.size
    assert np.max(np.abs(grid - f)) < 0.015


def test_exact_delta_sampler_is_degenerate():
    rng = np.random.default_rng(10)
    u = kernel_sample(exact_delta(), rng, 50)
    assert np.all(u == 0.0)


def test_sampler_seed_determinism():
    k = fejer(2.0)
    a = kernel_sample(k, np.random.default_rng(42), 1000)
    b = kernel_sample(k, np.random.default_rng(42), 1000)
    np.testing.assert_array_equal(a, b)

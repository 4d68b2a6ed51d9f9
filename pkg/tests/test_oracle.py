"""Brute-force lattice path sums against closed forms.

With a Gaussian kernel and a point mass on the integration constants the
path weight factorizes across slices, so every lattice moment reduces to
a one-dimensional Riemann quotient that this file recomputes longhand.
The lattice itself is also cross-checked against the package's nested
slice quadrature and against Monte Carlo.
"""

import math

import numpy as np
import pytest

from pathdensity import (
    AnalyticModeOnlyError,
    ConfigError,
    DivergentObservableError,
    LatticeBudgetError,
    LatticeSpec,
    PathDensity,
    SamplerConfig,
    box_uniform,
    clipped_mass,
    exact_delta,
    expectation,
    fejer,
    gaussian,
    lattice_expectation,
    lattice_for,
    make_grid,
    make_system,
    oracle_compare,
    pinned_alpha,
    point_mass,
    position_at,
    position_squared_at,
    slice_quadrature,
    truncated_fejer,
)
from pathdensity import kernel_moment

HO = make_system("harmonic_oscillator_1d", omega=2.0)
GRID4 = make_grid(0.0, 1.2, 4)
ALPHA = pinned_alpha(HO, 1.0, 0.0)


def ho4(kernel, measure=None):
    return PathDensity(HO, GRID4, kernel, measure or point_mass(ALPHA))


# ----------------------------------------------------------------- spec --


def test_lattice_spec_budget_guardrails():
    LatticeSpec(4, 41, [[-1.0, 1.0]])
    with pytest.raises(LatticeBudgetError):
        LatticeSpec(7, 8, [[-1.0, 1.0]])  # too many slices
    with pytest.raises(LatticeBudgetError):
        LatticeSpec(4, 65, [[-1.0, 1.0]])  # too many points per slice
    with pytest.raises(LatticeBudgetError):
        LatticeSpec(6, 64, [[-1.0, 1.0]])  # 64^6 paths blows the budget
    with pytest.raises(ValueError):
        LatticeSpec(4, 8, [[1.0, -1.0]])


def test_lattice_for_covers_the_classical_path():
    density = ho4(gaussian(2.0))
    lattice = lattice_for(density, 41, widths=6.0)
    xs = density.classical_values(ALPHA)
    lo, hi = lattice.x_range[0]
    assert lo < xs.min() and hi > xs.max()
    assert clipped_mass(density, lattice) < 1e-6


def test_clipped_mass_flags_narrow_windows():
    density = ho4(gaussian(2.0))
    tight = lattice_for(density, 41, widths=0.5)
    assert clipped_mass(density, tight) > 0.1


# ------------------------------------------------------ factorized oracle --


def riemann_slice_moment(density, t_index, power, lattice):
    """Longhand 1-D Riemann quotient for factorized point-mass densities."""
    pts = lattice.grid_points()[0]
    x_s = density.classical_values(density.alpha_measure.alpha0)[t_index, 0]
    m = density.kernel.m_delta
    w = np.exp(-((m * (pts - x_s)) ** 2))
    return float(np.sum(w * pts**power) / np.sum(w))


def test_lattice_matches_factorized_riemann_quotient():
    density = ho4(gaussian(2.0))
    lattice = lattice_for(density, 41)
    for t_idx in (0, 2):
        for power, obs in ((1, position_at(t_idx)), (2, position_squared_at(t_idx))):
            got = lattice_expectation(density, obs, lattice)
            want = riemann_slice_moment(density, t_idx, power, lattice)
            assert got == pytest.approx(want, abs=1e-10), (t_idx, power)


def test_lattice_second_moment_near_continuum_value():
    m = 2.0
    density = ho4(gaussian(m))
    lattice = lattice_for(density, 48)
    x_s = density.classical_values(ALPHA)[2, 0]
    got = lattice_expectation(density, position_squared_at(2), lattice)
    assert got == pytest.approx(x_s**2 + 1.0 / (2 * m * m), abs=1e-3)


def test_lattice_refinement_is_cauchy():
    density = ho4(gaussian(2.0))
    a = lattice_expectation(density, position_at(1), lattice_for(density, 33))
    b = lattice_expectation(density, position_at(1), lattice_for(density, 49))
    assert a == pytest.approx(b, abs=1e-4)


def test_lattice_shift_invariance_of_logsumexp():
    # identical physics placed 1000 units away must give the same moment
    free = make_system("free_particle_1d")
    grid = make_grid(0.0, 1.0, 4)
    near = PathDensity(free, grid, gaussian(2.0), point_mass([0.3, 0.5]))
    far = PathDensity(free, grid, gaussian(2.0), point_mass([1000.3, 0.5]))
    ln = lattice_expectation(near, position_at(2), lattice_for(near, 41))
    lf = lattice_expectation(far, position_at(2), lattice_for(far, 41))
    assert lf - 1000.0 == pytest.approx(ln, abs=1e-9)


def test_lattice_handles_alpha_mixtures():
    density = PathDensity(
        HO, GRID4, gaussian(4.0), box_uniform([0.9, -0.1], [1.1, 0.1]), (), 17
    )
    lattice = lattice_for(density, 21)
    got = lattice_expectation(density, position_at(3), lattice)
    res = expectation(
        density, position_at(3), SamplerConfig("ancestral", 60_000, seed=11)
    )
    assert abs(res.estimate - got) < 4 * res.std_error


def test_lattice_rejects_exact_and_mismatched():
    with pytest.raises(AnalyticModeOnlyError):
        lattice_expectation(
            ho4(exact_delta()), position_at(0), LatticeSpec(4, 8, [[-2, 2]])
        )
    with pytest.raises(ConfigError):
        lattice_expectation(
            ho4(gaussian(1.0)), position_at(0), LatticeSpec(5, 8, [[-2, 2]])
        )


# ------------------------------------------------------- kernel moments --


def test_gaussian_moment_quadrature():
    val, err = kernel_moment(gaussian(2.0), 2)
    assert val == pytest.approx(1.0 / 8.0, abs=1e-12)
    val0, _ = kernel_moment(gaussian(2.0), 0)
    assert val0 == pytest.approx(1.0, abs=1e-12)


def test_truncated_fejer_second_moment_closed_form():
    m, r = 1.0, 20.0
    want = (r - math.sin(2 * m * r) / (2 * m)) / (math.pi * m)
    val, err = kernel_moment(truncated_fejer(m, r), 2)
    assert err < 1e-8
    assert val == pytest.approx(want, rel=1e-9)


def test_untruncated_fejer_moments_diverge():
    with pytest.raises(DivergentObservableError):
        kernel_moment(fejer(1.0), 2)


# ------------------------------------------------------- slice quadrature --


def test_slice_quadrature_matches_closed_form():
    m = 2.0
    density = ho4(gaussian(m))
    x_s = density.classical_values(ALPHA)[2, 0]
    got1 = slice_quadrature(density, position_at(2))
    got2 = slice_quadrature(density, position_squared_at(2))
    assert got1 == pytest.approx(x_s, abs=1e-10)
    assert got2 == pytest.approx(x_s**2 + 1.0 / (2 * m * m), abs=1e-10)


def test_oracle_compare_agree_and_disagree():
    density = ho4(gaussian(2.0))
    obs = position_squared_at(2)
    lattice = lattice_for(density, 48)
    res = expectation(density, obs, SamplerConfig("ancestral", 40_000, seed=12))
    report = oracle_compare(
        density, obs, res.estimate, res.std_error, lattice, case_id="good"
    )
    assert report["verdict"] == "agree"
    assert report["clipped_mass"] < 1e-6
    assert report["quadrature_value"] == pytest.approx(
        report["lattice_value"], abs=1e-3
    )

    bad = oracle_compare(
        density,
        obs,
        res.estimate + 50 * res.std_error,
        res.std_error,
        lattice,
        case_id="bad",
    )
    assert bad["verdict"] == "disagree"

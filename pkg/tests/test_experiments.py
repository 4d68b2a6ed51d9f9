"""Experiment drivers: sharpness sweeps, grid studies, regression battery.

The Gaussian kernel adds variance 1/(2 m^2) to every slice, so the
squared-position deviation from the classical value is exactly 1/(2 m^2)
and the sweep must come down with log-log slope -2.  Centering the
observable where the classical path crosses zero makes the Monte Carlo
noise proportional to the signal at every sharpness, which keeps the
fitted slope stable without huge sample counts.
"""

import math

import numpy as np
import pytest

from pathdensity import (
    ConfigError,
    PathDensity,
    SamplerConfig,
    classical_limit_sweep,
    classical_reference,
    energy,
    exact_delta,
    gaussian,
    grid_refinement_study,
    loglog_slope,
    make_grid,
    make_system,
    pinned_alpha,
    point_mass,
    position_at,
    position_pin,
    position_squared_at,
    regression_battery,
    sweep_converged,
    truncated_fejer,
)
from pathdensity.experiments import _kernel_at

HO2 = make_system("harmonic_oscillator_1d", omega=2.0)
# x_s(t) = cos(2t) crosses zero at t = pi/4, which is slice 8 of this grid
GRID = make_grid(0.0, math.pi / 2.0, 17)
ALPHA = pinned_alpha(HO2, 1.0, 0.0)
T_MID = 8


def template(kernel=None):
    return PathDensity(HO2, GRID, kernel or gaussian(1.0), point_mass(ALPHA))


def test_classical_reference_is_exact():
    ref = classical_reference(template(), position_squared_at(T_MID))
    assert ref == pytest.approx(0.0, abs=1e-25)
    ref_pos = classical_reference(template(), position_at(3))
    assert ref_pos == pytest.approx(math.cos(2.0 * GRID.times[3]), rel=1e-12)


def test_classical_reference_ignores_soft_pins():
    soft = PathDensity(
        HO2,
        GRID,
        gaussian(1.0),
        point_mass(ALPHA),
        (position_pin(0, [0.7], gaussian(3.0)),),
    )
    hard = template()
    obs = position_at(5)
    assert classical_reference(soft, obs) == classical_reference(hard, obs)


def test_kernel_at_rescales_and_preserves_truncation_product():
    k = _kernel_at(gaussian(1.0), 8.0)
    assert k.family == "gaussian" and k.m_delta == 8.0
    t = _kernel_at(truncated_fejer(2.0, 10.0), 4.0)
    assert t.m_delta == 4.0
    assert t.trunc_radius == pytest.approx(5.0)  # m * R stays fixed
    with pytest.raises(ConfigError):
        _kernel_at(exact_delta(), 4.0)


def test_sweep_deviations_fall_with_slope_minus_two():
    cfg = SamplerConfig("ancestral", 40_000, seed=101)
    res = classical_limit_sweep(
        template(), position_squared_at(T_MID), [1.0, 2.0, 4.0, 8.0], cfg
    )
    assert res.classical_reference == pytest.approx(0.0, abs=1e-25)
    devs = res.deviations
    assert np.all(np.diff(devs) < 0)
    assert sweep_converged(res)
    slope = loglog_slope(res)
    assert slope == pytest.approx(-2.0, abs=0.15), slope
    # absolute level: deviation at m is 1/(2 m^2)
    np.testing.assert_allclose(devs, 0.5 / res.m_values**2, rtol=0.05)


def test_sweep_is_deterministic_across_workers():
    cfg = SamplerConfig("ancestral", 5_000, seed=7)
    obs = position_squared_at(T_MID)
    a = classical_limit_sweep(template(), obs, [1.0, 2.0, 4.0], cfg, workers=1)
    b = classical_limit_sweep(template(), obs, [1.0, 2.0, 4.0], cfg, workers=3)
    np.testing.assert_array_equal(a.estimates, b.estimates)
    np.testing.assert_array_equal(a.std_errors, b.std_errors)


def test_sweep_needs_three_increasing_values():
    cfg = SamplerConfig("ancestral", 100, seed=0)
    with pytest.raises(ConfigError):
        classical_limit_sweep(template(), position_at(0), [1.0, 2.0], cfg)
    with pytest.raises(ConfigError):
        classical_limit_sweep(template(), position_at(0), [2.0, 1.0, 4.0], cfg)


def test_grid_refinement_tracks_physical_time():
    # the observable sits at t = pi/4 on every grid, whatever its resolution
    cfg = SamplerConfig("ancestral", 30_000, seed=11)
    study = grid_refinement_study(
        template(gaussian(4.0)), position_at(T_MID), [17, 33, 65], cfg
    )
    assert [r.n_slices for r in study.rows] == [17, 33, 65]
    for row in study.rows:
        assert abs(row.estimate - study.classical_reference) < 4 * row.std_error


def test_grid_refinement_exact_mode_is_flat():
    density = PathDensity(HO2, GRID, exact_delta(), point_mass(ALPHA))
    cfg = SamplerConfig("ancestral", 1, seed=0)
    study = grid_refinement_study(
        density, energy(stencil="analytic"), [17, 33, 65], cfg
    )
    vals = [r.estimate for r in study.rows]
    assert vals[0] == vals[1] == vals[2] == pytest.approx(2.0, abs=1e-12)
    assert all(r.std_error == 0.0 for r in study.rows)


def test_regression_battery_all_green():
    report = regression_battery()
    for line in report.lines():
        print(line)
    assert report.passed, "\n".join(
        line for line in report.lines() if line.startswith("[FAIL]")
    )
    ids = [row.row_id for row in report.rows]
    assert len(ids) == len(set(ids))
    assert len(ids) >= 8

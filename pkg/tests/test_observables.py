"""Observables and expectation estimation.

The forward-stencil energy on kernel-noisy paths has a computable
inflation: with iid slice noise of variance s^2, the finite-difference
velocity picks up 2 s^2 / dt^2 of extra variance and the squared
position picks up s^2, so

    E[E_fd] = m/2 (v_cl^2 + 2 s^2/dt^2) + m w^2/2 (x_cl^2 + s^2)

for the oscillator.  That closed form pins down both the stencil and the
potential hook without any sampling shortcuts.
"""

import math

import numpy as np
import pytest

from pathdensity import (
    ConfigError,
    DivergentObservableError,
    PathDensity,
    SamplerConfig,
    Trajectory,
    box_uniform,
    custom,
    energy,
    eval_solution,
    evaluate,
    evaluate_batch,
    exact_delta,
    expectation,
    fejer,
    gaussian,
    make_grid,
    make_system,
    node_scan,
    path_average,
    pinned_alpha,
    point_mass,
    position_at,
    position_pin,
    position_squared_at,
    sample,
    truncated_fejer,
    velocity_pin,
)
from pathdensity.observables import SweepResult, check_moments, config_digest

HO = make_system("harmonic_oscillator_1d", omega=2.0)
GRID = make_grid(0.0, 1.5, 16)
ALPHA = pinned_alpha(HO, 1.0, 0.0)


def ho_density(kernel, **kw):
    return PathDensity(HO, GRID, kernel, point_mass(ALPHA), **kw)


# ------------------------------------------------------------ evaluation --


def test_position_observables_read_the_array():
    density = ho_density(gaussian(2.0))
    batch = sample(density, SamplerConfig("ancestral", 50, seed=1))
    got = evaluate_batch(position_at(7), batch.values, GRID, HO)
    np.testing.assert_array_equal(got, batch.values[:, 7, 0])
    got2 = evaluate_batch(position_squared_at(7), batch.values, GRID, HO)
    np.testing.assert_allclose(got2, batch.values[:, 7, 0] ** 2, rtol=1e-15)


def test_path_average_of_linear_path():
    free = make_system("free_particle_1d")
    grid = make_grid(0.0, 2.0, 9)
    x = eval_solution(free, [0.5, 1.5], grid)  # x = 0.5 + 1.5 t
    obs = path_average(position_at(0))
    # uniform slice average of a linear function is its midpoint value
    assert evaluate(obs, x, free) == pytest.approx(0.5 + 1.5 * 1.0, rel=1e-14)


def test_custom_observable():
    x = eval_solution(HO, ALPHA, GRID)
    obs = custom(lambda traj: float(np.max(traj.values)), name="max_x")
    assert evaluate(obs, x, HO) == pytest.approx(1.0, abs=1e-12)
    assert obs.label == "max_x"


def test_analytic_energy_is_exact_on_classical_paths():
    rng = np.random.default_rng(2)
    obs = energy(t_index=0, stencil="analytic")
    for _ in range(10):
        alpha = rng.normal(size=2)
        x = eval_solution(HO, alpha, GRID)
        v0 = HO.eval_velocity(alpha, 0.0)
        expected = 0.5 * float(v0 @ v0) + float(HO.potential(HO.eval(alpha, 0.0)))
        assert evaluate(obs, x, HO, alpha=alpha) == pytest.approx(expected, rel=1e-13)


def test_analytic_energy_requires_alpha():
    x = eval_solution(HO, ALPHA, GRID)
    with pytest.raises(ConfigError):
        evaluate(energy(stencil="analytic"), x, HO)


def test_stencil_orders_on_classical_path():
    # forward error is O(dt), central is O(dt^2)
    alpha = pinned_alpha(HO, 0.7, 0.5)
    exact = 0.5 * 0.5**2 + 0.5 * 4.0 * 0.7**2
    errs = {}
    for n in (33, 65):
        grid = make_grid(0.0, 1.5, n)
        x = eval_solution(HO, alpha, grid)
        t_mid = 16 if n == 33 else 32
        errs[n] = {
            "forward": abs(evaluate(energy(t_mid, "forward"), x, HO) - exact),
            "central": abs(evaluate(energy(t_mid, "central"), x, HO) - exact),
        }
    fwd_ratio = errs[33]["forward"] / errs[65]["forward"]
    cen_ratio = errs[33]["central"] / errs[65]["central"]
    assert 1.7 < fwd_ratio < 2.4, fwd_ratio
    assert 3.4 < cen_ratio < 4.7, cen_ratio


def test_forward_energy_inflation_under_kernel_noise():
    m = 2.0
    density = ho_density(gaussian(m))
    batch = sample(density, SamplerConfig("ancestral", 100_000, seed=3))
    t_idx = 4
    vals = evaluate_batch(energy(t_idx, "forward"), batch.values, GRID, HO)
    s2 = 1.0 / (2.0 * m * m)
    dt = GRID.dt
    t = GRID.times[t_idx]
    x_cl = math.cos(2.0 * t)
    v_cl = (math.cos(2.0 * (t + dt)) - x_cl) / dt  # stencil on the mean path
    expected = 0.5 * (v_cl**2 + 2.0 * s2 / dt**2) + 0.5 * 4.0 * (x_cl**2 + s2)
    se = vals.std() / math.sqrt(len(vals))
    assert abs(vals.mean() - expected) < 5 * se


# ----------------------------------------------------------- expectation --


def test_exact_mode_expectation_is_deterministic():
    density = ho_density(exact_delta())
    res = expectation(density, energy(stencil="analytic"), SamplerConfig("ancestral", 1))
    assert res.estimate == pytest.approx(2.0, abs=1e-13)
    assert res.std_error == 0.0
    assert res.n_samples == 1
    assert res.ess == 1.0


def test_exact_mode_mixture_expectation():
    lo, hi = np.array([0.0, 0.8]), np.array([0.2, 1.2])
    density = PathDensity(HO, GRID, exact_delta(), box_uniform(lo, hi))
    res = expectation(density, position_at(0), SamplerConfig("ancestral", 1))
    # x(0) = alpha_1; uniform average over the box
    assert res.estimate == pytest.approx(1.0, abs=1e-10)
    assert res.std_error == 0.0


def test_sampling_expectation_hits_known_moment():
    m = 4.0
    density = ho_density(gaussian(m))
    res = expectation(
        density, position_squared_at(8), SamplerConfig("ancestral", 50_000, seed=4)
    )
    x_s = density.classical_values(ALPHA)[8, 0]
    truth = x_s**2 + 1.0 / (2.0 * m * m)
    assert res.std_error > 0
    assert abs(res.estimate - truth) < 5 * res.std_error
    assert res.ess <= res.n_samples


def test_metropolis_expectation_uses_chain_ess():
    density = ho_density(gaussian(2.0))
    res = expectation(
        density,
        position_at(3),
        SamplerConfig("metropolis_path", 8_000, burn_in=500, proposal_step=0.5, seed=5),
    )
    assert res.ess < res.n_samples
    x_s = density.classical_values(ALPHA)[3, 0]
    assert abs(res.estimate - x_s) < 6 * res.std_error


def test_divergent_moment_sentinel():
    density = ho_density(fejer(2.0))
    with pytest.raises(DivergentObservableError):
        expectation(
            density, position_squared_at(3), SamplerConfig("ancestral", 100, seed=6)
        )
    with pytest.raises(DivergentObservableError):
        check_moments(density, energy(0))
    # truncation restores every polynomial moment
    check_moments(ho_density(truncated_fejer(2.0, 30.0)), position_squared_at(3))


def test_soft_pins_route_through_importance_or_metropolis():
    density = ho_density(
        gaussian(2.0),
        path_constraints=(position_pin(3, [0.9], gaussian(4.0)),),
    )
    res = expectation(
        density,
        position_at(3),
        SamplerConfig("importance_from_ancestral", 20_000, seed=7),
    )
    p_k, p_c = 8.0, 32.0
    x_s = ho_density(gaussian(2.0)).classical_values(ALPHA)[3, 0]
    posterior = (p_k * x_s + p_c * 0.9) / (p_k + p_c)
    assert abs(res.estimate - posterior) < 5 * res.std_error


def test_config_digest_distinguishes_runs():
    d1 = ho_density(gaussian(2.0))
    d2 = ho_density(gaussian(2.5))
    cfg = SamplerConfig("ancestral", 100, seed=0)
    obs = position_at(0)
    assert config_digest(d1, obs, cfg) == config_digest(d1, obs, cfg)
    assert config_digest(d1, obs, cfg) != config_digest(d2, obs, cfg)
    assert config_digest(d1, position_at(1), cfg) != config_digest(d1, obs, cfg)


# ------------------------------------------------------------- node scan --


def test_fejer_node_scan_finds_pi_over_m_family():
    m = 2.0
    density = ho_density(fejer(m))
    x_s = density.classical_values(ALPHA)[5, 0]
    span = 4.0 * math.pi / m
    res = node_scan(density, 5, (x_s - span, x_s + span), 2001)
    cell = 2.0 * span / 2000
    expected = sorted(x_s + k * math.pi / m for k in (-3, -2, -1, 1, 2, 3))
    assert res.n_nodes == 6
    for want, got in zip(expected, res.node_positions):
        assert abs(got - want) <= cell, (want, got)


def test_gaussian_scan_has_no_nodes():
    density = ho_density(gaussian(2.0))
    x_s = density.classical_values(ALPHA)[5, 0]
    res = node_scan(density, 5, (x_s - 6.0, x_s + 6.0), 2001)
    assert res.n_nodes == 0


def test_node_scan_requires_one_dimension():
    free3 = make_system("free_particle_3d")
    density = PathDensity(
        free3, GRID, gaussian(1.0), point_mass(np.zeros(6))
    )
    with pytest.raises(ConfigError):
        node_scan(density, 0, (-1.0, 1.0), 101)


def test_sweep_result_validates_ordering():
    with pytest.raises(ValueError):
        SweepResult(
            m_values=np.array([4.0, 2.0]),
            estimates=np.zeros(2),
            std_errors=np.zeros(2),
            n_samples=np.array([10, 10]),
            classical_reference=0.0,
        )

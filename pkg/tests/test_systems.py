"""The solution catalog against the equations of motion themselves.

Each catalog entry ships closed-form trajectories; central finite
differences of those trajectories must reproduce the advertised velocity
and acceleration fields, which checks the basis, its time derivative,
and the force convention in one shot.
"""

import numpy as np
import pytest

from pathdensity import (
    CATALOG_IDS,
    SingularConstraintError,
    constraint_jacobian,
    eval_solution,
    make_grid,
    make_system,
    pinned_alpha,
)

ALL_SYSTEMS = [
    make_system("free_particle_1d"),
    make_system("harmonic_oscillator_1d", omega=1.7),
    make_system("constant_force_1d", force=2.0, mass=0.5),
    make_system("free_particle_3d"),
]


def random_alpha(system, seed):
    return np.random.default_rng(seed).normal(size=system.n_constants)


def test_catalog_contents():
    assert set(CATALOG_IDS) == {
        "free_particle_1d",
        "harmonic_oscillator_1d",
        "constant_force_1d",
        "free_particle_3d",
    }
    with pytest.raises(ValueError):
        make_system("pendulum")


@pytest.mark.parametrize("system", ALL_SYSTEMS, ids=lambda s: s.name)
def test_velocity_is_time_derivative(system):
    alpha = random_alpha(system, 1)
    h = 1e-6
    for t in (0.0, 0.37, 2.0):
        fd = (system.eval(alpha, t + h) - system.eval(alpha, t - h)) / (2 * h)
        np.testing.assert_allclose(system.eval_velocity(alpha, t), fd, atol=1e-8)


@pytest.mark.parametrize("system", ALL_SYSTEMS, ids=lambda s: s.name)
def test_solutions_satisfy_equations_of_motion(system):
    alpha = random_alpha(system, 2)
    h = 1e-5
    for t in (0.1, 0.9, 1.8):
        x = system.eval(alpha, t)
        fd2 = (
            system.eval(alpha, t + h) - 2 * x + system.eval(alpha, t - h)
        ) / (h * h)
        np.testing.assert_allclose(fd2, system.acceleration(x), atol=1e-4)


@pytest.mark.parametrize("system", ALL_SYSTEMS, ids=lambda s: s.name)
def test_pinned_alpha_round_trip(system):
    rng = np.random.default_rng(3)
    x0 = rng.normal(size=system.dim)
    v0 = rng.normal(size=system.dim)
    for t0 in (0.0, 0.6):
        alpha = pinned_alpha(system, x0, v0, t0)
        np.testing.assert_allclose(system.eval(alpha, t0), x0, atol=1e-10)
        np.testing.assert_allclose(system.eval_velocity(alpha, t0), v0, atol=1e-10)


def test_pinned_alpha_oscillator_known_value():
    # x = a0 sin(wt) + a1 cos(wt); x(0)=1, v(0)=0 picks out (0, 1)
    sys_ = make_system("harmonic_oscillator_1d", omega=2.0)
    np.testing.assert_allclose(pinned_alpha(sys_, 1.0, 0.0), [0.0, 1.0], atol=1e-14)


def test_pinned_alpha_scalar_inputs():
    sys_ = make_system("free_particle_1d")
    alpha = pinned_alpha(sys_, 0.5, -1.5)
    np.testing.assert_allclose(alpha, [0.5, -1.5])


def test_jacobian_values():
    assert constraint_jacobian(make_system("free_particle_1d")) == pytest.approx(1.0)
    assert constraint_jacobian(make_system("constant_force_1d")) == pytest.approx(1.0)
    for w in (1.0, 2.0, 3.0):
        sys_ = make_system("harmonic_oscillator_1d", omega=w)
        assert constraint_jacobian(sys_) == pytest.approx(w, abs=1e-13)
    assert constraint_jacobian(make_system("free_particle_3d")) == pytest.approx(1.0)


def test_jacobian_independent_of_pin_time():
    sys_ = make_system("harmonic_oscillator_1d", omega=3.0)
    vals = [constraint_jacobian(sys_, t0) for t0 in (0.0, 0.31, 1.4, 2.2)]
    np.testing.assert_allclose(vals, vals[0], rtol=1e-12)


def test_eval_solution_returns_trajectory():
    sys_ = make_system("free_particle_3d")
    grid = make_grid(0.0, 2.0, 9)
    x = eval_solution(sys_, random_alpha(sys_, 4), grid)
    assert x.grid == grid
    assert x.values.shape == (9, 3)


def test_potential_conventions():
    ho = make_system("harmonic_oscillator_1d", omega=2.0, mass=3.0)
    assert ho.potential(np.array([1.5])) == pytest.approx(0.5 * 3.0 * 4.0 * 2.25)
    cf = make_system("constant_force_1d", force=2.0)
    # V = -F x so that E = m v^2/2 - F x is conserved along x = (F/2m) t^2 + ...
    assert cf.potential(np.array([0.7])) == pytest.approx(-1.4)
    free = make_system("free_particle_1d")
    assert free.potential(np.array([9.0])) == 0.0


def test_energy_conservation_along_solutions():
    for system in ALL_SYSTEMS:
        alpha = random_alpha(system, 5)
        m = system.mass
        es = []
        for t in np.linspace(0.0, 2.0, 7):
            x = system.eval(alpha, t)
            v = system.eval_velocity(alpha, t)
            es.append(0.5 * m * float(np.sum(v * v)) + float(system.potential(x)))
        assert max(es) - min(es) < 1e-10, system.name


def test_alpha_length_is_checked():
    sys_ = make_system("free_particle_1d")
    with pytest.raises(ValueError):
        sys_.eval(np.zeros(3), 0.0)


def test_singular_pin_detection():
    # duplicate basis columns make the (position, velocity) map rank 1
    from pathdensity import SystemSolution

    degenerate = SystemSolution(
        name="degenerate",
        dim=1,
        n_constants=2,
        params={"mass": 1.0},
        basis=lambda t: np.ones(np.shape(t) + (1, 2)),
        basis_dot=lambda t: np.zeros(np.shape(t) + (1, 2)),
        offset=lambda t: np.zeros(np.shape(t) + (1,)),
        offset_dot=lambda t: np.zeros(np.shape(t) + (1,)),
        potential=lambda x: np.zeros(np.shape(x)[:-1]),
        acceleration=lambda x: np.zeros_like(x),
    )
    with pytest.raises(SingularConstraintError):
        pinned_alpha(degenerate, 1.0, 0.0)

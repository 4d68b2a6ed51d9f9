"""Catalog of mechanical systems given by their general solutions.

A system here is not an ODE integrator.  It is a closed-form solution
family ``x(t) = basis(t) @ alpha + offset(t)``, linear in the vector of
integration constants ``alpha``, together with the potential that the
family solves.  Everything downstream (densities, samplers, oracles) only
ever needs the family and its time derivative.

Catalog ids accepted by :func:`make_system`:

``free_particle_1d``
    ``x = a1 + a2 t``
``harmonic_oscillator_1d``
    ``x = a1 sin(w t) + a2 cos(w t)``, parameter ``omega > 0``
``constant_force_1d``
    ``x = a1 + a2 t + (F / 2 mass) t^2``
``free_particle_3d``
    ``x_i = a_{2i+1} + a_{2i+2} t`` for i = 0, 1, 2
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SingularConstraintError
from .model import TimeGrid, Trajectory

Array = np.ndarray


@dataclass(frozen=True)
class SystemSolution:
    """A solution family linear in its integration constants.

    ``basis(t)`` maps times of shape ``(...,)`` to ``(..., dim, n_constants)``
    and ``offset(t)`` to ``(..., dim)``; positions are
    ``basis(t) @ alpha + offset(t)``.  ``basis_dot`` and ``offset_dot`` are
    their exact time derivatives.  ``potential`` maps positions of shape
    ``(..., dim)`` to energies ``(...,)``; ``acceleration`` maps positions
    to the force per unit mass, used for residual checks of the equation
    of motion.
    """

    name: str
    dim: int
    n_constants: int
    params: dict = field(default_factory=dict)
    basis: Callable[[Array], Array] = None
    basis_dot: Callable[[Array], Array] = None
    offset: Callable[[Array], Array] = None
    offset_dot: Callable[[Array], Array] = None
    potential: Callable[[Array], Array] = None
    acceleration: Callable[[Array], Array] = None

    @property
    def mass(self) -> float:
        return float(self.params.get("mass", 1.0))

    def _check_alpha(self, alpha) -> Array:
        a = np.asarray(alpha, dtype=float)
        if a.shape != (self.n_constants,):
            raise ValueError(
                f"{self.name} takes {self.n_constants} integration constants, "
                f"got shape {a.shape}"
            )
        return a

    def eval(self, alpha, t):
        """Position at time(s) t; shape (..., dim) for array t, (dim,) scalar."""
        a = self._check_alpha(alpha)
        t_arr = np.asarray(t, dtype=float)
        return self.basis(t_arr) @ a + self.offset(t_arr)

    def eval_velocity(self, alpha, t):
        a = self._check_alpha(alpha)
        t_arr = np.asarray(t, dtype=float)
        return self.basis_dot(t_arr) @ a + self.offset_dot(t_arr)

    def constraint_matrix(self, t0: float) -> Array:
        """Stacked map alpha -> (x(t0), v(t0)), shape (2*dim, n_constants)."""
        t0 = float(t0)
        return np.concatenate([self.basis(t0), self.basis_dot(t0)], axis=0)

    def constraint_offset(self, t0: float) -> Array:
        t0 = float(t0)
        return np.concatenate([self.offset(t0), self.offset_dot(t0)])


def eval_solution(system: SystemSolution, alpha, grid: TimeGrid) -> Trajectory:
    """Trajectory of the family member ``alpha`` sampled on ``grid``."""
    values = system.eval(alpha, grid.times)
    return Trajectory(grid, values)


def pinned_alpha(system: SystemSolution, x0, v0, t0: float = 0.0) -> Array:
    """Integration constants with position x0 and velocity v0 at time t0.

    Solves the linear constraint system exactly; raises
    :class:`SingularConstraintError` when the (position, velocity) map is
    not invertible at t0.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    if x0.shape != (system.dim,) or v0.shape != (system.dim,):
        raise ValueError(f"{system.name} needs x0 and v0 of shape ({system.dim},)")
    mat = system.constraint_matrix(t0)
    if mat.shape[0] != mat.shape[1]:
        raise SingularConstraintError(
            f"{system.name}: constraint map is {mat.shape[0]}x{mat.shape[1]}, not square"
        )
    rhs = np.concatenate([x0, v0]) - system.constraint_offset(t0)
    try:
        alpha = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularConstraintError(
            f"{system.name}: constraint map singular at t0={t0}"
        ) from exc
    return alpha


def constraint_jacobian(system: SystemSolution, t0: float = 0.0) -> float:
    """|det| of the map from integration constants to (x(t0), v(t0)).

    This is the normalization constant of a classical density pinned at t0.
    For the cataloged systems it is a Wronskian-type determinant,
    independent of t0.
    """
    mat = system.constraint_matrix(t0)
    if mat.shape[0] != mat.shape[1]:
        raise SingularConstraintError(
            f"{system.name}: constraint map is {mat.shape[0]}x{mat.shape[1]}, not square"
        )
    det = np.linalg.det(mat)
    if det == 0.0:
        raise SingularConstraintError(f"{system.name}: constraint map singular at t0={t0}")
    return float(abs(det))


def _linear_1d_basis(t: Array) -> Array:
    t = np.asarray(t, dtype=float)
    return np.stack([np.ones_like(t), t], axis=-1)[..., None, :]


def _linear_1d_basis_dot(t: Array) -> Array:
    t = np.asarray(t, dtype=float)
    return np.stack([np.zeros_like(t), np.ones_like(t)], axis=-1)[..., None, :]


def _zero_offset_1d(t: Array) -> Array:
    return np.zeros(np.shape(t) + (1,))


def free_particle_1d(mass: float = 1.0) -> SystemSolution:
    if not mass > 0:
        raise ValueError("mass must be positive")
    return SystemSolution(
        name="free_particle_1d",
        dim=1,
        n_constants=2,
        params={"mass": float(mass)},
        basis=_linear_1d_basis,
        basis_dot=_linear_1d_basis_dot,
        offset=_zero_offset_1d,
        offset_dot=_zero_offset_1d,
        potential=lambda x: np.zeros(np.shape(x)[:-1]),
        acceleration=lambda x: np.zeros_like(x),
    )


def harmonic_oscillator_1d(omega: float, mass: float = 1.0) -> SystemSolution:
    if not omega > 0:
        raise ValueError("omega must be positive")
    if not mass > 0:
        raise ValueError("mass must be positive")
    w = float(omega)

    def basis(t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.sin(w * t), np.cos(w * t)], axis=-1)[..., None, :]

    def basis_dot(t):
        t = np.asarray(t, dtype=float)
        return np.stack([w * np.cos(w * t), -w * np.sin(w * t)], axis=-1)[..., None, :]

    m = float(mass)
    return SystemSolution(
        name="harmonic_oscillator_1d",
        dim=1,
        n_constants=2,
        params={"omega": w, "mass": m},
        basis=basis,
        basis_dot=basis_dot,
        offset=_zero_offset_1d,
        offset_dot=_zero_offset_1d,
        potential=lambda x: 0.5 * m * w * w * np.sum(np.square(x), axis=-1),
        acceleration=lambda x: -w * w * x,
    )


def constant_force_1d(force: float = 1.0, mass: float = 1.0) -> SystemSolution:
    if not mass > 0:
        raise ValueError("mass must be positive")
    f = float(force)
    m = float(mass)

    def offset(t):
        t = np.asarray(t, dtype=float)
        return (0.5 * f / m * t * t)[..., None]

    def offset_dot(t):
        t = np.asarray(t, dtype=float)
        return (f / m * t)[..., None]

    return SystemSolution(
        name="constant_force_1d",
        dim=1,
        n_constants=2,
        params={"force": f, "mass": m},
        basis=_linear_1d_basis,
        basis_dot=_linear_1d_basis_dot,
        offset=offset,
        offset_dot=offset_dot,
        potential=lambda x: -f * np.sum(x, axis=-1),
        acceleration=lambda x: np.full_like(x, f / m),
    )


def free_particle_3d(mass: float = 1.0) -> SystemSolution:
    if not mass > 0:
        raise ValueError("mass must be positive")

    def basis(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (3, 6))
        for i in range(3):
            out[..., i, 2 * i] = 1.0
            out[..., i, 2 * i + 1] = t
        return out

    def basis_dot(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (3, 6))
        for i in range(3):
            out[..., i, 2 * i + 1] = 1.0
        return out

    def offset(t):
        return np.zeros(np.shape(t) + (3,))

    return SystemSolution(
        name="free_particle_3d",
        dim=3,
        n_constants=6,
        params={"mass": float(mass)},
        basis=basis,
        basis_dot=basis_dot,
        offset=offset,
        offset_dot=offset,
        potential=lambda x: np.zeros(np.shape(x)[:-1]),
        acceleration=lambda x: np.zeros_like(x),
    )


_CATALOG = {
    "free_particle_1d": free_particle_1d,
    "harmonic_oscillator_1d": harmonic_oscillator_1d,
    "constant_force_1d": constant_force_1d,
    "free_particle_3d": free_particle_3d,
}

CATALOG_IDS = tuple(sorted(_CATALOG))


def make_system(name: str, **params) -> SystemSolution:
    """Build a cataloged system by id string, e.g. from a config file."""
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown system {name!r}; catalog: {', '.join(CATALOG_IDS)}") from None
    return factory(**params)

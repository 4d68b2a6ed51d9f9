"""Discretized trajectory densities.

A :class:`PathDensity` assigns a (log) weight to a trajectory sampled on a
time grid:

    weight(x) = [ integral d(alpha) mu(alpha) prod_{slice, coord}
                  kernel(x - x_classical(alpha)) ] * prod constraints(x)

The mixture variable ``alpha`` ranges over the system's integration
constants with measure ``mu`` (a point mass, a uniform box, or a Gaussian
prior).  Constraints act on the trajectory itself (position or
finite-difference velocity pins) and stand in for whatever preparation
information is not reducible to a measure on ``alpha``.

Weights are relative: no overall path-space normalization is ever computed,
and every downstream estimator is either a ratio or an exact ancestral
sample, so the unknown constant cancels.

The exact point-mass kernel has no pointwise density.  Densities built on
it support only the analytic operations (classical membership, pinned
normalization, exact sampling); ``log_weight`` raises.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .errors import AnalyticModeOnlyError, ConfigError
from .kernels import KernelSpec, kernel_log_eval
from .model import TimeGrid, Trajectory
from .systems import SystemSolution, constraint_jacobian

POINT_MASS = "point_mass"
BOX_UNIFORM = "box_uniform"
GAUSSIAN_PRIOR = "gaussian_prior"

POSITION_AT = "position_at"
STENCIL_VELOCITY_AT = "stencil_velocity_at"

# tensor quadrature guard rails
_MIN_ALPHA_RESOLUTION = 9
_MAX_ALPHA_NODES = 2**22


def _vector(x, n: int, what: str) -> np.ndarray:
    out = np.atleast_1d(np.asarray(x, dtype=float))
    if out.shape != (n,):
        raise ValueError(f"{what} must have shape ({n},), got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{what} must be finite")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class AlphaMeasure:
    """Measure over integration constants: the mixture part of the density."""

    kind: str
    alpha0: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    mean: np.ndarray | None = None
    stddev: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == POINT_MASS:
            if self.alpha0 is None:
                raise ValueError("point_mass needs alpha0")
        elif self.kind == BOX_UNIFORM:
            if self.lo is None or self.hi is None:
                raise ValueError("box_uniform needs lo and hi")
            if not np.all(self.hi > self.lo):
                raise ValueError("box bounds must satisfy lo < hi componentwise")
        elif self.kind == GAUSSIAN_PRIOR:
            if self.mean is None or self.stddev is None:
                raise ValueError("gaussian_prior needs mean and stddev")
            if not np.all(self.stddev > 0):
                raise ValueError("stddev must be positive componentwise")
        else:
            raise ValueError(f"unknown alpha measure kind {self.kind!r}")

    @property
    def n_constants(self) -> int:
        for v in (self.alpha0, self.lo, self.mean):
            if v is not None:
                return v.shape[0]
        raise AssertionError("unreachable")

    @property
    def is_point(self) -> bool:
        return self.kind == POINT_MASS

    @property
    def center(self) -> np.ndarray:
        """A representative alpha: the point, box midpoint, or prior mean."""
        if self.kind == POINT_MASS:
            return self.alpha0
        if self.kind == BOX_UNIFORM:
            return 0.5 * (self.lo + self.hi)
        return self.mean

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draws of shape (size, n_constants)."""
        n = self.n_constants
        if self.kind == POINT_MASS:
            return np.broadcast_to(self.alpha0, (size, n)).copy()
        if self.kind == BOX_UNIFORM:
            return rng.uniform(self.lo, self.hi, size=(size, n))
        return rng.normal(self.mean, self.stddev, size=(size, n))

    def quad_nodes(self, resolution: int) -> tuple[np.ndarray, np.ndarray]:
        """Tensor-product quadrature nodes and log-weights.

        Returns (nodes, log_w) with nodes of shape (K, n) and log_w of
        shape (K,) such that  integral mu(a) f(a) da  ~=  sum_k
        exp(log_w[k]) f(nodes[k]).  Point masses yield a single node.
        Trapezoid rule per component; Gaussian priors are cut at six
        standard deviations.
        """
        if self.kind == POINT_MASS:
            return self.alpha0[None, :], np.zeros(1)
        if resolution < _MIN_ALPHA_RESOLUTION:
            raise ConfigError(
                f"alpha quadrature resolution {resolution} below minimum "
                f"{_MIN_ALPHA_RESOLUTION}"
            )
        n = self.n_constants
        if resolution**n > _MAX_ALPHA_NODES:
            raise ConfigError(
                f"alpha quadrature would need {resolution}^{n} nodes; lower the "
                f"resolution (cap {_MAX_ALPHA_NODES} total nodes)"
            )
        axes, log_ws = [], []
        for j in range(n):
            if self.kind == BOX_UNIFORM:
                a, b = self.lo[j], self.hi[j]
                pts = np.linspace(a, b, resolution)
                lw = np.full(resolution, -np.log(resolution - 1.0))
                lw[0] -= np.log(2.0)
                lw[-1] -= np.log(2.0)
                # trapezoid weight h*(...)/ (b-a) from the uniform density cancels
                # the interval length: h/(b-a) = 1/(resolution-1)
            else:
                mu, sd = self.mean[j], self.stddev[j]
                pts = np.linspace(mu - 6.0 * sd, mu + 6.0 * sd, resolution)
                h = pts[1] - pts[0]
                lw = (
                    np.log(h)
                    - 0.5 * np.square((pts - mu) / sd)
                    - 0.5 * np.log(2.0 * np.pi)
                    - np.log(sd)
                )
                lw[0] -= np.log(2.0)
                lw[-1] -= np.log(2.0)
            axes.append(pts)
            log_ws.append(lw)
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=-1)
        wmesh = np.meshgrid(*log_ws, indexing="ij")
        log_w = sum(w.ravel() for w in wmesh)
        return nodes, log_w


def point_mass(alpha0) -> AlphaMeasure:
    a = np.atleast_1d(np.asarray(alpha0, dtype=float))
    a.flags.writeable = False
    return AlphaMeasure(POINT_MASS, alpha0=a)


def box_uniform(lo, hi) -> AlphaMeasure:
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape:
        raise ValueError("lo and hi must have the same shape")
    lo.flags.writeable = False
    hi.flags.writeable = False
    return AlphaMeasure(BOX_UNIFORM, lo=lo, hi=hi)


def gaussian_prior(mean, stddev) -> AlphaMeasure:
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    stddev = np.atleast_1d(np.asarray(stddev, dtype=float)) * np.ones_like(mean)
    if mean.shape != stddev.shape:
        raise ValueError("mean and stddev must have the same shape")
    mean.flags.writeable = False
    stddev.flags.writeable = False
    return AlphaMeasure(GAUSSIAN_PRIOR, mean=mean, stddev=stddev)


@dataclass(frozen=True)
class PathConstraint:
    """A pin on the trajectory itself, soft (kernel) or exact.

    ``position_at`` pins the slice value; ``stencil_velocity_at`` pins the
    forward finite difference (x[i+1] - x[i]) / dt, falling back to the
    backward difference on the last slice.  Exact softness is only legal
    together with the exact point-mass kernel, where pins are resolved
    analytically.
    """

    kind: str
    t_index: int
    target: np.ndarray
    softness: KernelSpec

    def __post_init__(self):
        if self.kind not in (POSITION_AT, STENCIL_VELOCITY_AT):
            raise ValueError(f"unknown constraint kind {self.kind!r}")


def position_pin(t_index: int, target, softness: KernelSpec) -> PathConstraint:
    t = np.atleast_1d(np.asarray(target, dtype=float))
    t.flags.writeable = False
    return PathConstraint(POSITION_AT, int(t_index), t, softness)


def velocity_pin(t_index: int, target, softness: KernelSpec) -> PathConstraint:
    t = np.atleast_1d(np.asarray(target, dtype=float))
    t.flags.writeable = False
    return PathConstraint(STENCIL_VELOCITY_AT, int(t_index), t, softness)


@dataclass(frozen=True)
class PathDensity:
    """The full discretized trajectory density.

    ``alpha_quadrature`` is the number of quadrature points per alpha
    component used whenever the measure is not a point mass.
    """

    system: SystemSolution
    grid: TimeGrid
    kernel: KernelSpec
    alpha_measure: AlphaMeasure
    path_constraints: tuple[PathConstraint, ...] = ()
    alpha_quadrature: int = 129

    def __post_init__(self):
        object.__setattr__(self, "path_constraints", tuple(self.path_constraints))
        if self.alpha_measure.n_constants != self.system.n_constants:
            raise ConfigError(
                f"alpha measure has {self.alpha_measure.n_constants} components, "
                f"system {self.system.name} needs {self.system.n_constants}"
            )
        if not self.alpha_measure.is_point:
            if self.alpha_quadrature < _MIN_ALPHA_RESOLUTION:
                raise ConfigError(
                    f"alpha_quadrature must be at least {_MIN_ALPHA_RESOLUTION}"
                )
        for c in self.path_constraints:
            if not 0 <= c.t_index < self.grid.n_slices:
                raise ConfigError(
                    f"constraint slice index {c.t_index} outside grid of "
                    f"{self.grid.n_slices} slices"
                )
            if c.target.shape != (self.system.dim,):
                raise ConfigError(
                    f"constraint target shape {c.target.shape} does not match "
                    f"system dimension {self.system.dim}"
                )
            if c.softness.is_exact and not self.kernel.is_exact:
                raise ConfigError(
                    "exact constraint softness requires the exact point-mass kernel"
                )

    @property
    def is_classical(self) -> bool:
        return self.kernel.is_exact

    def classical_values(self, alpha) -> np.ndarray:
        """The classical trajectory values for alpha, shape (n_slices, dim)."""
        return self.system.eval(alpha, self.grid.times)


class MembershipResult(NamedTuple):
    is_member: bool
    alpha: np.ndarray
    max_deviation: float


def _basis_offset(density: PathDensity) -> tuple[np.ndarray, np.ndarray]:
    times = density.grid.times
    return density.system.basis(times), density.system.offset(times)


def _constraint_log_batch(density: PathDensity, values: np.ndarray) -> np.ndarray:
    """Sum of soft-constraint log factors, shape (B,)."""
    b = values.shape[0]
    total = np.zeros(b)
    dt = density.grid.dt
    last = density.grid.n_slices - 1
    for c in density.path_constraints:
        if c.softness.is_exact:
            raise AnalyticModeOnlyError(
                "exact pins have no pointwise factor; use the analytic operations"
            )
        if c.kind == POSITION_AT:
            r = values[:, c.t_index, :] - c.target
        else:
            i = c.t_index
            if i < last:
                v = (values[:, i + 1, :] - values[:, i, :]) / dt
            else:
                v = (values[:, i, :] - values[:, i - 1, :]) / dt
            r = v - c.target
        total = total + np.sum(kernel_log_eval(c.softness, r), axis=-1)
    return total


def log_weight_batch(density: PathDensity, values: np.ndarray) -> np.ndarray:
    """Log weights for a batch of trajectory values, shape (B, S, D) -> (B,).

    -inf is a legal result (kernel nodes, truncation, hard constraint
    violations).  The alpha integral is a point evaluation for point-mass
    measures and a tensor-quadrature log-sum-exp otherwise.
    """
    if density.is_classical:
        raise AnalyticModeOnlyError(
            "log_weight is undefined for the exact point-mass kernel; "
            "use classical_membership / pinned_normalization"
        )
    values = np.asarray(values, dtype=float)
    if values.ndim != 3 or values.shape[1:] != (density.grid.n_slices, density.system.dim):
        raise ValueError(
            f"values must have shape (B, {density.grid.n_slices}, {density.system.dim})"
        )
    basis, offset = _basis_offset(density)
    nodes, node_logw = density.alpha_measure.quad_nodes(density.alpha_quadrature)

    out = np.empty(values.shape[0])
    s, d = values.shape[1:]
    k_total = nodes.shape[0]
    k_chunk = max(1, min(k_total, _MAX_ALPHA_NODES // max(1, s * d * 8)))
    b_chunk = max(1, 2**22 // max(1, k_chunk * s * d))
    for b0 in range(0, values.shape[0], b_chunk):
        vb = values[b0 : b0 + b_chunk]
        partials = []
        for k0 in range(0, k_total, k_chunk):
            nk = nodes[k0 : k0 + k_chunk]
            xs = np.einsum("sdn,kn->ksd", basis, nk) + offset
            r = vb[:, None, :, :] - xs[None, :, :, :]
            logs = np.sum(kernel_log_eval(density.kernel, r), axis=(2, 3))
            partials.append(logsumexp(logs + node_logw[k0 : k0 + k_chunk], axis=1))
        with np.errstate(invalid="ignore"):
            out[b0 : b0 + b_chunk] = logsumexp(np.stack(partials, axis=0), axis=0)
    out += _constraint_log_batch(density, values)
    return out


def log_weight(density: PathDensity, x: Trajectory) -> float:
    """Log weight of a single trajectory; -inf is legal."""
    if x.grid != density.grid:
        raise ValueError("trajectory grid does not match density grid")
    return float(log_weight_batch(density, x.values[None])[0])


def marginal_density(density: PathDensity, t_index: int, x_points):
    """Single-time marginal rho_t(x) = integral d(alpha) mu prod_d kernel.

    ``x_points`` may be a scalar (1-D systems), a (D,) point, or a stack
    (P, D); a float is returned in the first two cases.  Requires an
    unconstrained density and a non-exact kernel.
    """
    if density.is_classical:
        raise AnalyticModeOnlyError("marginal density is undefined in exact mode")
    if density.path_constraints:
        raise ConfigError("marginal_density requires an unconstrained density")
    if not 0 <= t_index < density.grid.n_slices:
        raise ValueError(f"t_index {t_index} outside grid")
    d = density.system.dim
    pts = np.asarray(x_points, dtype=float)
    scalar_in = pts.ndim == 0 or pts.shape == (d,)
    pts = np.atleast_1d(pts)
    if pts.ndim == 1 and d == 1:
        pts = pts[:, None]
    elif pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[-1] != d:
        raise ValueError(f"x_points last axis must be {d}")

    t = density.grid.slice_time(t_index)
    nodes, node_logw = density.alpha_measure.quad_nodes(density.alpha_quadrature)
    xs = density.system.basis(t) @ nodes.T  # (d, K)
    xs = xs.T + density.system.offset(t)  # (K, d)
    rho = np.empty(pts.shape[0])
    p_chunk = max(1, _MAX_ALPHA_NODES // (xs.shape[0] * d))
    for start in range(0, pts.shape[0], p_chunk):
        block = pts[start : start + p_chunk]
        r = block[:, None, :] - xs[None, :, :]
        logs = np.sum(kernel_log_eval(density.kernel, r), axis=-1) + node_logw
        rho[start : start + p_chunk] = np.exp(logsumexp(logs, axis=1))
    return float(rho[0]) if scalar_in else rho


def classical_membership(density: PathDensity, x: Trajectory, tol: float) -> MembershipResult:
    """Least-squares test of whether x lies in the classical solution family.

    Exact-kernel densities only: membership in the family is exactly the
    support condition of the classical density.
    """
    if not density.is_classical:
        raise AnalyticModeOnlyError("classical membership applies to exact mode only")
    if x.grid != density.grid:
        raise ValueError("trajectory grid does not match density grid")
    basis, offset = _basis_offset(density)
    s, d = x.values.shape
    a = basis.reshape(s * d, density.system.n_constants)
    b = (x.values - offset).ravel()
    alpha, *_ = np.linalg.lstsq(a, b, rcond=None)
    fit = a @ alpha - b
    max_dev = float(np.max(np.abs(fit))) if fit.size else 0.0
    return MembershipResult(max_dev <= tol, alpha, max_dev)


def pinned_normalization(density: PathDensity) -> float:
    """Normalization constant of a classical density pinned at one time.

    Requires the exact kernel and exactly one position pin plus one
    velocity pin, both exact, at the same slice.  The value is the
    absolute Jacobian determinant of the map from integration constants
    to (position, velocity) at the pin time.
    """
    if not density.is_classical:
        raise AnalyticModeOnlyError(
            "pinned normalization is an exact-mode quantity; there is no "
            "Monte Carlo normalization"
        )
    pos = [c for c in density.path_constraints if c.kind == POSITION_AT]
    vel = [c for c in density.path_constraints if c.kind == STENCIL_VELOCITY_AT]
    if len(pos) != 1 or len(vel) != 1:
        raise ConfigError(
            "pinned normalization needs exactly one position pin and one "
            "velocity pin"
        )
    if pos[0].t_index != vel[0].t_index:
        raise ConfigError("position and velocity pins must share the pin time")
    if not (pos[0].softness.is_exact and vel[0].softness.is_exact):
        raise ConfigError("pins must be exact in exact mode")
    t0 = density.grid.slice_time(pos[0].t_index)
    return constraint_jacobian(density.system, t0)

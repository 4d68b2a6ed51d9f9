"""Observables and expectation estimation.

An :class:`Observable` is a pure function of a trajectory (plus system
context for energies).  ``expectation`` estimates its mean under a
:class:`PathDensity`: exactly in classical (point-mass kernel) mode,
by weighted Monte Carlo otherwise.

Velocity-dependent observables on sampled paths are stencil quantities.
The forward stencil is (x[i+1] - x[i]) / dt (backward at the last slice);
the central stencil averages neighbors in the interior.  The analytic
stencil uses the solution family's exact velocity and therefore needs a
known alpha, which restricts it to point-mass measures.  Stencil energies
on rough sampled paths pick up a 1/dt^2 noise term; that sensitivity is a
reported feature of the discretization, not an artifact to be hidden.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .density import (
    PathDensity,
    marginal_density,
)
from .errors import ConfigError, DivergentObservableError
from .kernels import FEJER
from .model import ExpectationResult, TimeGrid, Trajectory
from .sampling import SamplerConfig, sample
from .systems import SystemSolution

POSITION_AT = "position_at"
POSITION_SQUARED_AT = "position_squared_at"
ENERGY = "energy"
PATH_AVERAGE = "path_average"
CUSTOM = "custom"

ANALYTIC = "analytic"
FORWARD = "forward"
CENTRAL = "central"

_KINDS = (POSITION_AT, POSITION_SQUARED_AT, ENERGY, PATH_AVERAGE, CUSTOM)
_STENCILS = (ANALYTIC, FORWARD, CENTRAL)


@dataclass(frozen=True)
class Observable:
    kind: str
    t_index: int | None = None
    coord: int = 0
    stencil: str = FORWARD
    inner: "Observable | None" = None
    fn: Callable[[Trajectory], float] | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown observable kind {self.kind!r}")
        if self.kind in (POSITION_AT, POSITION_SQUARED_AT, ENERGY) and self.t_index is None:
            raise ValueError(f"{self.kind} needs a t_index")
        if self.kind == ENERGY and self.stencil not in _STENCILS:
            raise ValueError(f"unknown stencil {self.stencil!r}")
        if self.kind == PATH_AVERAGE and self.inner is None:
            raise ValueError("path_average needs an inner observable")
        if self.kind == CUSTOM and self.fn is None:
            raise ValueError("custom needs a function")

    @property
    def label(self) -> str:
        if self.kind == CUSTOM:
            return self.name or "custom"
        if self.kind == ENERGY:
            return f"energy[{self.stencil}]@{self.t_index}"
        if self.kind == PATH_AVERAGE:
            return f"path_average({self.inner.label})"
        return f"{self.kind}@{self.t_index}"


def position_at(t_index: int, coord: int = 0) -> Observable:
    return Observable(POSITION_AT, t_index=int(t_index), coord=int(coord))


def position_squared_at(t_index: int, coord: int = 0) -> Observable:
    return Observable(POSITION_SQUARED_AT, t_index=int(t_index), coord=int(coord))


def energy(t_index: int = 0, stencil: str = FORWARD) -> Observable:
    return Observable(ENERGY, t_index=int(t_index), stencil=stencil)


def path_average(inner: Observable) -> Observable:
    if inner.kind in (PATH_AVERAGE, CUSTOM):
        raise ValueError("path_average wraps slice-local observables only")
    return Observable(PATH_AVERAGE, inner=inner)


def custom(fn: Callable[[Trajectory], float], name: str = "") -> Observable:
    return Observable(CUSTOM, fn=fn, name=name or getattr(fn, "__name__", "custom"))


def _stencil_velocities(values: np.ndarray, dt: float, stencil: str) -> np.ndarray:
    """Velocity estimates at every slice, shape like values (B, S, D)."""
    v = np.empty_like(values)
    if stencil == FORWARD:
        v[:, :-1] = (values[:, 1:] - values[:, :-1]) / dt
        v[:, -1] = (values[:, -1] - values[:, -2]) / dt
    elif stencil == CENTRAL:
        v[:, 1:-1] = (values[:, 2:] - values[:, :-2]) / (2.0 * dt)
        v[:, 0] = (values[:, 1] - values[:, 0]) / dt
        v[:, -1] = (values[:, -1] - values[:, -2]) / dt
    else:
        raise ValueError(f"no finite-difference rule for stencil {stencil!r}")
    return v


def _energy_batch(
    values: np.ndarray,
    grid: TimeGrid,
    system: SystemSolution,
    stencil: str,
    t_index: int | None,
    alpha,
) -> np.ndarray:
    """Energy per sample, at one slice or all slices (t_index None -> (B, S))."""
    if system is None:
        raise ConfigError("energy evaluation needs a system context")
    m = system.mass
    if stencil == ANALYTIC:
        if alpha is None:
            raise ConfigError(
                "analytic energy stencil needs the integration constants; "
                "available for point-mass alpha measures only"
            )
        vs = system.eval_velocity(alpha, grid.times)  # (S, D)
        v = np.broadcast_to(vs, values.shape)
    else:
        v = _stencil_velocities(values, grid.dt, stencil)
    kinetic = 0.5 * m * np.sum(np.square(v), axis=-1)  # (B, S)
    total = kinetic + system.potential(values)
    if t_index is None:
        return total
    return total[:, t_index]


def evaluate_batch(
    obs: Observable,
    values: np.ndarray,
    grid: TimeGrid,
    system: SystemSolution | None = None,
    alpha=None,
) -> np.ndarray:
    """Vectorized evaluation over a batch of trajectory values (B, S, D)."""
    if obs.kind == POSITION_AT:
        return values[:, obs.t_index, obs.coord].copy()
    if obs.kind == POSITION_SQUARED_AT:
        return np.square(values[:, obs.t_index, obs.coord])
    if obs.kind == ENERGY:
        return _energy_batch(values, grid, system, obs.stencil, obs.t_index, alpha)
    if obs.kind == PATH_AVERAGE:
        inner = obs.inner
        if inner.kind == POSITION_AT:
            return values[:, :, inner.coord].mean(axis=1)
        if inner.kind == POSITION_SQUARED_AT:
            return np.square(values[:, :, inner.coord]).mean(axis=1)
        return _energy_batch(values, grid, system, inner.stencil, None, alpha).mean(axis=1)
    return np.array([obs.fn(Trajectory(grid, row)) for row in values])


def evaluate(
    obs: Observable,
    x: Trajectory,
    system: SystemSolution | None = None,
    alpha=None,
) -> float:
    """Evaluate one observable on one trajectory."""
    return float(evaluate_batch(obs, x.values[None], x.grid, system, alpha)[0])


def has_unbounded_moment(obs: Observable) -> bool:
    """Whether the observable grows polynomially in the trajectory values.

    Polynomial moments of the untruncated sin-squared kernel diverge, so
    these observables get a divergence sentinel instead of an estimate.
    Custom observables are the caller's responsibility.
    """
    if obs.kind in (POSITION_AT, POSITION_SQUARED_AT, ENERGY):
        return True
    if obs.kind == PATH_AVERAGE:
        return has_unbounded_moment(obs.inner)
    return False


def check_moments(density: PathDensity, obs: Observable) -> None:
    if density.kernel.family == FEJER and has_unbounded_moment(obs):
        raise DivergentObservableError(
            f"{obs.label} has no finite expectation under the untruncated "
            "sin-squared kernel (its polynomial moments diverge); use "
            "truncated_fejer"
        )


def _measure_payload(m) -> dict:
    out = {"kind": m.kind}
    for f in ("alpha0", "lo", "hi", "mean", "stddev"):
        v = getattr(m, f)
        if v is not None:
            out[f] = list(map(float, v))
    return out


def _obs_payload(obs: Observable) -> dict:
    out = {"kind": obs.kind, "t_index": obs.t_index, "coord": obs.coord}
    if obs.kind == ENERGY:
        out["stencil"] = obs.stencil
    if obs.inner is not None:
        out["inner"] = _obs_payload(obs.inner)
    if obs.kind == CUSTOM:
        out["name"] = obs.name
    return out


def config_digest(density: PathDensity, obs: Observable | None, cfg: SamplerConfig | None) -> str:
    """Stable short hash of everything that determines a run's output."""
    k = density.kernel
    payload = {
        "system": {"name": density.system.name, "params": density.system.params},
        "grid": {
            "t_start": density.grid.t_start,
            "t_end": density.grid.t_end,
            "n_slices": density.grid.n_slices,
        },
        "kernel": {"family": k.family, "m_delta": k.m_delta, "trunc_radius": k.trunc_radius},
        "alpha": _measure_payload(density.alpha_measure),
        "alpha_quadrature": density.alpha_quadrature,
        "constraints": [
            {
                "kind": c.kind,
                "t_index": c.t_index,
                "target": list(map(float, c.target)),
                "softness": {
                    "family": c.softness.family,
                    "m_delta": c.softness.m_delta,
                    "trunc_radius": c.softness.trunc_radius,
                },
            }
            for c in density.path_constraints
        ],
        "observable": _obs_payload(obs) if obs is not None else None,
        "sampler": None
        if cfg is None
        else {
            "method": cfg.method,
            "n_samples": cfg.n_samples,
            "burn_in": cfg.burn_in,
            "proposal_step": cfg.proposal_step,
            "n_chains": cfg.n_chains,
            "seed": cfg.seed,
        },
    }
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _analytic_alpha(density: PathDensity):
    from .sampling import _pin_consistent_alpha

    if density.path_constraints:
        return _pin_consistent_alpha(density)
    if density.alpha_measure.is_point:
        return density.alpha_measure.alpha0
    return None


def expectation(density: PathDensity, obs: Observable, cfg: SamplerConfig) -> ExpectationResult:
    """Estimate the observable's mean under the density.

    Classical (exact-kernel) densities are evaluated analytically: the
    trajectory is the classical one, the error is zero, and one
    deterministic evaluation is reported.  Otherwise the configured
    sampler supplies a weighted batch and the estimate carries a standard
    error computed from the weighted variance at the batch's effective
    sample size.
    """
    digest = config_digest(density, obs, cfg)
    if density.is_classical:
        alpha = _analytic_alpha(density)
        if alpha is not None:
            values = density.classical_values(alpha)[None]
            est = float(evaluate_batch(obs, values, density.grid, density.system, alpha)[0])
        else:
            # classical mixture: quadrature over alpha of the observable on
            # classical trajectories
            nodes, logw = density.alpha_measure.quad_nodes(density.alpha_quadrature)
            w = np.exp(logw - logw.max())
            vals = np.array(
                [
                    float(
                        evaluate_batch(
                            obs,
                            density.classical_values(a)[None],
                            density.grid,
                            density.system,
                            a,
                        )[0]
                    )
                    for a in nodes
                ]
            )
            est = float(np.sum(w * vals) / np.sum(w))
        return ExpectationResult(
            estimate=est,
            std_error=0.0,
            n_samples=1,
            ess=1.0,
            seed=cfg.seed,
            config_digest=digest,
        )

    check_moments(density, obs)
    if obs.kind == ENERGY and obs.stencil == ANALYTIC and not density.alpha_measure.is_point:
        raise ConfigError(
            "analytic energy stencil requires a point-mass alpha measure"
        )
    batch = sample(density, cfg)
    alpha = density.alpha_measure.alpha0 if density.alpha_measure.is_point else None
    o = evaluate_batch(obs, batch.values, density.grid, density.system, alpha)
    w = batch.weights
    wsum = w.sum()
    est = float(np.sum(w * o) / wsum)
    var = float(np.sum(w * np.square(o - est)) / wsum)
    ess = max(batch.ess, 1.0)
    return ExpectationResult(
        estimate=est,
        std_error=math.sqrt(var / ess),
        n_samples=batch.n_samples,
        ess=min(ess, batch.n_samples),
        seed=cfg.seed,
        config_digest=digest,
    )


@dataclass(frozen=True)
class NodeScanResult:
    """Tabulated single-time marginal with detected nodes.

    Nodes are interior local minima whose value falls below
    ``threshold_ratio * max(rho)``.
    """

    t_index: int
    x: np.ndarray
    rho: np.ndarray
    node_positions: np.ndarray
    threshold_ratio: float

    @property
    def n_nodes(self) -> int:
        return self.node_positions.shape[0]


NODE_THRESHOLD_RATIO = 1e-6


def node_scan(
    density: PathDensity,
    t_index: int,
    x_range: tuple[float, float],
    n_points: int,
) -> NodeScanResult:
    """Scan the single-time marginal on a uniform grid and report nodes."""
    if density.system.dim != 1:
        raise ConfigError("node scans are defined for one-dimensional systems")
    lo, hi = float(x_range[0]), float(x_range[1])
    if not lo < hi:
        raise ValueError("x_range must be an ordered interval")
    if n_points < 3:
        raise ValueError("need at least 3 scan points")
    xs = np.linspace(lo, hi, int(n_points))
    rho = marginal_density(density, t_index, xs)
    thr = NODE_THRESHOLD_RATIO * float(rho.max())
    interior = np.arange(1, xs.size - 1)
    is_min = (rho[interior] <= rho[interior - 1]) & (rho[interior] <= rho[interior + 1])
    nodes = xs[interior[is_min & (rho[interior] < thr)]]
    return NodeScanResult(
        t_index=int(t_index),
        x=xs,
        rho=rho,
        node_positions=nodes,
        threshold_ratio=NODE_THRESHOLD_RATIO,
    )


@dataclass(frozen=True)
class SweepResult:
    """Kernel-sharpness sweep of one observable with its classical reference."""

    m_values: np.ndarray
    estimates: np.ndarray
    std_errors: np.ndarray
    n_samples: np.ndarray
    classical_reference: float

    def __post_init__(self):
        if not np.all(np.diff(self.m_values) > 0):
            raise ValueError("m_values must be strictly increasing")

    @property
    def deviations(self) -> np.ndarray:
        return np.abs(self.estimates - self.classical_reference)

    def rows(self):
        for i in range(self.m_values.size):
            yield (
                float(self.m_values[i]),
                float(self.estimates[i]),
                float(self.std_errors[i]),
                int(self.n_samples[i]),
            )

"""Brute-force ground truth for small instances.

Two independent evaluation routes that share no code with the samplers:

* :func:`lattice_expectation` enumerates every trajectory on a finite
  position lattice (a few slices, a few dozen points each) and computes
  the exact weighted sum.  Streaming blocks keep memory flat; a hard
  budget of 10^8 paths keeps runtimes sane.
* :func:`slice_quadrature` computes single-slice moments by adaptive
  quadrature over the kernel and the alpha measure.

Every sampler and estimator in the package is validated against these on
desk-scale problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .density import PathDensity, log_weight_batch
from .errors import (
    AnalyticModeOnlyError,
    ConfigError,
    DegenerateWeightsError,
    DivergentObservableError,
    LatticeBudgetError,
)
from .kernels import (
    EXACT_DELTA,
    FEJER,
    GAUSSIAN,
    TRUNCATED_FEJER,
    KernelSpec,
    kernel_mass,
)
from .observables import (
    POSITION_AT,
    POSITION_SQUARED_AT,
    Observable,
    evaluate_batch,
)

MAX_LATTICE_PATHS = 10**8
MAX_LATTICE_SLICES = 6
MAX_POINTS_PER_SLICE = 64

_BLOCK = 1 << 15


@dataclass(frozen=True)
class LatticeSpec:
    """A finite trajectory lattice: per-coordinate position ranges.

    The path count points_per_slice^(n_slices * dim) must stay within the
    10^8 budget.
    """

    n_slices: int
    points_per_slice: int
    x_range: np.ndarray  # (dim, 2)

    def __post_init__(self):
        rng = np.atleast_2d(np.asarray(self.x_range, dtype=float))
        if rng.ndim != 2 or rng.shape[1] != 2:
            raise ValueError("x_range must be (dim, 2) intervals")
        if not np.all(rng[:, 1] > rng[:, 0]):
            raise ValueError("x_range intervals must be ordered")
        rng.flags.writeable = False
        object.__setattr__(self, "x_range", rng)
        if self.n_slices > MAX_LATTICE_SLICES:
            raise LatticeBudgetError(
                f"lattice limited to {MAX_LATTICE_SLICES} slices, got {self.n_slices}"
            )
        if self.points_per_slice > MAX_POINTS_PER_SLICE:
            raise LatticeBudgetError(
                f"lattice limited to {MAX_POINTS_PER_SLICE} points per slice"
            )
        if self.n_paths > MAX_LATTICE_PATHS:
            raise LatticeBudgetError(
                f"{self.points_per_slice}^({self.n_slices}*{self.dim}) = "
                f"{self.n_paths} paths exceeds the {MAX_LATTICE_PATHS} budget"
            )

    @property
    def dim(self) -> int:
        return self.x_range.shape[0]

    @property
    def n_paths(self) -> int:
        return self.points_per_slice ** (self.n_slices * self.dim)

    def grid_points(self) -> np.ndarray:
        """Lattice positions per coordinate, shape (dim, points_per_slice)."""
        return np.stack(
            [
                np.linspace(lo, hi, self.points_per_slice)
                for lo, hi in self.x_range
            ]
        )


def lattice_for(
    density: PathDensity, points_per_slice: int, widths: float = 6.0
) -> LatticeSpec:
    """Default lattice: the classical path envelope plus a kernel margin."""
    nodes, _ = density.alpha_measure.quad_nodes(
        min(density.alpha_quadrature, 17) if not density.alpha_measure.is_point else 1
    )
    paths = np.stack([density.classical_values(a) for a in nodes])  # (K, S, D)
    lo = paths.min(axis=(0, 1))
    hi = paths.max(axis=(0, 1))
    margin = widths * (density.kernel.width or 1.0)
    x_range = np.stack([lo - margin, hi + margin], axis=-1)
    return LatticeSpec(density.grid.n_slices, points_per_slice, x_range)


def clipped_mass(density: PathDensity, lattice: LatticeSpec) -> float:
    """Worst-case kernel mass lost to the lattice edges, over slices/coords."""
    if density.kernel.family == EXACT_DELTA:
        return 0.0
    xs = density.classical_values(density.alpha_measure.center)
    worst = 0.0
    for d in range(lattice.dim):
        lo, hi = lattice.x_range[d]
        for s in range(lattice.n_slices):
            c = xs[s, d]
            inside = kernel_mass(density.kernel, lo - c, hi - c)
            total = kernel_mass(density.kernel, -math.inf, math.inf)
            worst = max(worst, total - inside)
    return worst


def lattice_expectation(
    density: PathDensity, obs: Observable, lattice: LatticeSpec
) -> float:
    """Exact expectation over the discretized trajectory lattice.

    Streams blocks of paths through the density's batched log-weight and
    accumulates in a running-max log-sum-exp, so the overall normalization
    cancels exactly and no block of weights can overflow.
    """
    if density.is_classical:
        raise AnalyticModeOnlyError("lattice sums need a pointwise density")
    if lattice.n_slices != density.grid.n_slices:
        raise ConfigError(
            f"lattice has {lattice.n_slices} slices, density grid "
            f"{density.grid.n_slices}"
        )
    if lattice.dim != density.system.dim:
        raise ConfigError("lattice dimension does not match the system")
    pts = lattice.grid_points()  # (D, P)
    s, d, p = lattice.n_slices, lattice.dim, lattice.points_per_slice
    n_digits = s * d
    shape = (p,) * n_digits
    total = lattice.n_paths
    alpha = density.alpha_measure.alpha0 if density.alpha_measure.is_point else None

    run_max = -math.inf
    sum_w = 0.0
    sum_wo = 0.0
    coord_idx = np.tile(np.arange(d), s)  # digit j belongs to coordinate j % d
    for start in range(0, total, _BLOCK):
        idx = np.arange(start, min(start + _BLOCK, total))
        digits = np.stack(np.unravel_index(idx, shape), axis=-1)  # (B, S*D)
        values = pts[coord_idx, digits].reshape(-1, s, d)
        lw = log_weight_batch(density, values)
        bm = float(lw.max()) if lw.size else -math.inf
        if bm == -math.inf:
            continue
        if bm > run_max:
            scale = math.exp(run_max - bm) if run_max > -math.inf else 0.0
            sum_w *= scale
            sum_wo *= scale
            run_max = bm
        w = np.exp(lw - run_max)
        o = evaluate_batch(obs, values, density.grid, density.system, alpha)
        sum_w += float(w.sum())
        sum_wo += float((w * o).sum())
    if sum_w == 0.0:
        raise DegenerateWeightsError("every lattice path has zero weight")
    return sum_wo / sum_w


def kernel_moment(kernel: KernelSpec, power: int) -> tuple[float, float]:
    """integral u^power * kernel(u) du by adaptive quadrature.

    The truncated kernel is integrated as it stands, without renormalizing
    by its clipped mass, so the value is the raw moment of the hard-cut
    weight function.  Returns (value, error bound).
    """
    m = kernel.m_delta
    if kernel.family == GAUSSIAN:
        pdf = lambda u: u**power * (m / math.sqrt(math.pi)) * math.exp(-((m * u) ** 2))
        val = err = 0.0
        for lo, hi in ((-math.inf, -1.0 / m), (-1.0 / m, 0.0), (0.0, 1.0 / m), (1.0 / m, math.inf)):
            v, e = integrate.quad(pdf, lo, hi, epsabs=1e-12, limit=200)
            val += v
            err += e
        return val, err
    if kernel.family == TRUNCATED_FEJER:
        r = kernel.trunc_radius

        def pdf(u):
            sc = np.sinc(m * u / np.pi)
            return u**power * (m / np.pi) * sc * sc

        return integrate.quad(pdf, -r, r, epsabs=1e-10, limit=max(200, int(8 * m * r)))
    if kernel.family == FEJER and power >= 1:
        raise DivergentObservableError(
            "polynomial moments of the untruncated sin-squared kernel diverge"
        )
    raise ConfigError(f"no moment rule for kernel family {kernel.family}")


def slice_quadrature(
    density: PathDensity, obs: Observable, resolution: int | None = None
) -> float:
    """Single-slice moment by nested quadrature (alpha outer, kernel inner).

    Supports position and squared-position observables on unconstrained
    densities.  The inner integral over the kernel displacement u expands
    exactly: E[(u + c)^p] = sum_k C(p,k) c^(p-k) M_k with kernel moments
    M_k computed by adaptive quadrature, so only the moments and the alpha
    quadrature are numerical.
    """
    if density.is_classical:
        raise AnalyticModeOnlyError("slice quadrature needs a pointwise kernel")
    if density.path_constraints:
        raise ConfigError("slice quadrature requires an unconstrained density")
    if obs.kind not in (POSITION_AT, POSITION_SQUARED_AT):
        raise ConfigError(
            "slice quadrature supports position_at and position_squared_at"
        )
    power = 1 if obs.kind == POSITION_AT else 2
    if density.kernel.family == FEJER:
        raise DivergentObservableError(
            "polynomial moments of the untruncated sin-squared kernel diverge"
        )
    m0, e0 = kernel_moment(density.kernel, 0)
    m1, e1 = kernel_moment(density.kernel, 1)
    moments = [m0, m1]
    if power == 2:
        m2, _ = kernel_moment(density.kernel, 2)
        moments.append(m2)
    if e0 + e1 > 1e-6:
        raise ConfigError("kernel moment quadrature did not converge")

    t = density.grid.slice_time(obs.t_index)
    nodes, logw = density.alpha_measure.quad_nodes(
        resolution or density.alpha_quadrature
    )
    c = (density.system.basis(t) @ nodes.T).T + density.system.offset(t)  # (K, D)
    c = c[:, obs.coord]
    w = np.exp(logw - logw.max())
    if power == 1:
        inner = moments[1] + c * moments[0]
    else:
        inner = moments[2] + 2.0 * c * moments[1] + np.square(c) * moments[0]
    num = float(np.sum(w * inner))
    den = float(np.sum(w) * moments[0])
    return num / den


def oracle_compare(
    density: PathDensity,
    obs: Observable,
    mc_estimate: float,
    mc_stderr: float,
    lattice: LatticeSpec,
    case_id: str = "",
) -> dict:
    """Cross-validation report: Monte Carlo vs lattice vs quadrature.

    The verdict is "agree" when the Monte Carlo estimate is within three
    standard errors of the lattice value and, when a slice quadrature
    applies, lattice and quadrature differ by less than the lattice's
    discretization allowance (10^-3 absolute).
    """
    lattice_value = lattice_expectation(density, obs, lattice)
    quadrature_value = None
    if obs.kind in (POSITION_AT, POSITION_SQUARED_AT) and not density.path_constraints:
        quadrature_value = slice_quadrature(density, obs)
    mc_ok = abs(mc_estimate - lattice_value) <= 3.0 * mc_stderr
    quad_ok = (
        True
        if quadrature_value is None
        else abs(lattice_value - quadrature_value) <= 1e-3
    )
    return {
        "case_id": case_id,
        "mc_estimate": mc_estimate,
        "mc_stderr": mc_stderr,
        "lattice_value": lattice_value,
        "quadrature_value": quadrature_value,
        "clipped_mass": clipped_mass(density, lattice),
        "verdict": "agree" if (mc_ok and quad_ok) else "disagree",
    }

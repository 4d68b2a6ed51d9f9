"""Trajectory samplers.

Three methods, one result type:

* ancestral: exact two-stage draws (alpha from its measure, then
  independent kernel noise per slice and coordinate).  Available exactly
  when there are no path constraints.
* metropolis_path: Metropolis chain over trajectory space for constrained
  densities, single-slice Gaussian proposals mixed 9:1 with whole-path
  shifts.
* importance_from_ancestral: ancestral draws from the unconstrained
  density reweighted by the constraint factors.

All randomness is counter-based: a Philox generator keyed by the seed,
jumped once per chain index, so (seed, chain, draw order) determines every
number and chains are independent streams.  Batches are assembled in chain
index order regardless of execution order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .density import PathDensity, _constraint_log_batch, log_weight_batch
from .errors import DegenerateWeightsError, SamplerError
from .kernels import kernel_log_eval, kernel_sample
from .model import TimeGrid, Trajectory

ANCESTRAL = "ancestral"
METROPOLIS_PATH = "metropolis_path"
IMPORTANCE_FROM_ANCESTRAL = "importance_from_ancestral"

METHODS = (ANCESTRAL, METROPOLIS_PATH, IMPORTANCE_FROM_ANCESTRAL)

# a Metropolis run aborts if a window this long accepts nothing
_ZERO_ACCEPT_WINDOW = 1000
_SLICE_MOVE_FRACTION = 0.9
_LOW_ACCEPT_FLAG = 1e-3


@dataclass(frozen=True)
class SamplerConfig:
    method: str
    n_samples: int
    burn_in: int = 0
    proposal_step: float | None = None
    n_chains: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown sampling method {self.method!r}")
        if self.n_samples <= 0:
            raise ValueError("n_samples must be positive")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if self.n_chains < 1:
            raise ValueError("n_chains must be at least 1")
        if self.method == METROPOLIS_PATH:
            if self.proposal_step is None or not self.proposal_step > 0:
                raise ValueError("metropolis_path requires proposal_step > 0")


@dataclass(frozen=True)
class SampleBatch:
    """Sampled trajectories with weights and sampler diagnostics.

    ``values`` has shape (n_samples, n_slices, dim).  Weights are uniform
    for exact methods and only carry meaning relative to each other.
    """

    grid: TimeGrid
    values: np.ndarray
    weights: np.ndarray
    diagnostics: dict

    def __post_init__(self):
        if self.values.ndim != 3:
            raise ValueError("values must have shape (n, slices, dim)")
        if self.weights.shape != (self.values.shape[0],):
            raise ValueError("one weight per sample required")
        if not np.all(self.weights >= 0):
            raise ValueError("weights must be nonnegative")
        if self.values.shape[0] and not self.weights.sum() > 0:
            raise ValueError("weights must not all vanish")
        self.values.flags.writeable = False
        self.weights.flags.writeable = False

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def ess(self) -> float:
        return float(self.diagnostics.get("ess", self.n_samples))

    def trajectory(self, i: int) -> Trajectory:
        return Trajectory(self.grid, self.values[i])

    @property
    def trajectories(self) -> list[Trajectory]:
        return [self.trajectory(i) for i in range(self.n_samples)]


def chain_rng(seed: int, chain_index: int) -> np.random.Generator:
    """The RNG stream for one chain: Philox keyed by seed, jumped per chain."""
    return np.random.Generator(np.random.Philox(key=int(seed)).jumped(int(chain_index)))


def _chain_sizes(n: int, chains: int) -> list[int]:
    base, extra = divmod(n, chains)
    return [base + (1 if c < extra else 0) for c in range(chains)]


def weight_ess(weights: np.ndarray) -> float:
    """Effective sample size (sum w)^2 / sum w^2 of an importance batch."""
    s = weights.sum()
    if s <= 0:
        return 0.0
    return float(s * s / np.square(weights).sum())


def acceptance_probability(current_log: float, proposed_log: float) -> float:
    """Metropolis acceptance probability for symmetric proposals."""
    if proposed_log == -math.inf:
        return 0.0
    if proposed_log >= current_log:
        return 1.0
    return math.exp(proposed_log - current_log)


def ancestral_sample(density: PathDensity, cfg: SamplerConfig) -> SampleBatch:
    """Exact independent draws from an unconstrained density.

    Each sample is a latent alpha draw followed by one kernel draw per
    slice and coordinate; the exact point-mass kernel adds no noise, so
    exact-kernel densities reproduce classical trajectories verbatim.
    """
    if density.path_constraints:
        raise SamplerError(
            "ancestral sampling requires an unconstrained density; use "
            "metropolis_path or importance_from_ancestral"
        )
    grid = density.grid
    s, d = grid.n_slices, density.system.dim
    basis = density.system.basis(grid.times)
    offset = density.system.offset(grid.times)
    # a point measure has one classical path; reuse it bit for bit
    point_path = (
        density.classical_values(density.alpha_measure.alpha0)
        if density.alpha_measure.is_point
        else None
    )

    chunks = []
    chain_means = []
    for c, n_c in enumerate(_chain_sizes(cfg.n_samples, cfg.n_chains)):
        if n_c == 0:
            chain_means.append(np.zeros(d))
            continue
        rng = chain_rng(cfg.seed, c)
        if point_path is not None:
            xs = np.broadcast_to(point_path, (n_c, s, d))
        else:
            alphas = density.alpha_measure.sample(rng, n_c)
            xs = np.einsum("sdn,kn->ksd", basis, alphas) + offset
        noise = kernel_sample(density.kernel, rng, size=(n_c, s, d))
        vals = xs + noise
        chunks.append(vals)
        chain_means.append(vals.mean(axis=(0, 1)))
    values = np.concatenate(chunks, axis=0) if chunks else np.empty((0, s, d))
    diagnostics = {
        "method": ANCESTRAL,
        "acceptance_rate": None,
        "ess": float(cfg.n_samples),
        "chain_means": np.array(chain_means),
    }
    return SampleBatch(grid, values, np.ones(cfg.n_samples), diagnostics)


def _pin_consistent_alpha(density: PathDensity) -> np.ndarray:
    """Integration constants compatible with the density's pins.

    Least-squares solve of all pin equations over the linear family; the
    measure's center when there are no pins.  This is the initial state
    of every Metropolis chain: the distinguished classical trajectory.
    """
    sys_ = density.system
    rows, rhs = [], []
    for c in density.path_constraints:
        t = density.grid.slice_time(c.t_index)
        if c.kind == "position_at":
            rows.append(sys_.basis(t))
            rhs.append(c.target - sys_.offset(t))
        else:
            rows.append(sys_.basis_dot(t))
            rhs.append(c.target - sys_.offset_dot(t))
    if not rows:
        return density.alpha_measure.center.copy()
    a = np.concatenate(rows, axis=0)
    b = np.concatenate(rhs)
    alpha, *_ = np.linalg.lstsq(a, b, rcond=None)
    return alpha


class _PointMassLedger:
    """Per-slice log-weight cache for point-mass alpha densities.

    The kernel product factorizes over slices, so a single-slice proposal
    only needs its own slice's term plus the constraint factors.
    """

    def __init__(self, density: PathDensity, values: np.ndarray):
        self.density = density
        self.xs = density.classical_values(density.alpha_measure.alpha0)
        self.values = values.copy()
        self.slice_logs = self._slice_logs(values)
        self.constraint_log = float(_constraint_log_batch(density, values[None])[0])

    def _slice_logs(self, values) -> np.ndarray:
        return np.sum(kernel_log_eval(self.density.kernel, values - self.xs), axis=-1)

    def total(self) -> float:
        return float(self.slice_logs.sum() + self.constraint_log)

    def propose_slice(self, i: int, new_row: np.ndarray):
        new_log = float(
            np.sum(kernel_log_eval(self.density.kernel, new_row - self.xs[i]))
        )
        old = self.values[i].copy()
        self.values[i] = new_row
        new_constraint = float(_constraint_log_batch(self.density, self.values[None])[0])
        delta = (new_log - self.slice_logs[i]) + (new_constraint - self.constraint_log)
        return delta, (i, old, new_log, new_constraint)

    def propose_shift(self, shift: np.ndarray):
        new_values = self.values + shift
        new_logs = self._slice_logs(new_values)
        new_constraint = float(_constraint_log_batch(self.density, new_values[None])[0])
        delta = (new_logs.sum() + new_constraint) - self.total()
        return delta, (new_values, new_logs, new_constraint)

    def accept_slice(self, token):
        i, _old, new_log, new_constraint = token
        self.slice_logs[i] = new_log
        self.constraint_log = new_constraint

    def reject_slice(self, token):
        i, old, _new_log, _new_constraint = token
        self.values[i] = old

    def accept_shift(self, token):
        new_values, new_logs, new_constraint = token
        self.values = new_values
        self.slice_logs = new_logs
        self.constraint_log = new_constraint


class _GenericLedger:
    """Full log-weight recomputation; used for quadrature alpha measures."""

    def __init__(self, density: PathDensity, values: np.ndarray):
        self.density = density
        self.values = values.copy()
        self.log = float(log_weight_batch(density, values[None])[0])

    def total(self) -> float:
        return self.log

    def propose_slice(self, i: int, new_row: np.ndarray):
        old = self.values[i].copy()
        self.values[i] = new_row
        new_log = float(log_weight_batch(self.density, self.values[None])[0])
        return new_log - self.log, (i, old, new_log)

    def propose_shift(self, shift: np.ndarray):
        new_values = self.values + shift
        new_log = float(log_weight_batch(self.density, new_values[None])[0])
        return new_log - self.log, (new_values, new_log)

    def accept_slice(self, token):
        self.log = token[2]

    def reject_slice(self, token):
        i, old, _ = token
        self.values[i] = old

    def accept_shift(self, token):
        self.values, self.log = token


def _initial_state(density: PathDensity, rng: np.random.Generator) -> np.ndarray:
    alpha = _pin_consistent_alpha(density)
    values = density.classical_values(alpha)
    logw = float(log_weight_batch(density, values[None])[0])
    if logw > -math.inf:
        return values
    # classical start can sit on a kernel node (sharp pins off the family);
    # jitter within a kernel width until the weight is finite
    scale = density.kernel.width or 1.0
    for _ in range(200):
        trial = values + rng.normal(0.0, 0.1 * scale, size=values.shape)
        if float(log_weight_batch(density, trial[None])[0]) > -math.inf:
            return trial
    raise SamplerError(
        "could not find a finite-weight initial trajectory near the classical path"
    )


def metropolis_sample(density: PathDensity, cfg: SamplerConfig) -> SampleBatch:
    """Metropolis chain over trajectories.

    Proposals are single-slice Gaussian moves (probability 0.9, all
    coordinates of one uniformly chosen slice) and whole-path shifts
    (probability 0.1, one Gaussian offset per coordinate applied to every
    slice).  Both are symmetric, so acceptance is min(1, weight ratio).
    Proposals landing on zero weight (kernel nodes, truncation) are
    rejected outright.
    """
    if cfg.method != METROPOLIS_PATH:
        cfg = replace(cfg, method=METROPOLIS_PATH)
    if density.is_classical:
        raise SamplerError(
            "exact-kernel densities are deterministic; use ancestral sampling"
        )
    grid = density.grid
    s, d = grid.n_slices, density.system.dim
    step = cfg.proposal_step

    all_values = []
    chain_means = []
    accepted = proposed = 0
    slice_proposed = np.zeros(s, dtype=int)
    slice_accepted = np.zeros(s, dtype=int)

    for c, n_c in enumerate(_chain_sizes(cfg.n_samples, cfg.n_chains)):
        rng = chain_rng(cfg.seed, c)
        state = _initial_state(density, rng)
        ledger = (
            _PointMassLedger(density, state)
            if density.alpha_measure.is_point
            else _GenericLedger(density, state)
        )
        out = np.empty((n_c, s, d))
        window_accepts = window_steps = 0
        kept = 0
        total_steps = cfg.burn_in + n_c
        for t in range(total_steps):
            if rng.random() < _SLICE_MOVE_FRACTION:
                i = int(rng.integers(s))
                new_row = ledger.values[i] + rng.normal(0.0, step, size=d)
                delta, token = ledger.propose_slice(i, new_row)
                slice_proposed[i] += 1
                if math.log(max(rng.random(), 1e-320)) < delta:
                    ledger.accept_slice(token)
                    accepted += 1
                    window_accepts += 1
                    slice_accepted[i] += 1
                else:
                    ledger.reject_slice(token)
            else:
                shift = rng.normal(0.0, step, size=d)
                delta, token = ledger.propose_shift(shift)
                if math.log(max(rng.random(), 1e-320)) < delta:
                    ledger.accept_shift(token)
                    accepted += 1
                    window_accepts += 1
            proposed += 1
            window_steps += 1
            if window_steps >= _ZERO_ACCEPT_WINDOW:
                if window_accepts == 0:
                    raise SamplerError(
                        f"no proposals accepted in {_ZERO_ACCEPT_WINDOW} steps; "
                        f"proposal_step={step} is badly tuned for this density "
                        "(try a step near the kernel width)"
                    )
                window_accepts = window_steps = 0
            if t >= cfg.burn_in:
                out[kept] = ledger.values
                kept += 1
        all_values.append(out)
        chain_means.append(out.mean(axis=(0, 1)) if n_c else np.zeros(d))

    values = np.concatenate(all_values, axis=0)
    ess = sum(
        chunk.shape[0] / integrated_autocorr_time(chunk.mean(axis=(1, 2)))
        for chunk in all_values
        if chunk.shape[0]
    )
    slice_rates = slice_accepted / np.maximum(slice_proposed, 1)
    low = [int(i) for i in np.nonzero((slice_proposed >= 100) & (slice_rates < _LOW_ACCEPT_FLAG))[0]]
    diagnostics = {
        "method": METROPOLIS_PATH,
        "acceptance_rate": accepted / proposed if proposed else 0.0,
        "ess": float(min(ess, cfg.n_samples)),
        "chain_means": np.array(chain_means),
        "low_acceptance_slices": low,
    }
    return SampleBatch(grid, values, np.ones(cfg.n_samples), diagnostics)


def integrated_autocorr_time(y: np.ndarray) -> float:
    """Integrated autocorrelation time with a self-consistent window."""
    n = y.size
    if n < 8:
        return 1.0
    y = y - y.mean()
    var = float(y @ y) / n
    if var <= 0:
        return float(n)
    f = np.fft.rfft(y, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n].real / (n * var)
    tau = 1.0
    for k in range(1, n):
        tau += 2.0 * acf[k]
        if k >= 5.0 * tau:
            break
    return float(min(max(tau, 1.0), n))


def importance_reweight(batch: SampleBatch, density_with_constraints: PathDensity) -> SampleBatch:
    """Multiply batch weights by the density's constraint factors.

    The batch must have been drawn from the same density minus its path
    constraints; no constraints means no change.  Raises
    :class:`DegenerateWeightsError` when every reweighted sample vanishes.
    """
    if batch.grid != density_with_constraints.grid:
        raise ValueError("batch grid does not match density grid")
    if not density_with_constraints.path_constraints:
        return batch
    factors = _constraint_log_batch(density_with_constraints, batch.values)
    with np.errstate(divide="ignore"):
        logw = np.log(batch.weights) + factors
    top = logw.max()
    if top == -math.inf:
        raise DegenerateWeightsError(
            "every sample has zero weight under the constraints; the pins are "
            "incompatible with the sampled density"
        )
    weights = np.exp(logw - top)
    diagnostics = dict(batch.diagnostics)
    diagnostics["method"] = IMPORTANCE_FROM_ANCESTRAL
    diagnostics["ess"] = weight_ess(weights)
    return SampleBatch(batch.grid, batch.values, weights, diagnostics)


def sample(density: PathDensity, cfg: SamplerConfig) -> SampleBatch:
    """Dispatch on cfg.method."""
    if cfg.method == ANCESTRAL:
        return ancestral_sample(density, cfg)
    if cfg.method == METROPOLIS_PATH:
        return metropolis_sample(density, cfg)
    base = replace_constraints(density, ())
    batch = ancestral_sample(base, replace(cfg, method=ANCESTRAL))
    return importance_reweight(batch, density)


def replace_constraints(density: PathDensity, constraints) -> PathDensity:
    from dataclasses import replace as dc_replace

    return dc_replace(density, path_constraints=tuple(constraints))


def write_batch_csv(batch: SampleBatch, path: str) -> None:
    """One row per (sample, slice): sample_id, slice, t, x0..x{D-1}."""
    d = batch.values.shape[2]
    times = batch.grid.times
    with open(path, "w") as fh:
        cols = ",".join(f"x{j}" for j in range(d))
        fh.write(f"sample_id,slice,t,{cols},weight\n")
        for i in range(batch.n_samples):
            w = float(batch.weights[i])
            for k in range(batch.grid.n_slices):
                xs = ",".join(repr(float(v)) for v in batch.values[i, k])
                fh.write(f"{i},{k},{float(times[k])!r},{xs},{w!r}\n")


def write_batch_binary(batch: SampleBatch, path: str) -> None:
    """Compact column format: magic, header length, JSON header, raw arrays.

    Layout: 4-byte magic b"PDB1", little-endian uint64 header byte length,
    UTF-8 JSON header, then the values array and the weights array in C
    order, little-endian float64.
    """
    header = {
        "n_samples": batch.n_samples,
        "n_slices": batch.grid.n_slices,
        "dim": batch.values.shape[2],
        "t_start": batch.grid.t_start,
        "t_end": batch.grid.t_end,
        "dtype": "<f8",
        "layout": ["values(n_samples,n_slices,dim)", "weights(n_samples)"],
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(b"PDB1")
        fh.write(len(blob).to_bytes(8, "little"))
        fh.write(blob)
        fh.write(np.ascontiguousarray(batch.values, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(batch.weights, dtype="<f8").tobytes())


def read_batch_binary(path: str) -> SampleBatch:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != b"PDB1":
            raise ValueError(f"not a batch file: bad magic {magic!r}")
        size = int.from_bytes(fh.read(8), "little")
        header = json.loads(fh.read(size).decode())
        n, s, d = header["n_samples"], header["n_slices"], header["dim"]
        values = np.frombuffer(fh.read(n * s * d * 8), dtype="<f8").reshape(n, s, d)
        weights = np.frombuffer(fh.read(n * 8), dtype="<f8")
    grid = TimeGrid(header["t_start"], header["t_end"], s)
    return SampleBatch(grid, values.copy(), weights.copy(), {"method": "file"})

"""Shared domain types: time grids, trajectories, and result records.

A trajectory is represented at finite resolution as its values on a uniform
time grid, one row per slice and one column per spatial coordinate.  Vectors
of integration constants (``alpha``) are plain 1-D float arrays; their length
is validated against the owning system wherever they are consumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform discretization of a time interval.

    ``dt`` is derived as ``(t_end - t_start) / (n_slices - 1)`` and slice
    ``i`` sits at ``t_start + i * dt``.
    """

    t_start: float
    t_end: float
    n_slices: int

    def __post_init__(self):
        if self.n_slices < 2:
            raise ValueError(f"n_slices must be >= 2, got {self.n_slices}")
        if not self.t_end > self.t_start:
            raise ValueError(
                f"time interval must increase, got [{self.t_start}, {self.t_end}]"
            )

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / (self.n_slices - 1)

    def slice_time(self, i: int) -> float:
        if not 0 <= i < self.n_slices:
            raise IndexError(f"slice index {i} out of range [0, {self.n_slices})")
        return self.t_start + i * self.dt

    @property
    def times(self) -> np.ndarray:
        """All slice times as a 1-D array."""
        return self.t_start + np.arange(self.n_slices) * self.dt


def make_grid(t_start: float, t_end: float, n_slices: int) -> TimeGrid:
    """Build a uniform grid; rejects reversed intervals and n_slices < 2."""
    return TimeGrid(float(t_start), float(t_end), int(n_slices))


@dataclass(frozen=True)
class Trajectory:
    """Values of one path on a grid, shape ``(n_slices, dim)``.

    A 1-D input array is treated as a single spatial coordinate.  All
    entries must be finite.
    """

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.grid.n_slices:
            raise ValueError(
                f"trajectory values must have shape (n_slices, dim) = "
                f"({self.grid.n_slices}, *), got {np.shape(self.values)}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("trajectory contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ExpectationResult:
    """An expectation estimate with its uncertainty and provenance.

    ``std_error`` is zero only in analytic or otherwise deterministic modes;
    ``ess`` never exceeds ``n_samples``.
    """

    estimate: float
    std_error: float
    n_samples: int
    ess: float
    seed: int
    config_digest: str

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")
        if self.ess > self.n_samples + 1e-9:
            raise ValueError("effective sample size cannot exceed n_samples")

"""
Convergence to classical mechanics
==================================

As the sharpness parameter m grows, kernel-smoothed densities concentrate
onto the classical trajectory.  For a Gaussian family the squared spread of
each slice marginal is exactly 1/(2 m^2), so an x^2 observable evaluated at
a classical zero crossing measures the spread directly.  Doubling m four
times should march the deviation down a straight log-log line of slope -2.
"""

import math

import numpy as np

from pathdensity import (
    PathDensity,
    SamplerConfig,
    classical_limit_sweep,
    gaussian,
    loglog_slope,
    make_grid,
    make_system,
    pinned_alpha,
    point_mass,
    position_squared_at,
)

system = make_system("harmonic_oscillator_1d", omega=2.0)
# Slice 8 of this grid sits at t = pi/4 where cos(2t) = 0.
grid = make_grid(0.0, math.pi / 2.0, 17)
template = PathDensity(
    system, grid, gaussian(1.0), point_mass(pinned_alpha(system, 1.0, 0.0))
)

result = classical_limit_sweep(
    template,
    position_squared_at(8),
    [1.0, 2.0, 4.0, 8.0, 16.0],
    SamplerConfig("ancestral", 50_000, seed=9),
)

print("classical reference value:", result.classical_reference)
print()
print(f"{'m':>5s} {'estimate':>12s} {'deviation':>12s} {'1/(2m^2)':>12s} {'pull':>7s}")
for i, m in enumerate(result.m_values):
    theory = 0.5 / m**2
    pull = (result.deviations[i] - theory) / result.std_errors[i]
    print(f"{m:5.1f} {result.estimates[i]:12.3e} {result.deviations[i]:12.3e} "
          f"{theory:12.3e} {pull:+7.2f}")

print()
print(f"log-log slope: {loglog_slope(result):+.4f}   (theory -2)")
print("monotone decreasing:", bool(np.all(np.diff(result.deviations) < 0)))

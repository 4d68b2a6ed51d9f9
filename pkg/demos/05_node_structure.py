"""
Nodes in the slice marginal
===========================

The sin-squared kernel family vanishes on a lattice of offsets u = k pi/m,
and an unconstrained point-measure density inherits those zeros in every
slice marginal: the probability of finding the coordinate at certain exact
displacements from the classical path is zero, at any finite sharpness.
A Gaussian family has no such structure.  Density zeros, without any wave
function: the marginal itself is the object carrying them.
"""

import math

import numpy as np

from pathdensity import (
    PathDensity,
    fejer,
    gaussian,
    make_grid,
    make_system,
    marginal_density,
    node_scan,
    pinned_alpha,
    point_mass,
)

m = 2.0
system = make_system("harmonic_oscillator_1d", omega=2.0)
grid = make_grid(0.0, 1.5, 16)
alpha = pinned_alpha(system, 1.0, 0.0)
t_index = 5
x_s = float(system.eval(alpha, grid.times[t_index])[0])
span = 4.0 * math.pi / m
window = (x_s - span, x_s + span)

print(f"scanning slice {t_index} (classical value {x_s:+.5f}) "
      f"over x_s +- {span:.3f}")
print()

for name, kern in (("sin-squared", fejer(m)), ("gaussian", gaussian(m))):
    density = PathDensity(system, grid, kern, point_mass(alpha))
    scan = node_scan(density, t_index, window, 2001)
    print(f"{name}: {scan.n_nodes} nodes")
    for x in scan.node_positions:
        k = (x - x_s) * m / math.pi
        print(f"   x = {x:+.5f}   offset = {k:+.3f} pi/m")
    print()

# The zeros are exact, not merely small.
density = PathDensity(system, grid, fejer(m), point_mass(alpha))
at_node = x_s + math.pi / m
rho = marginal_density(density, t_index, at_node)
print("marginal density exactly at the first node:", rho)

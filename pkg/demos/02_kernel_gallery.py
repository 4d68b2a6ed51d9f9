"""
The delta-sequence kernel families
==================================

Three smoothing families stand in for the delta functional at finite
sharpness m, plus the exact limit as a special object.  This script walks
through their shapes, normalization, tail mass, and random draws.
"""

import math

import numpy as np

from pathdensity import (
    exact_delta,
    fejer,
    gaussian,
    kernel_log_eval,
    kernel_mass,
    kernel_moment,
    kernel_sample,
    truncated_fejer,
)

m = 2.0
u = np.linspace(-4.0, 4.0, 9)

# ----------------------------------------------------------------------
# Shapes.  kernel_log_eval works in log space; the sin-squared family has
# genuine zeros, which come back as -inf.
gau = gaussian(m)
fej = fejer(m)
tru = truncated_fejer(m, 10.0)

print("log density at a few offsets (m = 2):")
print("      u      gaussian   sin-squared")
for ui in u:
    lg = kernel_log_eval(gau, ui)
    lf = kernel_log_eval(fej, ui)
    print(f"  {ui:+5.1f}   {lg:9.4f}   {lf:9.4f}")

# The sin-squared family vanishes at u = k pi / m, k nonzero.  The zeros
# are exact: log density -inf, not merely small.
zeros = [k * math.pi / m for k in (1, 2, 3)]
print("first zeros:", [round(z, 5) for z in zeros])
print("log density there:", [kernel_log_eval(fej, z) for z in zeros])

# ----------------------------------------------------------------------
# Mass.  Both smooth families integrate to one over the line; the hard
# truncation clips a little tail mass and is deliberately left as is.
print("gaussian mass:   ", kernel_mass(gau, -math.inf, math.inf))
print("sin-squared mass:", kernel_mass(fej, -math.inf, math.inf))
print("truncated mass:  ", kernel_mass(tru, -math.inf, math.inf))

# Raw moments of the truncated family follow a closed form.  The second
# moment of the untruncated family diverges, which is why a truncation
# radius exists at all.
m2, err = kernel_moment(tru, 2)
r = 10.0
closed = (r - math.sin(2 * m * r) / (2 * m)) / (math.pi * m)
print(f"truncated second moment: {m2:.6f}  (closed form {closed:.6f})")

# ----------------------------------------------------------------------
# Sampling.  Each family knows how to draw from itself; draws concentrate
# on a scale 1/m.
rng = np.random.default_rng(52)
for name, kern in (("gaussian", gau), ("sin-squared", fej), ("truncated", tru)):
    draws = kernel_sample(kern, rng, 20_000)
    print(f"{name:12s} draw spread {draws.std():.4f}, max |u| {np.abs(draws).max():.3f}")

# The exact kernel refuses pointwise evaluation; it only makes sense inside
# the analytic machinery.
try:
    kernel_log_eval(exact_delta(), 0.0)
except Exception as exc:
    print("exact kernel pointwise eval:", type(exc).__name__)

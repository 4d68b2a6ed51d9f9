"""Smoothing kernels that sharpen to a point mass as ``m_delta`` grows.

Four families are supported:

* ``exact_delta``: the point mass itself.  It has no pointwise density and
  is handled analytically by the density layer; evaluating it here raises.
* ``gaussian``: ``(m / sqrt(pi)) * exp(-(m u)^2)``, strictly positive.
* ``fejer``: ``sin^2(m u) / (pi m u^2)``, normalized, with exact zeros at
  ``u = k pi / m`` for nonzero integer ``k``.  Its polynomial moments
  diverge.
* ``truncated_fejer``: the same density hard-cut to ``|u| <= trunc_radius``
  and left unnormalized, so moment observables become finite.  The missing
  mass is visible through :func:`kernel_mass`.

All evaluation is done in log space: a product over hundreds of slices
underflows in linear space, and a log-density of ``-inf`` is a legal value
(kernel zeros, truncation) rather than an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import AnalyticModeOnlyError, QuadratureError

EXACT_DELTA = "exact_delta"
GAUSSIAN = "gaussian"
FEJER = "fejer"
TRUNCATED_FEJER = "truncated_fejer"

FAMILIES = (EXACT_DELTA, GAUSSIAN, FEJER, TRUNCATED_FEJER)

# Relative half-width, in units of the spacing of m*u/pi, inside which a
# value is snapped onto a kernel zero.  The true density inside this window
# is below exp(-60) of the peak, so reporting -inf there is honest; without
# the snap the zeros are unreachable in floating point.
_NODE_SNAP_ULPS = 8.0

_MASS_TOL = 1e-7


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family plus its sharpness parameter.

    ``m_delta`` has units of inverse length and is infinite for the exact
    point mass.  ``trunc_radius`` is required by the truncated family and
    must not be set otherwise.
    """

    family: str
    m_delta: float = math.inf
    trunc_radius: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == EXACT_DELTA:
            if not math.isinf(self.m_delta):
                raise ValueError("exact_delta takes no finite m_delta")
        else:
            if not (np.isfinite(self.m_delta) and self.m_delta > 0):
                raise ValueError(f"m_delta must be positive and finite, got {self.m_delta}")
        if self.family == TRUNCATED_FEJER:
            if self.trunc_radius is None or not self.trunc_radius > 0:
                raise ValueError("truncated_fejer requires trunc_radius > 0")
        elif self.trunc_radius is not None:
            raise ValueError(f"trunc_radius is only meaningful for {TRUNCATED_FEJER}")

    @property
    def is_exact(self) -> bool:
        return self.family == EXACT_DELTA

    @property
    def width(self) -> float:
        """Length scale of the kernel, used for proposal steps and ranges."""
        if self.is_exact:
            return 0.0
        return 1.0 / (self.m_delta * math.sqrt(2.0))


def exact_delta() -> KernelSpec:
    return KernelSpec(EXACT_DELTA)


def gaussian(m_delta: float) -> KernelSpec:
    return KernelSpec(GAUSSIAN, float(m_delta))


def fejer(m_delta: float) -> KernelSpec:
    return KernelSpec(FEJER, float(m_delta))


def truncated_fejer(m_delta: float, trunc_radius: float) -> KernelSpec:
    return KernelSpec(TRUNCATED_FEJER, float(m_delta), float(trunc_radius))


def _fejer_log(m: float, u: np.ndarray) -> np.ndarray:
    # sin^2(mu)/(pi m u^2) = (m/pi) * sinc(mu/pi)^2 with numpy's normalized sinc
    r = m * u / np.pi
    with np.errstate(divide="ignore"):
        out = math.log(m / np.pi) + 2.0 * np.log(np.abs(np.sinc(r)))
    k = np.rint(r)
    snap = (k != 0) & (np.abs(r - k) <= _NODE_SNAP_ULPS * np.spacing(np.maximum(1.0, np.abs(r))))
    return np.where(snap, -np.inf, out)


def kernel_log_eval(kernel: KernelSpec, u) -> float | np.ndarray:
    """Log density at displacement ``u`` (scalar or array).

    Returns ``-inf`` exactly on the sin-squared kernel's zeros and outside
    the truncation radius.  The exact point mass is not evaluable pointwise
    and raises :class:`AnalyticModeOnlyError`.
    """
    if kernel.is_exact:
        raise AnalyticModeOnlyError(
            "exact_delta has no pointwise density; it is handled analytically"
        )
    u_arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u_arr)):
        raise ValueError("kernel argument must be finite")
    m = kernel.m_delta
    if kernel.family == GAUSSIAN:
        out = math.log(m / math.sqrt(math.pi)) - np.square(m * u_arr)
    else:
        out = _fejer_log(m, u_arr)
        if kernel.family == TRUNCATED_FEJER:
            out = np.where(np.abs(u_arr) > kernel.trunc_radius, -np.inf, out)
    return float(out) if np.isscalar(u) or u_arr.ndim == 0 else out


def kernel_sample(kernel: KernelSpec, rng: np.random.Generator, size=None):
    """Draw from the kernel density (scalar by default, batched via ``size``).

    The exact point mass returns zeros.  The sin-squared families are drawn
    by rejection from the two-piece envelope ``min(m/pi, 1/(pi m u^2))``:
    a flat cap on ``|u| <= 1/m`` and an inverse-square tail sampled by
    inverse CDF.  The envelope mass is ``4/pi``, so about ``pi/4`` of
    proposals are accepted.
    """
    if kernel.is_exact:
        return 0.0 if size is None else np.zeros(size)
    m = kernel.m_delta
    if kernel.family == GAUSSIAN:
        return rng.normal(0.0, 1.0 / (m * math.sqrt(2.0)), size=size)

    n = 1 if size is None else int(np.prod(size))
    radius = kernel.trunc_radius if kernel.family == TRUNCATED_FEJER else math.inf
    out = np.empty(n)
    filled = 0
    while filled < n:
        k = max(32, int((n - filled) * 1.5))
        u = _fejer_propose(m, rng, k)
        keep = (rng.random(k) < _fejer_accept_ratio(m, u)) & (np.abs(u) <= radius)
        got = u[keep]
        take = min(got.size, n - filled)
        out[filled : filled + take] = got[:take]
        filled += take
    if size is None:
        return float(out[0])
    return out.reshape(size)


def _fejer_propose(m: float, rng: np.random.Generator, k: int) -> np.ndarray:
    cap = rng.random(k) < 0.5
    u_cap = rng.uniform(-1.0 / m, 1.0 / m, size=k)
    # one-sided tail CDF on (1/m, inf): F(u) = 1 - 1/(m u)
    u_tail = 1.0 / (m * (1.0 - rng.random(k)))
    sign = np.where(rng.random(k) < 0.5, -1.0, 1.0)
    return np.where(cap, u_cap, sign * u_tail)


def _fejer_accept_ratio(m: float, u: np.ndarray) -> np.ndarray:
    inside = np.abs(u) <= 1.0 / m
    s = np.sinc(m * u / np.pi)
    return np.where(inside, s * s, np.square(np.sin(m * u)))


def kernel_mass(kernel: KernelSpec, a: float, b: float) -> float:
    """Mass ``integral_a^b`` of the kernel density, by adaptive quadrature.

    Infinite bounds are allowed.  The sin-squared tail is integrated with a
    cosine-weighted rule after splitting off the exactly integrable
    ``1/u^2`` part; the oscillatory integrand defeats plain quadrature on
    unbounded ranges.  Raises :class:`QuadratureError` when the accumulated
    error estimate exceeds the mass tolerance.
    """
    a, b = float(a), float(b)
    if not a <= b:
        raise ValueError(f"interval must be ordered, got ({a}, {b})")
    if kernel.is_exact:
        return 1.0 if a <= 0.0 <= b else 0.0
    m = kernel.m_delta
    if kernel.family == GAUSSIAN:
        val, err = _gaussian_quad(m, a, b)
    else:
        if kernel.family == TRUNCATED_FEJER:
            a = max(a, -kernel.trunc_radius)
            b = min(b, kernel.trunc_radius)
            if a >= b:
                return 0.0
        val, err = _fejer_quad(m, a, b)
    if err > _MASS_TOL:
        raise QuadratureError("kernel mass quadrature did not converge", err)
    return min(max(val, 0.0), 1.0)


def _gaussian_quad(m: float, a: float, b: float) -> tuple[float, float]:
    pdf = lambda u: (m / math.sqrt(math.pi)) * math.exp(-((m * u) ** 2))
    pts = [p for p in (-1.0 / m, 0.0, 1.0 / m) if a < p < b]
    if np.isinf(a) or np.isinf(b):
        # split at the peak so the infinite transform never straddles it
        pieces, lo = [], a
        for p in pts + [b]:
            pieces.append((lo, p))
            lo = p
        val = err = 0.0
        for lo, hi in pieces:
            v, e = integrate.quad(pdf, lo, hi, epsabs=1e-12, limit=200)
            val += v
            err += e
        return val, err
    return integrate.quad(pdf, a, b, points=pts or None, epsabs=1e-12, limit=200)


def _fejer_pdf(m: float):
    def pdf(u):
        s = np.sinc(m * u / np.pi)
        return (m / np.pi) * s * s

    return pdf


def _fejer_quad(m: float, a: float, b: float) -> tuple[float, float]:
    # signed cumulative from 0; the density is even so only C(x) for x >= 0
    # is ever computed
    cb, eb = _fejer_cumulative(m, abs(b))
    ca, ea = _fejer_cumulative(m, abs(a))
    val = math.copysign(cb, b) - math.copysign(ca, a)
    return val, eb + ea


def _fejer_cumulative(m: float, x: float) -> tuple[float, float]:
    """Quadrature of the density over [0, x], x >= 0, possibly infinite."""
    if x == 0.0:
        return 0.0, 0.0
    core_end = 8.0 * np.pi / m
    pdf = _fejer_pdf(m)
    hi = min(x, core_end)
    pts = [k * np.pi / m for k in range(1, 9) if k * np.pi / m < hi]
    val, err = integrate.quad(pdf, 0.0, hi, points=pts or None, epsabs=1e-12, limit=300)
    if x > core_end:
        t, te = _fejer_tail(m, core_end, x)
        val += t
        err += te
    return val, err


def _fejer_tail(m: float, c: float, d: float) -> tuple[float, float]:
    """Tail mass over [c, d] with c >= 8 pi / m, via the split
    (1 - cos(2mu)) / (2 pi m u^2): the first part integrates exactly, the
    second goes to a cosine-weighted adaptive rule."""
    plain = (1.0 / c - (0.0 if np.isinf(d) else 1.0 / d)) / (2.0 * np.pi * m)
    osc, err = integrate.quad(
        lambda u: 1.0 / (2.0 * np.pi * m * u * u),
        c,
        d,
        weight="cos",
        wvar=2.0 * m,
        limit=200,
    )
    return plain - osc, err

"""Special functions, quadrature, and root finding used by every other module.

Thin double-precision wrappers around ``scipy.special`` (normal CDF/quantile,
regularized incomplete beta) plus the handful of primitives implemented here:
stable log-space binomial tails, Gauss-Legendre integration on a finite
interval, and plain bisection. All functions are pure; the only cached state
is the table of quadrature nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import betainc as _betainc
from scipy.special import gammaln, ndtr, ndtri


class BracketError(ValueError):
    """Bisection bracket does not straddle a sign change."""


class IntegrationError(ValueError):
    """Integrand evaluated to a non-finite value on the quadrature nodes."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre rule on the finite interval [lower, upper]."""

    node_count: int = 201
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self) -> None:
        if self.node_count < 2:
            raise ValueError(f"node_count must be >= 2, got {self.node_count}")
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("quadrature bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")


@dataclass(frozen=True)
class GridSpec:
    """Scan grid for rejection-region extraction, in standard-error units.

    ``resolution`` points per standard error of the observed mean, spanning
    ``span`` standard errors on each side of the data-distribution mean.
    """

    resolution: int = 400
    span: float = 8.0

    def __post_init__(self) -> None:
        if self.resolution < 100:
            raise ValueError(f"resolution must be >= 100, got {self.resolution}")
        if self.span < 8:
            raise ValueError(f"span must be >= 8, got {self.span}")


def std_normal_cdf(z):
    """Standard normal CDF. Accepts scalars or arrays; saturates at 0/1."""
    out = ndtr(z)
    return float(out) if np.isscalar(z) or np.ndim(z) == 0 else out


def std_normal_pdf(z):
    """Standard normal density."""
    z = np.asarray(z, dtype=float)
    out = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return float(out) if out.ndim == 0 else out


def std_normal_quantile(p: float) -> float:
    """Inverse of :func:`std_normal_cdf` on (0, 1)."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile argument must lie in (0,1), got {p}")
    return float(ndtri(p))


def beta_cdf(x, a: float, b: float):
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not (a > 0 and b > 0):
        raise ValueError(f"beta parameters must be positive, got a={a}, b={b}")
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0) or np.any(xs > 1):
        raise ValueError("beta_cdf argument outside [0, 1]")
    out = _betainc(a, b, xs)
    return float(out) if out.ndim == 0 else out


def log_binom_pmf(ys, n: int, theta: float):
    """log P(Y = y | n, theta) via log-gamma; stable for n up to a few hundred."""
    ys = np.asarray(ys, dtype=float)
    if theta <= 0.0:
        return np.where(ys == 0, 0.0, -np.inf)
    if theta >= 1.0:
        return np.where(ys == n, 0.0, -np.inf)
    logc = gammaln(n + 1) - gammaln(ys + 1) - gammaln(n - ys + 1)
    return logc + ys * math.log(theta) + (n - ys) * math.log1p(-theta)


def binomial_tail(y_crit: int, n: int, theta):
    """P(Y >= y_crit | n, theta) by log-space summation of pmf terms.

    ``y_crit`` may range over 0..n+1; the empty tail (y_crit = n+1) is 0.
    ``theta`` may be a scalar or an array in [0, 1].
    """
    if not 0 <= y_crit <= n + 1:
        raise ValueError(f"y_crit must lie in [0, {n + 1}], got {y_crit}")
    th = np.asarray(theta, dtype=float)
    scalar = th.ndim == 0
    th = np.atleast_1d(th).astype(float)
    if y_crit == 0:
        out = np.ones_like(th)
    elif y_crit == n + 1:
        out = np.zeros_like(th)
    else:
        out = np.empty_like(th)
        interior = (th > 0.0) & (th < 1.0)
        ks = np.arange(y_crit, n + 1, dtype=float)
        logc = gammaln(n + 1) - gammaln(ks + 1) - gammaln(n - ks + 1)
        ti = th[interior]
        logp = (
            logc[:, None]
            + ks[:, None] * np.log(ti[None, :])
            + (n - ks)[:, None] * np.log1p(-ti[None, :])
        )
        out[interior] = np.minimum(np.exp(logp).sum(axis=0), 1.0)
        out[th <= 0.0] = 0.0
        out[th >= 1.0] = 1.0
    return float(out[0]) if scalar else out


@lru_cache(maxsize=32)
def _leggauss(node_count: int):
    return leggauss(node_count)


def gauss_legendre_nodes(spec: QuadratureSpec):
    """Nodes and weights of the Gauss-Legendre rule mapped onto the spec interval."""
    x, w = _leggauss(spec.node_count)
    half = 0.5 * (spec.upper - spec.lower)
    return half * x + 0.5 * (spec.upper + spec.lower), half * w


def integrate(f: Callable, spec: QuadratureSpec) -> float:
    """Gauss-Legendre estimate of the integral of ``f`` over the spec interval.

    ``f`` is evaluated on the node array in one call and may return either an
    array or a scalar constant.
    """
    x, w = gauss_legendre_nodes(spec)
    vals = np.asarray(f(x), dtype=float)
    if vals.shape != x.shape:
        vals = np.broadcast_to(vals, x.shape)
    if not np.all(np.isfinite(vals)):
        raise IntegrationError("integrand returned non-finite values")
    return float(np.dot(w, vals))


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Root of ``f`` on [lo, hi] by bisection, to an argument interval <= tol.

    Requires f(lo) and f(hi) to have opposite signs (zero endpoints are
    returned directly).
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo < 0.0) == (fhi < 0.0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo:g}..{fhi:g}")
    neg_lo = flo < 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # interval at floating-point resolution
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == neg_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

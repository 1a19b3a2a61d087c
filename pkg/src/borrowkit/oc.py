"""Frequentist operating characteristics of a decision rule.

Power curves, type I error, expected power, frequentist and integrated risk,
and the relative saving loss (RSL) are all computed without simulation:

* monotone rules reduce to a critical value, so the normal-endpoint power is
  a Gaussian tail and the binomial-endpoint power an exact binomial tail;
* CD-Adapt (whose threshold is data dependent) is handled by extracting the
  exact rejection region -- full enumeration of success counts for the
  binomial endpoint, sign-scan plus bisection-sharpened interval boundaries
  for the normal endpoint -- and integrating the sampling density over it.

Integrals over sampling priors use Gauss-Legendre quadrature with infinite
supports truncated at 8 prior standard deviations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, ndtr

from .decisions import (
    AdaptiveCompromiseDecision,
    BayesDecision,
    DecisionRule,
    FrequentistDecision,
    Hypothesis,
    MonotonicityError,
    critical_value,
    rejection_intervals,
    rejection_set,
)
from .distributions import (
    BetaPrior,
    Binomial,
    NormalKnownSigma,
    NormalPrior,
    PointMass,
    Prior,
    default_vague_prior,
    prior_cdf,
    prior_mean,
    prior_pdf,
    prior_sd,
)
from .numerics import GridSpec, QuadratureSpec, binomial_tail, integrate

TAIL_SDS = 8.0  # truncation of infinite supports, in sampling-prior sds
_TYPE_ONE_GRID = 101


class DegenerateScenarioError(ValueError):
    """An operating characteristic is undefined for this configuration."""


@dataclass(frozen=True)
class SamplingPrior:
    """Distribution of the data-generating parameter (sensitivity analyses)."""

    distribution: Prior

    def __post_init__(self) -> None:
        if not isinstance(self.distribution, (NormalPrior, BetaPrior, PointMass)):
            raise TypeError("sampling prior must be normal, beta, or a point mass")


@dataclass(frozen=True)
class OCReport:
    rule_descriptor: str
    n: int
    type_one_error: float
    expected_power: float
    integrated_risk: float
    rsl: float
    power_curve: tuple


# ---------------------------------------------------------------------------
# power
# ---------------------------------------------------------------------------


def _suffix_power(rset: np.ndarray, n: int, thetas: np.ndarray) -> np.ndarray:
    """P(Y in rset | n, theta) for an arbitrary set of success counts."""
    out = np.zeros_like(thetas)
    if rset.size == 0:
        return out
    interior = (thetas > 0.0) & (thetas < 1.0)
    ti = thetas[interior]
    ys = rset.astype(float)
    logc = gammaln(n + 1) - gammaln(ys + 1) - gammaln(n - ys + 1)
    logp = logc[:, None] + ys[:, None] * np.log(ti) + (n - ys)[:, None] * np.log1p(-ti)
    out[interior] = np.minimum(np.exp(logp).sum(axis=0), 1.0)
    out[thetas <= 0.0] = 1.0 if 0 in rset else 0.0
    out[thetas >= 1.0] = 1.0 if n in rset else 0.0
    return out


def _interval_power(rule, n: int, thetas: np.ndarray, grid: GridSpec) -> np.ndarray:
    se = rule.model.sigma / math.sqrt(n)
    lo = float(thetas.min()) - (grid.span + 0.5) * se
    hi = float(thetas.max()) + (grid.span + 0.5) * se
    total = np.zeros_like(thetas)
    for a, b in rejection_intervals(rule, n, lo, hi, grid):
        upper = ndtr((thetas - a) / se) if math.isfinite(a) else np.ones_like(thetas)
        lower = ndtr((thetas - b) / se) if math.isfinite(b) else np.zeros_like(thetas)
        total += upper - lower
    return np.clip(total, 0.0, 1.0)


def power_curve(
    rule: DecisionRule,
    thetas,
    n: int,
    grid: GridSpec = GridSpec(),
    force_indicator: bool = False,
) -> np.ndarray:
    """Rejection probability beta(theta) at each theta.

    Monotone rules go through their critical value; CD-Adapt (and any rule
    whose monotonicity scan fails, when ``force_indicator`` is set) goes
    through exact rejection-region extraction.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if isinstance(rule.model, Binomial):
        if np.any(thetas < 0.0) or np.any(thetas > 1.0):
            raise ValueError("binomial success probability outside [0, 1]")
        if force_indicator or isinstance(rule, AdaptiveCompromiseDecision):
            return _suffix_power(rejection_set(rule, n), n, thetas)
        return binomial_tail(critical_value(rule, n), n, thetas)
    if force_indicator or isinstance(rule, AdaptiveCompromiseDecision):
        return _interval_power(rule, n, thetas, grid)
    c = critical_value(rule, n)
    if c == math.inf:
        return np.zeros_like(thetas)
    if c == -math.inf:
        return np.ones_like(thetas)
    return ndtr((thetas - c) * math.sqrt(n) / rule.model.sigma)


def power(rule: DecisionRule, theta: float, n: int) -> float:
    """Rejection probability at one parameter value.

    Falls back to rejection-region integration if the monotonicity scan fails.
    """
    try:
        return float(power_curve(rule, theta, n)[0])
    except MonotonicityError:
        return float(power_curve(rule, theta, n, force_indicator=True)[0])


def _type_one_grid(rule, n: int) -> np.ndarray:
    theta0 = rule.hyp.theta0
    if isinstance(rule.model, Binomial):
        return np.linspace(0.0, theta0, _TYPE_ONE_GRID)
    se = rule.model.sigma / math.sqrt(n)
    return np.linspace(theta0 - 6.0 * se, theta0, _TYPE_ONE_GRID)


def type_one_error(rule: DecisionRule, n: int) -> float:
    """Maximum rejection probability over the null: beta(theta0) for monotone
    rules, a 101-point grid maximum over the null region for CD-Adapt."""
    if not isinstance(rule, AdaptiveCompromiseDecision):
        try:
            return float(power_curve(rule, rule.hyp.theta0, n)[0])
        except MonotonicityError:
            pass
    grid = _type_one_grid(rule, n)
    return float(power_curve(rule, grid, n, force_indicator=True).max())


# ---------------------------------------------------------------------------
# sampling-prior averages
# ---------------------------------------------------------------------------


def _support_window(dist: Prior) -> tuple:
    if isinstance(dist, BetaPrior):
        return 0.0, 1.0
    return prior_mean(dist) - TAIL_SDS * prior_sd(dist), prior_mean(dist) + TAIL_SDS * prior_sd(dist)


def expected_power(
    rule: DecisionRule,
    sampling: SamplingPrior,
    n: int,
    theta0: float,
    node_count: int = 201,
) -> float:
    """Power averaged over the sampling prior conditioned on theta > theta0."""
    dist = sampling.distribution
    if isinstance(dist, PointMass):
        if dist.location <= theta0:
            raise DegenerateScenarioError("sampling point mass does not support the alternative")
        return power(rule, dist.location, n)
    mass_above = 1.0 - float(prior_cdf(dist, theta0))
    _, upper = _support_window(dist)
    if mass_above < 1e-15 or upper <= theta0:
        raise DegenerateScenarioError("sampling prior has no mass above theta0")
    spec = QuadratureSpec(node_count, theta0, upper)
    raw = integrate(lambda t: power_curve(rule, t, n) * prior_pdf(dist, t), spec)
    return min(max(raw / mass_above, 0.0), 1.0)


def integrated_risk(
    rule: DecisionRule,
    sampling: SamplingPrior,
    n: int,
    hyp: Hypothesis,
    node_count: int = 201,
) -> float:
    """Type I error mass plus kappa-weighted type II error mass under the
    sampling prior."""
    dist = sampling.distribution
    theta0, kappa = hyp.theta0, hyp.kappa
    if isinstance(dist, PointMass):
        beta = power(rule, dist.location, n)
        return beta if dist.location <= theta0 else kappa * (1.0 - beta)
    lower, upper = _support_window(dist)
    risk = 0.0
    if lower < min(theta0, upper):
        spec = QuadratureSpec(node_count, lower, min(theta0, upper))
        risk += integrate(lambda t: power_curve(rule, t, n) * prior_pdf(dist, t), spec)
    if max(theta0, lower) < upper:
        spec = QuadratureSpec(node_count, max(theta0, lower), upper)
        risk += kappa * integrate(
            lambda t: (1.0 - power_curve(rule, t, n)) * prior_pdf(dist, t), spec
        )
    return risk


def frequentist_risk(rule: DecisionRule, theta: float, n: int, hyp: Hypothesis) -> float:
    """Risk at a fixed parameter: beta(theta) on the null side, kappa-weighted
    keep probability on the alternative side."""
    beta = power(rule, theta, n)
    return beta if theta <= hyp.theta0 else hyp.kappa * (1.0 - beta)


def rsl(
    informative: Prior,
    rule: DecisionRule,
    n: int,
    hyp: Hypothesis,
    vague: Prior | None = None,
) -> float:
    """Relative saving loss under sampling prior = informative prior:
    0 for full borrowing (BD), 1 for no borrowing (FD), unclamped otherwise."""
    model = rule.model
    if vague is None:
        vague = default_vague_prior(model)
    sampling = SamplingPrior(informative)
    r_rule = integrated_risk(rule, sampling, n, hyp)
    r_bd = integrated_risk(BayesDecision(hyp, model, informative), sampling, n, hyp)
    r_fd = integrated_risk(FrequentistDecision(hyp, model, vague), sampling, n, hyp)
    denom = r_fd - r_bd
    if abs(denom) < 1e-12:
        raise DegenerateScenarioError("FD and BD have equal integrated risk; RSL undefined")
    return (r_rule - r_bd) / denom


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------


def _default_curve_grid(rule, n: int) -> np.ndarray:
    if isinstance(rule.model, Binomial):
        return np.linspace(0.0, 1.0, 41)
    se = rule.model.sigma / math.sqrt(n)
    return np.linspace(rule.hyp.theta0 - 4.0 * se, rule.hyp.theta0 + 8.0 * se, 41)


def compute_report(
    rule: DecisionRule,
    n: int,
    sampling: SamplingPrior,
    informative: Prior,
    vague: Prior | None = None,
    descriptor: str | None = None,
    curve_grid=None,
) -> OCReport:
    """Full operating-characteristic record for one rule at one sample size.

    RSL is always evaluated under sampling prior = informative prior, per its
    definition; for CD-Adapt it is derived from the rule's exact power curve
    (the rejection region is integrated, not simulated or averaged over data).
    """
    hyp = rule.hyp
    grid = _default_curve_grid(rule, n) if curve_grid is None else np.asarray(curve_grid, float)
    try:
        betas = power_curve(rule, grid, n)
    except MonotonicityError:
        betas = power_curve(rule, grid, n, force_indicator=True)
    try:
        rsl_value = rsl(informative, rule, n, hyp, vague)
    except DegenerateScenarioError:
        rsl_value = math.nan
    return OCReport(
        rule_descriptor=descriptor if descriptor is not None else rule.kind,
        n=n,
        type_one_error=type_one_error(rule, n),
        expected_power=expected_power(rule, sampling, n, hyp.theta0),
        integrated_risk=integrated_risk(rule, sampling, n, hyp),
        rsl=rsl_value,
        power_curve=tuple(zip(grid.tolist(), betas.tolist())),
    )

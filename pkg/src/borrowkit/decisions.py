"""Test decision rules and their rejection geometry.

Six rules are implemented, all for the one-sided problem H0: theta <= theta0
against H1: theta > theta0 under a loss that charges 1 for a false rejection
and ``kappa`` for a false keep:

* ``FrequentistDecision`` (FD): vague-prior analysis at threshold tau.
* ``BayesDecision`` (BD): analysis under a chosen prior at threshold tau.
* ``CompromiseDecision`` (CD): vague-prior analysis with the inflated
  threshold (1-w)*tau + w*tau_pi, where tau_pi is the type I error the BD
  under the informative prior would induce.
* ``AdaptiveCompromiseDecision`` (CD-Adapt): CD with a data-driven weight
  measuring agreement between the informative-prior analysis and a
  data-recentered analysis, with the threshold clamped at ``tau_bound``.
* ``RobustMixtureDecision`` (RMD): BD under a two-component mixture of a
  robust prior and the informative prior.
* ``TypeIRestrictedBayes`` (TI-RBD): BD under a mixture of a point mass at
  theta0 and the informative prior.

Rejection is strict: reject exactly when P(theta <= theta0 | y) < threshold.
Rules are frozen dataclasses (including the cached tau_pi for CD/CD-Adapt,
which depends on n), so they are safe to share across parallel sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np
from scipy.special import betainc, ndtr, ndtri

from functools import lru_cache

from .distributions import (
    BetaPrior,
    Binomial,
    EndpointModel,
    MixturePrior,
    NormalKnownSigma,
    NormalPrior,
    PointMass,
    Prior,
    check_compatible,
    posterior_tail_curve,
    posterior_tail_scalar,
    validate_observation,
)
from .numerics import GridSpec, binomial_tail, bisect, std_normal_cdf, std_normal_quantile


class MonotonicityError(RuntimeError):
    """The rejection region is not an upper set in the observation."""


@dataclass(frozen=True)
class Hypothesis:
    """One-sided hypothesis geometry: boundary theta0 and cost ratio kappa.

    The rejection threshold tau = kappa / (1 + kappa) is derived, never stored.
    """

    theta0: float
    kappa: float

    def __post_init__(self) -> None:
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be positive and finite, got {self.kappa}")

    @property
    def tau(self) -> float:
        return self.kappa / (1.0 + self.kappa)

    @staticmethod
    def from_tau(theta0: float, tau: float) -> "Hypothesis":
        if not 0.0 < tau < 1.0:
            raise ValueError(f"tau must lie in (0,1), got {tau}")
        return Hypothesis(theta0, tau / (1.0 - tau))


@dataclass(frozen=True)
class Decision:
    reject: bool
    threshold_used: float
    posterior_prob_null: float
    weight_used: float


# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------


def _check_w(w: float) -> None:
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"borrowing weight must lie in [0,1], got {w}")


@dataclass(frozen=True)
class FrequentistDecision:
    kind: ClassVar[str] = "fd"
    hyp: Hypothesis
    model: EndpointModel
    vague: Prior


@dataclass(frozen=True)
class BayesDecision:
    kind: ClassVar[str] = "bd"
    hyp: Hypothesis
    model: EndpointModel
    analysis_prior: Prior


@dataclass(frozen=True)
class CompromiseDecision:
    kind: ClassVar[str] = "cd"
    hyp: Hypothesis
    model: EndpointModel
    vague: Prior
    w: float
    tau_pi_value: float
    n: int

    def __post_init__(self) -> None:
        _check_w(self.w)

    @property
    def threshold(self) -> float:
        return cd_threshold(self.w, self.hyp.tau, self.tau_pi_value)


@dataclass(frozen=True)
class AdaptiveCompromiseDecision:
    kind: ClassVar[str] = "cd_adapt"
    hyp: Hypothesis
    model: EndpointModel
    vague: Prior
    informative: Prior
    tau_pi_value: float
    n: int
    tau_bound: float = 0.15

    def __post_init__(self) -> None:
        if not 0.0 < self.tau_bound < 1.0:
            raise ValueError(f"tau_bound must lie in (0,1), got {self.tau_bound}")


@dataclass(frozen=True)
class RobustMixtureDecision:
    kind: ClassVar[str] = "rmd"
    hyp: Hypothesis
    model: EndpointModel
    w: float
    robust: Prior
    informative: Prior

    def __post_init__(self) -> None:
        _check_w(self.w)

    @property
    def prior(self) -> MixturePrior:
        return MixturePrior((self.robust, self.informative), (1.0 - self.w, self.w))


@dataclass(frozen=True)
class TypeIRestrictedBayes:
    kind: ClassVar[str] = "ti_rbd"
    hyp: Hypothesis
    model: EndpointModel
    w: float
    informative: Prior

    def __post_init__(self) -> None:
        _check_w(self.w)

    @property
    def prior(self) -> MixturePrior:
        return MixturePrior(
            (PointMass(self.hyp.theta0), self.informative), (1.0 - self.w, self.w)
        )


DecisionRule = Union[
    FrequentistDecision,
    BayesDecision,
    CompromiseDecision,
    AdaptiveCompromiseDecision,
    RobustMixtureDecision,
    TypeIRestrictedBayes,
]


def analysis_prior(rule: DecisionRule) -> Prior:
    """The prior under which the rule evaluates its posterior null probability."""
    if isinstance(rule, (FrequentistDecision, CompromiseDecision, AdaptiveCompromiseDecision)):
        return rule.vague
    if isinstance(rule, BayesDecision):
        return rule.analysis_prior
    return rule.prior


# ---------------------------------------------------------------------------
# thresholds and weights
# ---------------------------------------------------------------------------


@lru_cache(maxsize=16384)
def tau_pi(informative: Prior, model: EndpointModel, n: int, hyp: Hypothesis) -> float:
    """Type I error rate the Bayes decision under ``informative`` induces at theta0.

    Normal endpoint: closed form 1 - Phi(z_pi) with

        z_pi = sigma (theta0 - mu) / (sqrt(n) sd^2)
               + z_{1-tau} sqrt(1 + sigma^2 / (n sd^2)).

    Binomial endpoint: the exact discrete level, i.e. the binomial tail at the
    smallest success count whose posterior null probability drops below tau.
    """
    check_compatible(informative, model)
    if not isinstance(informative, (NormalPrior, BetaPrior)):
        raise ValueError("tau_pi requires a non-degenerate normal or beta informative prior")
    tau = hyp.tau
    if isinstance(model, NormalKnownSigma):
        sig, sd = model.sigma, informative.sd
        z_pi = sig * (hyp.theta0 - informative.mean) / (math.sqrt(n) * sd**2)
        z_pi += std_normal_quantile(1.0 - tau) * math.sqrt(1.0 + sig**2 / (n * sd**2))
        return 1.0 - std_normal_cdf(z_pi)
    ys = np.arange(n + 1)
    p_null = 1.0 - posterior_tail_curve(informative, model, ys, n, hyp.theta0)
    rejecting = np.nonzero(p_null < tau)[0]
    y_star = int(rejecting[0]) if rejecting.size else n + 1
    return binomial_tail(y_star, n, hyp.theta0)


def cd_threshold(w: float, tau: float, tau_pi_value: float) -> float:
    """Compromise threshold (1-w) tau + w tau_pi."""
    return (1.0 - w) * tau + w * tau_pi_value


def _prior_pseudo_count(informative: BetaPrior) -> float:
    # Beta(1 + a_hist, 1 + b_hist) encodes a_hist + b_hist pseudo-observations.
    return informative.a + informative.b - 2.0


def adaptive_weight(
    informative: Prior, model: EndpointModel, obs, n: int, theta0: float
) -> float:
    """Agreement weight 1 - |P_pi(theta > theta0 | y) - P_pistar(theta > theta0 | y)|.

    The reference analysis recenters the informative prior at the observed
    data: for a normal endpoint the prior becomes N(ybar, sd_pi); for a
    binomial endpoint the reference posterior is evaluated directly as
    Beta(1 + y(1 + n0/n), 1 + n + n0 - y(1 + n0/n)) with n0 the informative
    prior's pseudo-observation count.
    """
    check_compatible(informative, model)
    validate_observation(model, obs, n)
    if not isinstance(informative, (NormalPrior, BetaPrior)):
        raise ValueError("adaptive weight requires a non-degenerate informative prior")
    return float(_adaptive_weight_curve(informative, model, np.asarray([obs], float), n, theta0)[0])


def _adaptive_weight_curve(informative, model, obs, n, theta0):
    obs = np.asarray(obs, dtype=float)
    t_pi = posterior_tail_curve(informative, model, obs, n, theta0)
    if isinstance(model, NormalKnownSigma):
        prec = 1.0 / informative.sd**2 + n / model.sigma**2
        t_star = ndtr((obs - theta0) * math.sqrt(prec))
    else:
        n0 = _prior_pseudo_count(informative)
        a_star = 1.0 + obs * (1.0 + n0 / n)
        b_star = 1.0 + n + n0 - obs * (1.0 + n0 / n)
        t_star = 1.0 - betainc(a_star, b_star, theta0)
    return np.clip(1.0 - np.abs(t_pi - t_star), 0.0, 1.0)


def _adaptive_weight_scalar(informative, model, y: float, n: int, theta0: float) -> float:
    t_pi = posterior_tail_scalar(informative, model, y, n, theta0)
    if isinstance(model, NormalKnownSigma):
        prec = 1.0 / informative.sd**2 + n / model.sigma**2
        t_star = 0.5 * math.erfc(-((y - theta0) * math.sqrt(prec)) / math.sqrt(2.0))
    else:
        n0 = _prior_pseudo_count(informative)
        a_star = 1.0 + y * (1.0 + n0 / n)
        b_star = 1.0 + n + n0 - y * (1.0 + n0 / n)
        t_star = 1.0 - float(betainc(a_star, b_star, theta0))
    return min(max(1.0 - abs(t_pi - t_star), 0.0), 1.0)


# ---------------------------------------------------------------------------
# factories (tau_pi is n-dependent, so CD rules are built per sample size)
# ---------------------------------------------------------------------------


def make_cd(
    hyp: Hypothesis,
    model: EndpointModel,
    vague: Prior,
    informative: Prior,
    w: float,
    n: int,
) -> CompromiseDecision:
    return CompromiseDecision(hyp, model, vague, w, tau_pi(informative, model, n, hyp), n)


def make_cd_adapt(
    hyp: Hypothesis,
    model: EndpointModel,
    vague: Prior,
    informative: Prior,
    n: int,
    tau_bound: float = 0.15,
) -> AdaptiveCompromiseDecision:
    return AdaptiveCompromiseDecision(
        hyp, model, vague, informative, tau_pi(informative, model, n, hyp), n, tau_bound
    )


# ---------------------------------------------------------------------------
# deciding
# ---------------------------------------------------------------------------


def _check_rule_n(rule: DecisionRule, n: int) -> None:
    if isinstance(rule, (CompromiseDecision, AdaptiveCompromiseDecision)) and n != rule.n:
        raise ValueError(
            f"{rule.kind} rule caches tau_pi for n={rule.n}; rebuild it for n={n}"
        )


def decide(rule: DecisionRule, obs, n: int) -> Decision:
    """Evaluate the rule on one observation: reject iff P(null | obs) < threshold."""
    validate_observation(rule.model, obs, n)
    _check_rule_n(rule, n)
    prior = analysis_prior(rule)
    p_null = 1.0 - posterior_tail_scalar(prior, rule.model, float(obs), n, rule.hyp.theta0)
    tau = rule.hyp.tau
    if isinstance(rule, FrequentistDecision):
        thr, weight = tau, 0.0
    elif isinstance(rule, BayesDecision):
        thr, weight = tau, 1.0
    elif isinstance(rule, CompromiseDecision):
        thr, weight = rule.threshold, rule.w
    elif isinstance(rule, AdaptiveCompromiseDecision):
        w_hat = _adaptive_weight_scalar(rule.informative, rule.model, float(obs), n, rule.hyp.theta0)
        thr, weight = min(cd_threshold(w_hat, tau, rule.tau_pi_value), rule.tau_bound), w_hat
    else:  # RMD, TI-RBD
        thr, weight = tau, rule.w
    return Decision(p_null < thr, thr, p_null, weight)


def _margin_curve(rule: DecisionRule, obs, n: int) -> np.ndarray:
    """posterior_prob_null - threshold on an observation batch (reject where < 0)."""
    obs = np.asarray(obs, dtype=float)
    p_null = 1.0 - posterior_tail_curve(analysis_prior(rule), rule.model, obs, n, rule.hyp.theta0)
    tau = rule.hyp.tau
    if isinstance(rule, AdaptiveCompromiseDecision):
        w_hat = _adaptive_weight_curve(rule.informative, rule.model, obs, n, rule.hyp.theta0)
        thr = np.minimum(cd_threshold(w_hat, tau, rule.tau_pi_value), rule.tau_bound)
    elif isinstance(rule, CompromiseDecision):
        thr = rule.threshold
    else:
        thr = tau
    return p_null - thr


def _margin_scalar(rule: DecisionRule, y: float, n: int) -> float:
    p_null = 1.0 - posterior_tail_scalar(analysis_prior(rule), rule.model, y, n, rule.hyp.theta0)
    tau = rule.hyp.tau
    if isinstance(rule, AdaptiveCompromiseDecision):
        w_hat = _adaptive_weight_scalar(rule.informative, rule.model, y, n, rule.hyp.theta0)
        thr = min(cd_threshold(w_hat, tau, rule.tau_pi_value), rule.tau_bound)
    elif isinstance(rule, CompromiseDecision):
        thr = rule.threshold
    else:
        thr = tau
    return p_null - thr


def decide_batch(rule: DecisionRule, obs, n: int) -> np.ndarray:
    """Vectorized reject flags for a batch of observations (Monte-Carlo checks)."""
    _check_rule_n(rule, n)
    return _margin_curve(rule, obs, n) < 0.0


# ---------------------------------------------------------------------------
# rejection geometry
# ---------------------------------------------------------------------------


@lru_cache(maxsize=16384)
def _rejection_set_cached(rule: DecisionRule, n: int) -> tuple:
    margins = _margin_curve(rule, np.arange(n + 1), n)
    return tuple(np.nonzero(margins < 0.0)[0].tolist())


def rejection_set(rule: DecisionRule, n: int) -> np.ndarray:
    """All success counts y in 0..n the rule rejects at (binomial only)."""
    if not isinstance(rule.model, Binomial):
        raise TypeError("rejection_set is defined for binomial endpoints only")
    _check_rule_n(rule, n)
    return np.asarray(_rejection_set_cached(rule, n), dtype=int)


def _single_normal_critical(prior: NormalPrior, model: NormalKnownSigma, n: int,
                            theta0: float, thr: float) -> float:
    """Closed-form rejection boundary for a single normal analysis prior."""
    if thr <= 0.0:
        return math.inf
    if thr >= 1.0:
        return -math.inf
    prec = 1.0 / prior.sd**2 + n / model.sigma**2
    m_star = theta0 - ndtri(thr) / math.sqrt(prec)
    return (m_star * prec - prior.mean / prior.sd**2) * model.sigma**2 / n


_MAX_EXPANSIONS = 64
_SCAN_POINTS = 513


@lru_cache(maxsize=65536)
def critical_value(rule: DecisionRule, n: int):
    """Smallest rejecting observation: a sample-mean boundary (normal endpoint,
    -inf/+inf when the rule always/never rejects) or an integer success count
    (binomial endpoint, n+1 when no rejection is possible).

    Raises MonotonicityError when the rejection region is not an upper set;
    callers fall back to indicator integration in that case.
    """
    _check_rule_n(rule, n)
    if isinstance(rule.model, Binomial):
        margins = _margin_curve(rule, np.arange(n + 1), n)
        rej = margins < 0.0
        flips = int(np.count_nonzero(np.diff(rej.astype(np.int8))))
        if flips > 1 or (flips == 1 and rej[0]):
            raise MonotonicityError(f"{rule.kind} rejection set is not an upper set at n={n}")
        if not rej.any():
            return n + 1
        return int(np.argmax(rej))

    prior = analysis_prior(rule)
    thr = _fixed_threshold(rule)
    if isinstance(prior, NormalPrior) and thr is not None:
        return _single_normal_critical(prior, rule.model, n, rule.hyp.theta0, thr)

    se = rule.model.sigma / math.sqrt(n)
    theta0 = rule.hyp.theta0
    comps = prior.components if isinstance(prior, MixturePrior) else (prior,)
    anchors = [theta0]
    if thr is not None:
        for comp in comps:  # component-wise boundaries bracket the mixture boundary
            if isinstance(comp, NormalPrior):
                c = _single_normal_critical(comp, rule.model, n, theta0, thr)
                if math.isfinite(c):
                    anchors.append(c)
    pad = 16.0 * se
    lo, hi = min(anchors) - pad, max(anchors) + pad
    for _ in range(_MAX_EXPANSIONS):
        if _margin_scalar(rule, lo, n) >= 0.0:
            break
        lo -= (hi - lo)
    else:
        return -math.inf
    for _ in range(_MAX_EXPANSIONS):
        if _margin_scalar(rule, hi, n) < 0.0:
            break
        hi += (hi - lo)
    else:
        return math.inf
    ys = np.linspace(lo, hi, _SCAN_POINTS)
    rej = _margin_curve(rule, ys, n) < 0.0
    flips = int(np.count_nonzero(np.diff(rej.astype(np.int8))))
    if flips != 1 or rej[0]:
        raise MonotonicityError(
            f"{rule.kind} rejection region flips {flips} times on the scan grid at n={n}"
        )
    idx = int(np.argmax(rej))
    return bisect(lambda y: _margin_scalar(rule, y, n), ys[idx - 1], ys[idx], tol=1e-12 * max(se, 1.0))


def _fixed_threshold(rule: DecisionRule):
    """The rule's data-independent threshold, or None for CD-Adapt."""
    if isinstance(rule, AdaptiveCompromiseDecision):
        return None
    if isinstance(rule, CompromiseDecision):
        return rule.threshold
    return rule.hyp.tau


def rejection_intervals(
    rule: DecisionRule, n: int, lo: float, hi: float, grid: GridSpec = GridSpec()
) -> list:
    """Rejection region of a normal-endpoint rule on [lo, hi], as intervals.

    The margin sign is scanned on a grid of ``grid.resolution`` points per
    standard error; each sign flip is then sharpened by bisection. A rejecting
    window edge is treated as an interval reaching to +/- infinity (the
    omitted tail mass is negligible for any query at least ``grid.span``
    standard errors inside the window).
    """
    if not isinstance(rule.model, NormalKnownSigma):
        raise TypeError("rejection_intervals is defined for normal endpoints only")
    _check_rule_n(rule, n)
    se = rule.model.sigma / math.sqrt(n)
    count = max(int(math.ceil((hi - lo) / se * grid.resolution)) + 1, 2)
    ys = np.linspace(lo, hi, count)
    rej = _margin_curve(rule, ys, n) < 0.0
    edges = np.nonzero(np.diff(rej.astype(np.int8)))[0]
    tol = 1e-12 * max(se, 1.0)
    crossings = [
        bisect(lambda y: _margin_scalar(rule, y, n), ys[i], ys[i + 1], tol=tol) for i in edges
    ]
    intervals = []
    start = -math.inf if rej[0] else None
    for x, i in zip(crossings, edges):
        if rej[i + 1] and not rej[i]:
            start = x
        else:
            intervals.append((start, x))
            start = None
    if rej[-1]:
        intervals.append((start, math.inf))
    return intervals

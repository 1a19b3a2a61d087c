"""Prior/posterior algebra: conjugate updates, marginals, mixtures, tails.

Priors form a small tagged union (normal, beta, point mass, finite mixture)
shared by both endpoint models. The three operations that everything else is
built on are :func:`posterior`, :func:`marginal_likelihood`, and
:func:`posterior_prob_gt`; each has a vectorized counterpart over a batch of
observations, used by the rejection-region scans in :mod:`borrowkit.decisions`.

Mixture posterior weights are formed in log space so that very dispersed
components (whose marginal likelihoods can underflow) stay numerically sound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import betainc, betaln, gammaln, logsumexp, ndtr

from .numerics import log_binom_pmf

_WEIGHT_TOL = 1e-12


# ---------------------------------------------------------------------------
# priors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalPrior:
    mean: float
    sd: float

    def __post_init__(self) -> None:
        if not (self.sd > 0 and math.isfinite(self.sd)):
            raise ValueError(f"normal prior sd must be positive and finite, got {self.sd}")
        if not math.isfinite(self.mean):
            raise ValueError("normal prior mean must be finite")


@dataclass(frozen=True)
class BetaPrior:
    a: float
    b: float

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"beta prior parameters must be positive, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class PointMass:
    location: float


@dataclass(frozen=True)
class MixturePrior:
    components: tuple
    weights: tuple

    def __init__(self, components, weights):
        flat_c: list = []
        flat_w: list = []
        for comp, wt in zip(components, weights, strict=True):
            if wt < 0:
                raise ValueError(f"mixture weight must be nonnegative, got {wt}")
            if isinstance(comp, MixturePrior):  # nested mixtures flatten on construction
                for c2, w2 in zip(comp.components, comp.weights):
                    flat_c.append(c2)
                    flat_w.append(wt * w2)
            else:
                flat_c.append(comp)
                flat_w.append(float(wt))
        total = math.fsum(flat_w)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"mixture weights must sum to 1 within {_WEIGHT_TOL}, got {total!r}")
        object.__setattr__(self, "components", tuple(flat_c))
        object.__setattr__(self, "weights", tuple(w / total for w in flat_w))


Prior = Union[NormalPrior, BetaPrior, PointMass, MixturePrior]


# ---------------------------------------------------------------------------
# endpoint models and observations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalKnownSigma:
    """Sample mean of n observations from N(theta, sigma), sigma known."""

    sigma: float

    def __post_init__(self) -> None:
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")


@dataclass(frozen=True)
class Binomial:
    """Number of successes in n Bernoulli(theta) trials."""


EndpointModel = Union[NormalKnownSigma, Binomial]


def check_compatible(prior: Prior, model: EndpointModel) -> None:
    """Raise TypeError unless the prior lives on the model's parameter space."""
    if isinstance(prior, MixturePrior):
        for comp in prior.components:
            check_compatible(comp, model)
        return
    if isinstance(prior, PointMass):
        if isinstance(model, Binomial) and not 0.0 <= prior.location <= 1.0:
            raise TypeError(f"point mass at {prior.location} outside [0,1] for a binomial model")
        return
    if isinstance(model, NormalKnownSigma) and not isinstance(prior, NormalPrior):
        raise TypeError(f"{type(prior).__name__} prior is incompatible with a normal model")
    if isinstance(model, Binomial) and not isinstance(prior, BetaPrior):
        raise TypeError(f"{type(prior).__name__} prior is incompatible with a binomial model")


def default_vague_prior(model: EndpointModel) -> Prior:
    """The operational no-information prior: N(0, 100) for the normal endpoint,
    Beta(0.001, 1) for the binomial one. Both make the posterior probability of
    the alternative track the one-sided p-value closely."""
    if isinstance(model, NormalKnownSigma):
        return NormalPrior(0.0, 100.0)
    return BetaPrior(0.001, 1.0)


def validate_observation(model: EndpointModel, obs, n: int) -> None:
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    if isinstance(model, NormalKnownSigma):
        if not math.isfinite(float(obs)):
            raise ValueError(f"sample mean must be finite, got {obs}")
    else:
        if float(obs) != int(obs):
            raise ValueError(f"binomial observation must be an integer, got {obs}")
        if not 0 <= int(obs) <= n:
            raise ValueError(f"binomial observation must lie in [0, {n}], got {obs}")


# ---------------------------------------------------------------------------
# core operations (vectorized over observations, scalar wrappers below)
# ---------------------------------------------------------------------------


def log_marginal_curve(prior: Prior, model: EndpointModel, obs, n: int) -> np.ndarray:
    """log marginal likelihood of each observation in ``obs`` under the prior."""
    obs = np.asarray(obs, dtype=float)
    if isinstance(prior, MixturePrior):
        parts = [log_marginal_curve(c, model, obs, n) for c in prior.components]
        with np.errstate(divide="ignore"):
            logw = np.log(np.asarray(prior.weights))
        return logsumexp(np.stack(parts, axis=0) + logw[:, None], axis=0)
    if isinstance(model, NormalKnownSigma):
        se2 = model.sigma**2 / n
        if isinstance(prior, NormalPrior):
            var = prior.sd**2 + se2
            mu = prior.mean
        else:  # point mass
            var = se2
            mu = prior.location
        return -0.5 * ((obs - mu) ** 2 / var + math.log(2.0 * math.pi * var))
    # binomial
    if isinstance(prior, BetaPrior):
        logc = gammaln(n + 1) - gammaln(obs + 1) - gammaln(n - obs + 1)
        return logc + betaln(prior.a + obs, prior.b + n - obs) - betaln(prior.a, prior.b)
    return log_binom_pmf(obs, n, prior.location)


def _mixture_log_posterior_weights(prior: MixturePrior, model, obs, n) -> np.ndarray:
    obs = np.asarray(obs, dtype=float)
    with np.errstate(divide="ignore"):
        logw = np.log(np.asarray(prior.weights))
    lm = np.stack([log_marginal_curve(c, model, obs, n) for c in prior.components], axis=0)
    joint = logw[:, None] + lm
    return joint - logsumexp(joint, axis=0, keepdims=True)


def posterior_tail_curve(prior: Prior, model: EndpointModel, obs, n: int, theta0: float) -> np.ndarray:
    """P(theta > theta0 | obs) for each observation in ``obs``."""
    obs = np.asarray(obs, dtype=float)
    if isinstance(prior, MixturePrior):
        logpw = _mixture_log_posterior_weights(prior, model, obs, n)
        tails = np.stack(
            [posterior_tail_curve(c, model, obs, n, theta0) for c in prior.components], axis=0
        )
        return np.einsum("co,co->o", np.exp(logpw), tails)
    if isinstance(prior, PointMass):
        tail = 1.0 if prior.location > theta0 else 0.0
        return np.full_like(obs, tail)
    if isinstance(model, NormalKnownSigma):
        prec = 1.0 / prior.sd**2 + n / model.sigma**2
        m = (prior.mean / prior.sd**2 + n * obs / model.sigma**2) / prec
        return ndtr((m - theta0) * math.sqrt(prec))
    return 1.0 - betainc(prior.a + obs, prior.b + n - obs, theta0)


def posterior(prior: Prior, model: EndpointModel, obs, n: int) -> Prior:
    """Conjugate posterior after observing ``obs`` from n samples."""
    check_compatible(prior, model)
    validate_observation(model, obs, n)
    return _posterior_unchecked(prior, model, obs, n)


def _posterior_unchecked(prior, model, obs, n):
    if isinstance(prior, PointMass):
        return prior
    if isinstance(prior, MixturePrior):
        logpw = _mixture_log_posterior_weights(prior, model, np.asarray([obs], dtype=float), n)[:, 0]
        comps = tuple(_posterior_unchecked(c, model, obs, n) for c in prior.components)
        w = np.exp(logpw)
        return MixturePrior(comps, tuple(w / w.sum()))
    if isinstance(model, NormalKnownSigma):
        prec = 1.0 / prior.sd**2 + n / model.sigma**2
        m = (prior.mean / prior.sd**2 + n * float(obs) / model.sigma**2) / prec
        return NormalPrior(m, prec**-0.5)
    y = int(obs)
    return BetaPrior(prior.a + y, prior.b + n - y)


def marginal_likelihood(prior: Prior, model: EndpointModel, obs, n: int) -> float:
    """Density (normal) or pmf (binomial) of ``obs`` marginalized over the prior."""
    check_compatible(prior, model)
    validate_observation(model, obs, n)
    return float(np.exp(log_marginal_curve(prior, model, np.asarray([obs], dtype=float), n)[0]))


def posterior_prob_gt(prior: Prior, model: EndpointModel, obs, n: int, theta0: float) -> float:
    """Posterior probability P(theta > theta0 | obs)."""
    check_compatible(prior, model)
    validate_observation(model, obs, n)
    return float(posterior_tail_curve(prior, model, np.asarray([obs], dtype=float), n, theta0)[0])


# ---------------------------------------------------------------------------
# scalar fast paths (pure math module; exercised heavily by bisection loops)
# ---------------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)


def _phi(z: float) -> float:
    return 0.5 * math.erfc(-z / _SQRT2)


def log_marginal_scalar(prior: Prior, model: EndpointModel, obs: float, n: int) -> float:
    """Scalar counterpart of :func:`log_marginal_curve`."""
    if isinstance(prior, MixturePrior):
        logs = [
            (math.log(w) + log_marginal_scalar(c, model, obs, n)) if w > 0.0 else -math.inf
            for c, w in zip(prior.components, prior.weights)
        ]
        top = max(logs)
        if top == -math.inf:
            return -math.inf
        return top + math.log(math.fsum(math.exp(v - top) for v in logs))
    if isinstance(model, NormalKnownSigma):
        se2 = model.sigma**2 / n
        if isinstance(prior, NormalPrior):
            var, mu = prior.sd**2 + se2, prior.mean
        else:
            var, mu = se2, prior.location
        d = obs - mu
        return -0.5 * (d * d / var + math.log(2.0 * math.pi * var))
    if isinstance(prior, BetaPrior):
        return float(
            gammaln(n + 1)
            - gammaln(obs + 1)
            - gammaln(n - obs + 1)
            + betaln(prior.a + obs, prior.b + n - obs)
            - betaln(prior.a, prior.b)
        )
    return float(log_binom_pmf(np.asarray(obs, dtype=float), n, prior.location))


def posterior_tail_scalar(
    prior: Prior, model: EndpointModel, obs: float, n: int, theta0: float
) -> float:
    """Scalar counterpart of :func:`posterior_tail_curve`."""
    if isinstance(prior, MixturePrior):
        logs = []
        tails = []
        for c, w in zip(prior.components, prior.weights):
            if w <= 0.0:
                continue
            logs.append(math.log(w) + log_marginal_scalar(c, model, obs, n))
            tails.append(posterior_tail_scalar(c, model, obs, n, theta0))
        top = max(logs)
        if top == -math.inf:
            raise ValueError("observation has zero marginal probability under the mixture")
        ws = [math.exp(v - top) for v in logs]
        return math.fsum(w * t for w, t in zip(ws, tails)) / math.fsum(ws)
    if isinstance(prior, PointMass):
        return 1.0 if prior.location > theta0 else 0.0
    if isinstance(model, NormalKnownSigma):
        prec = 1.0 / prior.sd**2 + n / model.sigma**2
        m = (prior.mean / prior.sd**2 + n * obs / model.sigma**2) / prec
        return _phi((m - theta0) * math.sqrt(prec))
    return 1.0 - float(betainc(prior.a + obs, prior.b + n - obs, theta0))


# ---------------------------------------------------------------------------
# densities, cdfs, moments (sampling priors and test oracles)
# ---------------------------------------------------------------------------


def prior_pdf(prior: Prior, theta) -> np.ndarray:
    """Density of the prior at ``theta``; point masses have no density."""
    theta = np.asarray(theta, dtype=float)
    if isinstance(prior, NormalPrior):
        z = (theta - prior.mean) / prior.sd
        return np.exp(-0.5 * z * z) / (prior.sd * math.sqrt(2 * math.pi))
    if isinstance(prior, BetaPrior):
        with np.errstate(divide="ignore", invalid="ignore"):
            logp = (
                (prior.a - 1) * np.log(theta)
                + (prior.b - 1) * np.log1p(-theta)
                - betaln(prior.a, prior.b)
            )
        return np.where((theta >= 0) & (theta <= 1), np.exp(logp), 0.0)
    if isinstance(prior, MixturePrior):
        return sum(w * prior_pdf(c, theta) for c, w in zip(prior.components, prior.weights))
    raise TypeError(f"{type(prior).__name__} has no density")


def prior_cdf(prior: Prior, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if isinstance(prior, NormalPrior):
        return ndtr((x - prior.mean) / prior.sd)
    if isinstance(prior, BetaPrior):
        return betainc(prior.a, prior.b, np.clip(x, 0.0, 1.0))
    if isinstance(prior, PointMass):
        return (x >= prior.location).astype(float)
    return sum(w * prior_cdf(c, x) for c, w in zip(prior.components, prior.weights))


def prior_mean(prior: Prior) -> float:
    if isinstance(prior, NormalPrior):
        return prior.mean
    if isinstance(prior, BetaPrior):
        return prior.a / (prior.a + prior.b)
    if isinstance(prior, PointMass):
        return prior.location
    return float(sum(w * prior_mean(c) for c, w in zip(prior.components, prior.weights)))


def prior_sd(prior: Prior) -> float:
    if isinstance(prior, NormalPrior):
        return prior.sd
    if isinstance(prior, BetaPrior):
        ab = prior.a + prior.b
        return math.sqrt(prior.a * prior.b / (ab * ab * (ab + 1.0)))
    if isinstance(prior, PointMass):
        return 0.0
    m = prior_mean(prior)
    second = sum(
        w * (prior_sd(c) ** 2 + prior_mean(c) ** 2)
        for c, w in zip(prior.components, prior.weights)
    )
    return math.sqrt(max(second - m * m, 0.0))


# ---------------------------------------------------------------------------
# serialization (scenario config schema)
# ---------------------------------------------------------------------------


def prior_to_dict(prior: Prior) -> dict:
    if isinstance(prior, NormalPrior):
        return {"type": "normal", "mean": prior.mean, "sd": prior.sd}
    if isinstance(prior, BetaPrior):
        return {"type": "beta", "a": prior.a, "b": prior.b}
    if isinstance(prior, PointMass):
        return {"type": "pointmass", "location": prior.location}
    return {
        "type": "mixture",
        "components": [prior_to_dict(c) for c in prior.components],
        "weights": list(prior.weights),
    }


def prior_from_dict(spec: dict, where: str = "prior") -> Prior:
    if not isinstance(spec, dict):
        raise ValueError(f"{where}: expected an object, got {type(spec).__name__}")
    kind = spec.get("type")
    allowed = {
        "normal": {"type", "mean", "sd"},
        "beta": {"type", "a", "b"},
        "pointmass": {"type", "location"},
        "mixture": {"type", "components", "weights"},
    }
    if kind not in allowed:
        raise ValueError(f"{where}: unknown prior type {kind!r}")
    unknown = set(spec) - allowed[kind]
    if unknown:
        raise ValueError(f"{where}: unknown key {sorted(unknown)[0]!r}")
    try:
        if kind == "normal":
            return NormalPrior(float(spec["mean"]), float(spec["sd"]))
        if kind == "beta":
            return BetaPrior(float(spec["a"]), float(spec["b"]))
        if kind == "pointmass":
            return PointMass(float(spec["location"]))
        comps = [
            prior_from_dict(c, f"{where}.components[{i}]")
            for i, c in enumerate(spec["components"])
        ]
        return MixturePrior(tuple(comps), tuple(float(w) for w in spec["weights"]))
    except KeyError as exc:
        raise ValueError(f"{where}: missing key {exc.args[0]!r}") from None

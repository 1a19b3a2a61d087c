"""Scenario orchestration: sample-size search, weight and sensitivity sweeps.

A :class:`Scenario` bundles the endpoint model, hypothesis, priors, rule
descriptors, sampling prior, and the grids a study design sweeps over. The
sweep functions below produce the flat row sets behind every figure-style
table; they are pure, and rows are emitted in deterministic grid order.

Compromise rules cache a tau_pi that depends on n, so every sweep rebuilds
its rules per sample size through :func:`build_rule`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .decisions import (
    BayesDecision,
    DecisionRule,
    FrequentistDecision,
    Hypothesis,
    MonotonicityError,
    RobustMixtureDecision,
    TypeIRestrictedBayes,
    make_cd,
    make_cd_adapt,
    tau_pi,
)
from .distributions import (
    BetaPrior,
    Binomial,
    EndpointModel,
    NormalKnownSigma,
    NormalPrior,
    Prior,
    prior_sd,
)
from .oc import (
    DegenerateScenarioError,
    SamplingPrior,
    compute_report,
    expected_power,
    integrated_risk,
    type_one_error,
)

RULE_KINDS = ("fd", "bd", "cd", "cd_adapt", "rmd", "ti_rbd")
WEIGHTED_KINDS = ("cd", "rmd", "ti_rbd")


@dataclass(frozen=True)
class RuleSpec:
    """Declarative rule descriptor; concrete rules are built per sample size."""

    kind: str
    label: str | None = None
    w: float | None = None
    robust: Prior | None = None
    tau_bound: float = 0.15

    def __post_init__(self) -> None:
        if self.kind not in RULE_KINDS:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.kind == "rmd" and self.robust is None:
            raise ValueError("rmd rules need a robust mixture component")

    @property
    def name(self) -> str:
        return self.label if self.label else self.kind


@dataclass(frozen=True)
class Scenario:
    model: EndpointModel
    hypothesis: Hypothesis
    informative: Prior
    vague: Prior
    rules: tuple
    sampling: SamplingPrior
    n_values: tuple
    w_grid: tuple
    sampling_mean_grid: tuple | None = None  # normal endpoint sensitivity grid
    a_s_grid: tuple | None = None  # binomial endpoint sensitivity grid
    target_expected_power: float = 0.8
    n_max: int = 250

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ValueError("n_values must be a nonempty tuple of sample sizes >= 1")
        for name in ("n_values", "w_grid", "sampling_mean_grid", "a_s_grid"):
            grid = getattr(self, name)
            if grid is not None and list(grid) != sorted(grid):
                raise ValueError(f"{name} must be sorted")
        if not self.w_grid:
            raise ValueError("w_grid must be nonempty")
        if not 0.0 < self.target_expected_power < 1.0:
            raise ValueError("target expected power must lie in (0,1)")


def build_rule(scenario: Scenario, spec: RuleSpec, n: int, w: float | None = None) -> DecisionRule:
    """Instantiate a rule descriptor at sample size n, optionally overriding w."""
    hyp, model = scenario.hypothesis, scenario.model
    eff_w = spec.w if w is None else w
    if eff_w is None:
        eff_w = 0.5
    if spec.kind == "fd":
        return FrequentistDecision(hyp, model, scenario.vague)
    if spec.kind == "bd":
        return BayesDecision(hyp, model, scenario.informative)
    if spec.kind == "cd":
        return make_cd(hyp, model, scenario.vague, scenario.informative, eff_w, n)
    if spec.kind == "cd_adapt":
        return make_cd_adapt(hyp, model, scenario.vague, scenario.informative, n, spec.tau_bound)
    if spec.kind == "rmd":
        return RobustMixtureDecision(hyp, model, eff_w, spec.robust, scenario.informative)
    return TypeIRestrictedBayes(hyp, model, eff_w, scenario.informative)


# ---------------------------------------------------------------------------
# sample-size search
# ---------------------------------------------------------------------------


def min_sample_size(
    rule_family: Callable[[int], DecisionRule],
    sampling: SamplingPrior,
    target: float,
    n_max: int,
    theta0: float,
) -> int | None:
    """Smallest n whose expected power reaches ``target`` and stays there.

    For discrete endpoints expected power is a sawtooth in n (it drops each
    time the critical success count steps up), so the first crossing of the
    target can be followed by dips back below it. The returned n is the
    smallest sample size with expected power >= target for every n' in
    [n, n_max]; the scan therefore walks downward from n_max and stops at the
    first failure. Returns None when even n_max misses the target.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target expected power must lie in (0,1), got {target}")
    for n in range(n_max, 0, -1):
        if expected_power(rule_family(n), sampling, n, theta0) < target:
            return None if n == n_max else n + 1
    return 1


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    rule: str
    w: float | None = None
    n: int | None = None
    sampling_mean: float | None = None
    type_one_error: float | None = None
    expected_power: float | None = None
    integrated_risk: float | None = None
    rsl: float | None = None
    min_n: int | None = None


@dataclass(frozen=True)
class SweepResult:
    kind: str
    rows: tuple


def _report_row(scenario, spec, rule, n, w, sampling, mean=None, min_n=None) -> SweepRow:
    rep = compute_report(rule, n, sampling, scenario.informative, scenario.vague, spec.name)
    return SweepRow(
        rule=spec.name,
        w=w,
        n=n,
        sampling_mean=mean,
        type_one_error=rep.type_one_error,
        expected_power=rep.expected_power,
        integrated_risk=rep.integrated_risk,
        rsl=None if math.isnan(rep.rsl) else rep.rsl,
        min_n=min_n,
    )


def sweep_weight(scenario: Scenario) -> SweepResult:
    """Operating characteristics at fixed n over the borrowing-weight grid.

    Rules without a weight (FD, BD, CD-Adapt) are computed once per n and
    replicated across the grid as horizontal reference lines.
    """
    rows = []
    for n in scenario.n_values:
        for spec in scenario.rules:
            if spec.kind in WEIGHTED_KINDS:
                for w in scenario.w_grid:
                    rule = build_rule(scenario, spec, n, w)
                    rows.append(_report_row(scenario, spec, rule, n, w, scenario.sampling))
            else:
                rule = build_rule(scenario, spec, n)
                base = _report_row(scenario, spec, rule, n, None, scenario.sampling)
                rows.extend(replace(base, w=w) for w in scenario.w_grid)
    return SweepResult("weight", tuple(rows))


def _samplesize_row(scenario, spec, w, sampling, mean=None) -> SweepRow:
    theta0 = scenario.hypothesis.theta0
    family = lambda n: build_rule(scenario, spec, n, w)  # noqa: E731
    found = min_sample_size(family, sampling, scenario.target_expected_power, scenario.n_max, theta0)
    n_use = scenario.n_max if found is None else found
    rule = family(n_use)
    return SweepRow(
        rule=spec.name,
        w=w,
        n=n_use,
        sampling_mean=mean,
        type_one_error=type_one_error(rule, n_use),
        expected_power=expected_power(rule, sampling, n_use, theta0),
        min_n=-1 if found is None else found,
    )


def sweep_samplesize(scenario: Scenario) -> SweepResult:
    """Minimum sample size per rule per weight, with the operating
    characteristics achieved at that sample size (n_max if never reached)."""
    rows = []
    for spec in scenario.rules:
        if spec.kind in WEIGHTED_KINDS:
            for w in scenario.w_grid:
                rows.append(_samplesize_row(scenario, spec, w, scenario.sampling))
        else:
            base = _samplesize_row(scenario, spec, None, scenario.sampling)
            rows.extend(replace(base, w=w) for w in scenario.w_grid)
    return SweepResult("samplesize", tuple(rows))


def sensitivity_grid(scenario: Scenario) -> tuple:
    """(sampling prior, sampling mean) pairs for the sensitivity sweep.

    Normal endpoint: the sampling prior mean runs over ``sampling_mean_grid``
    with the informative prior's spread. Binomial endpoint: Beta(1 + a_s,
    1 + b_s) with a_s + b_s fixed at the informative prior's pseudo-count.
    """
    if isinstance(scenario.model, NormalKnownSigma):
        sd = prior_sd(scenario.informative)
        grid = scenario.sampling_mean_grid
        if grid is None:
            mu = scenario.informative.mean
            grid = tuple(np.linspace(mu - 3 * sd, mu + 3 * sd, 21).tolist())
        return tuple((SamplingPrior(NormalPrior(m, sd)), m) for m in grid)
    n0 = scenario.informative.a + scenario.informative.b - 2.0
    grid = scenario.a_s_grid
    if grid is None:
        grid = tuple(float(a) for a in range(2, int(n0) - 1, 2))
    pairs = []
    for a_s in grid:
        dist = BetaPrior(1.0 + a_s, 1.0 + (n0 - a_s))
        pairs.append((SamplingPrior(dist), dist.a / (dist.a + dist.b)))
    return tuple(pairs)


def sweep_sampling_prior(scenario: Scenario) -> SweepResult:
    """Sensitivity sweep over the sampling prior at the rules' own weights.

    Per grid point and rule, emits one sample-size row (min_n plus the
    operating characteristics at that n) and one fixed-n row per scenario
    sample size (full report including integrated risk). Type I error and RSL
    do not depend on the sampling prior, so they are computed once per
    (rule, n) and shared across the grid.
    """
    rows = []
    report_memo: dict = {}
    for sampling, mean in sensitivity_grid(scenario):
        for idx, spec in enumerate(scenario.rules):
            rows.append(_samplesize_row(scenario, spec, spec.w, sampling, mean))
            for n in scenario.n_values:
                key = (idx, n)
                if key not in report_memo:
                    rule = build_rule(scenario, spec, n)
                    rep = compute_report(
                        rule, n, sampling, scenario.informative, scenario.vague, spec.name
                    )
                    report_memo[key] = (rule, rep.type_one_error, rep.rsl)
                rule, tie, rsl_value = report_memo[key]
                rows.append(
                    SweepRow(
                        rule=spec.name,
                        w=spec.w,
                        n=n,
                        sampling_mean=mean,
                        type_one_error=tie,
                        expected_power=expected_power(
                            rule, sampling, n, scenario.hypothesis.theta0
                        ),
                        integrated_risk=integrated_risk(rule, sampling, n, scenario.hypothesis),
                        rsl=None if math.isnan(rsl_value) else rsl_value,
                        min_n=None,
                    )
                )
    return SweepResult("sampling", tuple(rows))


# ---------------------------------------------------------------------------
# weight matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EtaMatch:
    """Result of matching the TI-RBD weight to a target type I error level."""

    eta: float
    achieved_level: float


def match_eta_to_w(
    informative: Prior,
    model: EndpointModel,
    n: int,
    hyp: Hypothesis,
    target_level: float,
    eta_tol: float = 1e-6,
) -> EtaMatch:
    """Smallest TI-RBD weight whose type I error reaches ``target_level``.

    The level is verified to be nondecreasing on a weight grid before the
    bisection. For discrete endpoints the level is a step function of the
    weight, so the achieved level is reported alongside the weight; a target
    of exactly 0 asks for the smallest weight with a nonempty rejection
    region.
    """
    if target_level < 0.0:
        raise ValueError(f"target level must be nonnegative, got {target_level}")

    def level(eta: float) -> float:
        return type_one_error(TypeIRestrictedBayes(hyp, model, eta, informative), n)

    grid = np.linspace(0.0, 1.0, 21)
    levels = [level(e) for e in grid]
    if any(b < a - 1e-9 for a, b in zip(levels, levels[1:])):
        raise MonotonicityError("TI-RBD type I error is not nondecreasing in the weight")
    if target_level > levels[-1] + 1e-12:
        raise ValueError(
            f"target level {target_level} exceeds the full-borrowing level {levels[-1]:.6g}"
        )

    def reached(eta: float) -> bool:
        val = level(eta)
        return val > 0.0 if target_level == 0.0 else val >= target_level

    if reached(0.0):
        return EtaMatch(0.0, levels[0])
    lo, hi = 0.0, 1.0
    while hi - lo > eta_tol:
        mid = 0.5 * (lo + hi)
        if reached(mid):
            hi = mid
        else:
            lo = mid
    return EtaMatch(hi, level(hi))


def cd_adapt_equivalent_w(scenario: Scenario, n: int) -> float:
    """Weight at which the CD's nominal level (1-w) tau + w tau_pi equals
    CD-Adapt's exact type I error, clamped to [0, 1]."""
    tau = scenario.hypothesis.tau
    bound = _cd_adapt_bound(scenario)
    rule = make_cd_adapt(
        scenario.hypothesis, scenario.model, scenario.vague, scenario.informative, n, bound
    )
    if abs(rule.tau_pi_value - tau) < 1e-12:
        raise DegenerateScenarioError("tau_pi equals tau; the compromise family is degenerate")
    level = type_one_error(rule, n)
    return min(max((level - tau) / (rule.tau_pi_value - tau), 0.0), 1.0)


def cd_adapt_match_interval(scenario: Scenario, n: int) -> tuple:
    """Exact range of CD weights reproducing CD-Adapt's rejection region.

    For the binomial endpoint the CD region is a step function of w, so a
    whole interval of weights yields exactly CD-Adapt's operating
    characteristics; the paper-style "equivalent weight" is any point in it.
    For the normal endpoint the interval collapses to the affine inversion.
    """
    from .decisions import rejection_set
    from .distributions import posterior_tail_curve

    tau = scenario.hypothesis.tau
    bound = _cd_adapt_bound(scenario)
    rule = make_cd_adapt(
        scenario.hypothesis, scenario.model, scenario.vague, scenario.informative, n, bound
    )
    if abs(rule.tau_pi_value - tau) < 1e-12:
        raise DegenerateScenarioError("tau_pi equals tau; the compromise family is degenerate")
    if isinstance(scenario.model, NormalKnownSigma):
        w = cd_adapt_equivalent_w(scenario, n)
        return (w, w)
    rset = rejection_set(rule, n)
    if rset.size == 0 or np.any(np.diff(rset) != 1) or rset[-1] != n:
        raise DegenerateScenarioError("CD-Adapt region is not an upper set; no CD reproduces it")
    y_star = int(rset[0])
    theta0 = scenario.hypothesis.theta0
    p_null = 1.0 - posterior_tail_curve(
        scenario.vague, scenario.model, np.arange(n + 1), n, theta0
    )
    lo = (p_null[y_star] - tau) / (rule.tau_pi_value - tau)
    hi = 1.0 if y_star == 0 else (p_null[y_star - 1] - tau) / (rule.tau_pi_value - tau)
    return (min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0))


def _cd_adapt_bound(scenario: Scenario) -> float:
    for spec in scenario.rules:
        if spec.kind == "cd_adapt":
            return spec.tau_bound
    return 0.15

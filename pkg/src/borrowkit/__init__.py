"""Compromise test decisions with historical borrowing, and their exact
frequentist operating characteristics."""

__version__ = "0.1.0"

from .decisions import (
    AdaptiveCompromiseDecision,
    BayesDecision,
    CompromiseDecision,
    Decision,
    DecisionRule,
    FrequentistDecision,
    Hypothesis,
    MonotonicityError,
    RobustMixtureDecision,
    TypeIRestrictedBayes,
    adaptive_weight,
    cd_threshold,
    critical_value,
    decide,
    make_cd,
    make_cd_adapt,
    tau_pi,
)
from .design import (
    EtaMatch,
    RuleSpec,
    Scenario,
    SweepResult,
    SweepRow,
    build_rule,
    cd_adapt_equivalent_w,
    cd_adapt_match_interval,
    match_eta_to_w,
    min_sample_size,
    sweep_samplesize,
    sweep_sampling_prior,
    sweep_weight,
)
from .distributions import (
    BetaPrior,
    Binomial,
    EndpointModel,
    MixturePrior,
    NormalKnownSigma,
    NormalPrior,
    PointMass,
    Prior,
    default_vague_prior,
    marginal_likelihood,
    posterior,
    posterior_prob_gt,
)
from .numerics import GridSpec, QuadratureSpec
from .oc import (
    DegenerateScenarioError,
    OCReport,
    SamplingPrior,
    compute_report,
    expected_power,
    frequentist_risk,
    integrated_risk,
    power,
    power_curve,
    rsl,
    type_one_error,
)
from .scenario import BUILTIN_SCENARIOS, ScenarioError, load_scenario, parse_scenario

__all__ = [name for name in dir() if not name.startswith("_")]

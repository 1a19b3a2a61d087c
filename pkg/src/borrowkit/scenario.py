"""Scenario-file schema: strict JSON parsing plus the built-in study setups.

A scenario document has up to seven sections (model, hypothesis, priors,
rules, sampling, grids, targets). Validation is strict: unknown keys are
rejected with an error naming the offending key, so typos never silently
change a study. Two named scenarios ship embedded as data, ``paper-normal``
and ``paper-binomial``, covering the normal and binomial example studies.
"""

from __future__ import annotations

import json
import math

from .decisions import Hypothesis
from .design import RuleSpec, Scenario
from .distributions import (
    Binomial,
    NormalKnownSigma,
    default_vague_prior,
    prior_from_dict,
)
from .oc import SamplingPrior


class ScenarioError(ValueError):
    """The scenario document violates the schema."""


_TOP_KEYS = {"model", "hypothesis", "priors", "rules", "sampling", "grids", "targets"}
_RULE_KEYS = {
    "fd": {"rule", "label"},
    "bd": {"rule", "label"},
    "cd": {"rule", "label", "w"},
    "cd_adapt": {"rule", "label", "tau_bound"},
    "rmd": {"rule", "label", "w", "robust"},
    "ti_rbd": {"rule", "label", "w"},
}


def _require_keys(section: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(section, dict):
        raise ScenarioError(f"{where}: expected an object")
    unknown = set(section) - allowed
    if unknown:
        raise ScenarioError(f"{where}: unknown key {sorted(unknown)[0]!r}")
    missing = required - set(section)
    if missing:
        raise ScenarioError(f"{where}: missing key {sorted(missing)[0]!r}")


def _number(section: dict, key: str, where: str) -> float:
    value = section[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ScenarioError(f"{where}.{key}: expected a number")
    return float(value)


def _grid(values, where: str) -> tuple:
    if not isinstance(values, list) or not values:
        raise ScenarioError(f"{where}: expected a nonempty array")
    out = []
    for i, v in enumerate(values):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ScenarioError(f"{where}[{i}]: expected a number")
        out.append(v)
    return tuple(out)


def parse_scenario(doc: dict) -> Scenario:
    """Validate a scenario document and assemble the Scenario it describes."""
    _require_keys(doc, _TOP_KEYS, {"model", "hypothesis", "priors", "rules", "grids"}, "scenario")

    model_sec = doc["model"]
    _require_keys(model_sec, {"kind", "sigma"}, {"kind"}, "model")
    kind = model_sec["kind"]
    if kind == "normal":
        model = NormalKnownSigma(_number(model_sec, "sigma", "model") if "sigma" in model_sec else 1.0)
    elif kind == "binomial":
        if "sigma" in model_sec:
            raise ScenarioError("model: unknown key 'sigma' for a binomial endpoint")
        model = Binomial()
    else:
        raise ScenarioError(f"model.kind: expected 'normal' or 'binomial', got {kind!r}")

    hyp_sec = doc["hypothesis"]
    _require_keys(hyp_sec, {"theta0", "kappa", "tau"}, {"theta0"}, "hypothesis")
    if ("kappa" in hyp_sec) == ("tau" in hyp_sec):
        raise ScenarioError("hypothesis: provide exactly one of 'kappa' or 'tau'")
    theta0 = _number(hyp_sec, "theta0", "hypothesis")
    try:
        if "kappa" in hyp_sec:
            hyp = Hypothesis(theta0, _number(hyp_sec, "kappa", "hypothesis"))
        else:
            hyp = Hypothesis.from_tau(theta0, _number(hyp_sec, "tau", "hypothesis"))
    except ValueError as exc:
        raise ScenarioError(f"hypothesis: {exc}") from None

    priors_sec = doc["priors"]
    _require_keys(priors_sec, {"informative", "vague"}, {"informative"}, "priors")
    try:
        informative = prior_from_dict(priors_sec["informative"], "priors.informative")
        vague = (
            prior_from_dict(priors_sec["vague"], "priors.vague")
            if "vague" in priors_sec
            else default_vague_prior(model)
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None

    rules_sec = doc["rules"]
    if not isinstance(rules_sec, list) or not rules_sec:
        raise ScenarioError("rules: expected a nonempty array")
    rules = []
    for i, rdoc in enumerate(rules_sec):
        where = f"rules[{i}]"
        if not isinstance(rdoc, dict) or "rule" not in rdoc:
            raise ScenarioError(f"{where}: expected an object with a 'rule' key")
        rk = rdoc["rule"]
        if rk not in _RULE_KEYS:
            raise ScenarioError(f"{where}.rule: unknown rule {rk!r}")
        _require_keys(rdoc, _RULE_KEYS[rk], {"rule"} | ({"robust"} if rk == "rmd" else set()), where)
        try:
            rules.append(
                RuleSpec(
                    kind=rk,
                    label=rdoc.get("label"),
                    w=_number(rdoc, "w", where) if "w" in rdoc else None,
                    robust=prior_from_dict(rdoc["robust"], f"{where}.robust") if rk == "rmd" else None,
                    tau_bound=_number(rdoc, "tau_bound", where) if "tau_bound" in rdoc else 0.15,
                )
            )
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from None
    names = [r.name for r in rules]
    if len(set(names)) != len(names):
        raise ScenarioError("rules: rule names must be unique (use 'label' to disambiguate)")

    sampling_sec = doc.get("sampling", "informative")
    if sampling_sec == "informative":
        sampling_dist = informative
    else:
        try:
            sampling_dist = prior_from_dict(sampling_sec, "sampling")
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None
    try:
        sampling = SamplingPrior(sampling_dist)
    except TypeError as exc:
        raise ScenarioError(f"sampling: {exc}") from None

    grids_sec = doc["grids"]
    _require_keys(grids_sec, {"n", "w", "sampling_mean", "a_s"}, {"n"}, "grids")
    n_values = tuple(int(v) for v in _grid(grids_sec["n"], "grids.n"))
    if any(float(a) != int(a) for a in _grid(grids_sec["n"], "grids.n")):
        raise ScenarioError("grids.n: sample sizes must be integers")
    w_grid = (
        _grid(grids_sec["w"], "grids.w")
        if "w" in grids_sec
        else tuple(round(0.05 * i, 2) for i in range(21))
    )
    mean_grid = _grid(grids_sec["sampling_mean"], "grids.sampling_mean") if "sampling_mean" in grids_sec else None
    a_s_grid = _grid(grids_sec["a_s"], "grids.a_s") if "a_s" in grids_sec else None
    if mean_grid is not None and isinstance(model, Binomial):
        raise ScenarioError("grids: unknown key 'sampling_mean' for a binomial endpoint (use 'a_s')")
    if a_s_grid is not None and isinstance(model, NormalKnownSigma):
        raise ScenarioError("grids: unknown key 'a_s' for a normal endpoint (use 'sampling_mean')")

    targets_sec = doc.get("targets", {})
    _require_keys(targets_sec, {"expected_power", "n_max"}, set(), "targets")
    target = _number(targets_sec, "expected_power", "targets") if "expected_power" in targets_sec else 0.8
    n_max = int(_number(targets_sec, "n_max", "targets")) if "n_max" in targets_sec else 250

    try:
        return Scenario(
            model=model,
            hypothesis=hyp,
            informative=informative,
            vague=vague,
            rules=tuple(rules),
            sampling=sampling,
            n_values=n_values,
            w_grid=w_grid,
            sampling_mean_grid=mean_grid,
            a_s_grid=a_s_grid,
            target_expected_power=target,
            n_max=n_max,
        )
    except (ValueError, TypeError) as exc:
        raise ScenarioError(str(exc)) from None


# ---------------------------------------------------------------------------
# built-in scenarios (embedded as data; `borrowkit reproduce` needs no files)
# ---------------------------------------------------------------------------

_SD50 = 1.0 / math.sqrt(50.0)

BUILTIN_SCENARIOS: dict = {
    "paper-normal": {
        "model": {"kind": "normal", "sigma": 1.0},
        "hypothesis": {"theta0": 0.0, "tau": 0.025},
        "priors": {
            "informative": {"type": "normal", "mean": 0.25, "sd": _SD50},
            "vague": {"type": "normal", "mean": 0.0, "sd": 100.0},
        },
        "rules": [
            {"rule": "fd"},
            {"rule": "bd"},
            {"rule": "cd", "w": 0.5},
            {"rule": "cd_adapt", "tau_bound": 0.15},
            {
                "rule": "rmd",
                "label": "rmd_unit",
                "w": 0.5,
                "robust": {"type": "normal", "mean": 0.25, "sd": 1.0},
            },
            {
                "rule": "rmd",
                "label": "rmd_vague",
                "w": 0.5,
                "robust": {"type": "normal", "mean": 0.25, "sd": 100.0},
            },
            {"rule": "ti_rbd", "w": 0.5},
        ],
        "sampling": "informative",
        "grids": {"n": [20, 100]},
        "targets": {"expected_power": 0.8, "n_max": 250},
    },
    "paper-binomial": {
        "model": {"kind": "binomial"},
        "hypothesis": {"theta0": 0.3, "tau": 0.025},
        "priors": {
            "informative": {"type": "beta", "a": 21.0, "b": 21.0},
            "vague": {"type": "beta", "a": 0.001, "b": 1.0},
        },
        "rules": [
            {"rule": "fd"},
            {"rule": "bd"},
            {"rule": "cd", "w": 0.5},
            {"rule": "cd_adapt", "tau_bound": 0.15},
            {
                "rule": "rmd",
                "label": "rmd_unif",
                "w": 0.5,
                "robust": {"type": "beta", "a": 1.0, "b": 1.0},
            },
            {
                "rule": "rmd",
                "label": "rmd_pm",
                "w": 0.5,
                "robust": {"type": "beta", "a": 0.001, "b": 1.0},
            },
            {"rule": "ti_rbd", "w": 0.5},
        ],
        "sampling": "informative",
        "grids": {"n": [20, 100], "a_s": [float(a) for a in range(2, 39, 2)]},
        "targets": {"expected_power": 0.8, "n_max": 250},
    },
}


def load_scenario(path_or_name: str) -> Scenario:
    """Load a scenario from a JSON file, or by built-in name."""
    if path_or_name in BUILTIN_SCENARIOS:
        return parse_scenario(BUILTIN_SCENARIOS[path_or_name])
    with open(path_or_name, encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path_or_name}: invalid JSON ({exc})") from None
    return parse_scenario(doc)

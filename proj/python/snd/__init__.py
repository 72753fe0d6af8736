"""Stochastic service network design: tactical planning, simulation and
surrogate-assisted annealing."""

from ._core import (
    FitError,
    Instance,
    OracleSizeError,
    PathPool,
    evaluate,
    fit_surrogate,
    gamma,
    oracle,
    predict_delay_cost,
    scenario_presets,
    simulate,
    solve,
    spearman,
)

__all__ = [
    "FitError",
    "Instance",
    "OracleSizeError",
    "PathPool",
    "evaluate",
    "fit_surrogate",
    "gamma",
    "oracle",
    "predict_delay_cost",
    "scenario_presets",
    "simulate",
    "solve",
    "spearman",
]

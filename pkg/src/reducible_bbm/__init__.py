"""Rate functions and simulation of the two-type reducible branching Brownian motion."""

from .params import InvalidParameterError, ModelParams, Region, boundary_distance, classify_region
from .ratefn import (
    RateResult,
    Regime,
    SpeedInfo,
    StrategyDescriptor,
    critical_point,
    optimal_strategy,
    profile,
    rate,
    rate_numeric,
    regime_thresholds,
    speed,
    xi,
)
from .simulator import PopulationOverflowError, SimConfig, SimResult, simulate_single, simulate_two_type
from .mc import TailEstimate, RateFit, empirical_rate, estimate_tail

__all__ = [
    "InvalidParameterError", "ModelParams", "Region", "boundary_distance", "classify_region",
    "RateResult", "Regime", "SpeedInfo", "StrategyDescriptor", "critical_point",
    "optimal_strategy", "profile", "rate", "rate_numeric", "regime_thresholds", "speed", "xi",
    "PopulationOverflowError", "SimConfig", "SimResult", "simulate_single", "simulate_two_type",
    "TailEstimate", "RateFit", "empirical_rate", "estimate_tail",
]

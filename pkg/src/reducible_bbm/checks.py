"""Self-consistency checks of the rate formulas, shared by the CLI suites.

Each check returns a :class:`CheckResult` whose ``worst`` field is the
largest discrepancy seen, so a failure can be read off directly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .params import ModelParams, Region, classify_region
from .ratefn import (
    ProfileGapWarning,
    Regime,
    closed_form_rate,
    interior_closed_form,
    optimal_strategy,
    profile,
    rate,
    rate_numeric,
    regime_thresholds,
    three_phase,
)

REGIONS = (Region.I, Region.II, Region.III)
SAMPLE_BOX = 3.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float
    n: int
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"check": self.name, "pass": self.passed, "worst": self.worst,
                "tol": self.tol, "n": self.n, **self.detail}


def sample_region(region: Region, n: int, rng: np.random.Generator,
                  box: float = SAMPLE_BOX) -> list[ModelParams]:
    """``n`` points drawn uniformly from ``region`` within (0, box]^2 by rejection."""
    out: list[ModelParams] = []
    while len(out) < n:
        b, s2 = box * (1.0 - rng.random(2))
        p = ModelParams(float(b), float(s2))
        if classify_region(p) is region:
            out.append(p)
    return out


def sample_three_phase(region: Region, n: int, rng: np.random.Generator) -> list[ModelParams]:
    out: list[ModelParams] = []
    while len(out) < n:
        out.extend(p for p in sample_region(region, n, rng) if three_phase(p))
    return out[:n]


def check_closed_vs_numeric(region: Region, n: int, rng: np.random.Generator,
                            tol: float = 1e-6) -> CheckResult:
    worst, bad = 0.0, 0
    for p in sample_region(region, n, rng):
        theta = 1.0 + 2.0 * (1.0 - rng.random())
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ProfileGapWarning)
            gap = rate(p, theta).abs_gap
        worst = max(worst, gap)
        bad += gap > tol
    return CheckResult(f"closed_vs_numeric_{region.value}", bad == 0, worst, tol, n, {"failures": bad})


def _adjacent_gap(p: ModelParams, th2: float, u_end: float) -> float:
    """Difference between the interior formula and the endpoint-u formula at theta^2 = th2."""
    theta = math.sqrt(th2)
    return abs(interior_closed_form(p, theta) - profile(p, theta, u_end))


def check_threshold_continuity(region: Region, n: int, rng: np.random.Generator,
                               tol: float = 1e-9) -> CheckResult:
    worst, bad = 0.0, 0
    for p in sample_three_phase(region, n, rng):
        low, high = regime_thresholds(p)
        # Region II switches immediately below its low threshold, I and III at the end
        below = 0.0 if classify_region(p) is Region.II else 1.0
        for th2, u_end in ((low, below), (high, 1.0 - below)):
            g = _adjacent_gap(p, th2, u_end)
            worst = max(worst, g)
            bad += g > tol
    return CheckResult(f"threshold_continuity_{region.value}", bad == 0, worst, tol, n, {"failures": bad})


def check_zero_at_unity(region: Region, n: int, rng: np.random.Generator,
                        tol: float = 1e-9) -> CheckResult:
    worst, bad = 0.0, 0
    for p in sample_region(region, n, rng):
        a = abs(closed_form_rate(p, 1.0)[0])
        worst = max(worst, a)
        bad += a > tol
    return CheckResult(f"zero_at_unity_{region.value}", bad == 0, worst, tol, n, {"failures": bad})


def interior_sample(region: Region, n: int, rng: np.random.Generator) -> list[tuple[ModelParams, float]]:
    """``n`` (params, theta > 1) pairs whose rate sits in the interior regime."""
    out: list[tuple[ModelParams, float]] = []
    while len(out) < n:
        for p in sample_three_phase(region, n, rng):
            low, high = regime_thresholds(p)
            lo, hi = max(low, 1.0), min(high, 9.0)
            if hi <= lo:
                continue
            theta = math.sqrt(lo + (hi - lo) * rng.random())
            if theta > 1.0 and closed_form_rate(p, theta)[1] is Regime.INTERIOR:
                out.append((p, theta))
    return out[:n]


def check_strategy_identity(region: Region, n: int, rng: np.random.Generator,
                            tol: float = 1e-9) -> CheckResult:
    worst, bad, negative = 0.0, 0, 0
    for p, theta in interior_sample(region, n, rng):
        s = optimal_strategy(p, theta)
        g = abs(s.exponent() - profile(p, theta, s.u_star))
        worst = max(worst, g)
        bad += g > tol
        negative += not s.beta0_positive
    return CheckResult(f"strategy_identity_{region.value}", bad == 0, worst, tol, n,
                       {"failures": bad, "beta0_nonpositive": negative})


def check_monotone(region: Region, n: int, rng: np.random.Generator) -> CheckResult:
    bad = 0
    grid = np.linspace(1.0, 3.0, 41)[1:]
    for p in sample_region(region, n, rng):
        values = [rate_numeric(p, float(th))[1] for th in grid]
        bad += any(b >= a for a, b in zip(values, values[1:]))
    return CheckResult(f"monotone_{region.value}", bad == 0, float(bad), 0.0, n, {"failures": bad})


def consistency_suite(seed: int = 0, n: int = 100) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results: list[CheckResult] = []
    for region in REGIONS:
        results.append(check_closed_vs_numeric(region, 10 * n, rng))
        results.append(check_threshold_continuity(region, n, rng))
        results.append(check_zero_at_unity(region, n, rng))
        results.append(check_strategy_identity(region, n, rng))
        results.append(check_monotone(region, n // 4 or 1, rng))
    return results

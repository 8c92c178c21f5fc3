"""Monte Carlo tail estimates, empirical rates and first-moment checks."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Optional, Sequence

import numpy as np

from ._rng import derive_seed
from .numerics import QuadratureSpec, gaussian_tail, integrate
from .params import ModelParams
from .ratefn import speed
from .simulator import (
    DEFAULT_MAX_POPULATION,
    SimConfig,
    simulate_batch,
    simulate_single_batch,
)

Z95 = NormalDist().inv_cdf(0.975)
MIN_HITS = 10
Z_PASS = 3.0
LEVEL_SET_BAND = 0.15


class InsufficientHitsError(RuntimeError):
    pass


@dataclass(frozen=True)
class TailEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    n_runs: int
    n_hits: int


@dataclass(frozen=True)
class RateFit:
    slope: float
    stderr: float
    points: tuple[tuple[float, float], ...]
    estimates: tuple[TailEstimate, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    target: float
    empirical: float
    stderr: float
    z: float
    passed: bool
    n_runs: int
    seed: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return {k: d[k] for k in ("target", "empirical", "stderr", "z", "pass", "n_runs", "seed")}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


def wilson_interval(hits: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n < 1 or not 0 <= hits <= n:
        raise ValueError(f"need 0 <= hits <= n and n >= 1, got hits={hits}, n={n}")
    p = hits / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    # clamp so the interval always contains p_hat despite rounding
    return max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half))


def _check_runs(n_runs: int, minimum: int = 1) -> None:
    if isinstance(n_runs, bool) or not isinstance(n_runs, int) or n_runs < minimum:
        raise ValueError(f"n_runs must be an integer >= {minimum}, got {n_runs!r}")


def estimate_tail(params: ModelParams, t: float, x: float, n_runs: int, seed: int, *,
                  workers: Optional[int] = None,
                  max_population: int = DEFAULT_MAX_POPULATION) -> TailEstimate:
    """Estimate P(M_t >= x) from ``n_runs`` independent runs.

    Each run stops at its first particle reaching ``x``.  An overflowing run
    raises :class:`PopulationOverflowError` naming its seed and run index.
    """
    _check_runs(n_runs)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    batch = simulate_batch(params, SimConfig(t, seed, max_population), n_runs,
                           workers=workers, stop_at=x)
    hits = int(np.count_nonzero(batch.hit))
    lo, hi = wilson_interval(hits, n_runs)
    return TailEstimate(hits / n_runs, lo, hi, n_runs, hits)


def fit_log_slope(ts: Sequence[float], estimates: Sequence[TailEstimate]) -> RateFit:
    """OLS slope of ln p_hat against t, with a delta-method standard error.

    Each ln p_hat carries the SE ``(ci_high - ci_low) / (2 z p_hat)`` read off
    its Wilson interval.
    """
    if len(ts) < 2 or len(ts) != len(estimates):
        raise ValueError("need at least two (t, estimate) pairs")
    for t, e in zip(ts, estimates):
        if e.n_hits < MIN_HITS:
            raise InsufficientHitsError(f"only {e.n_hits} hits at t={t} (need {MIN_HITS})")
    t_arr = np.asarray(ts, dtype=float)
    y = np.array([math.log(e.p_hat) for e in estimates])
    se = np.array([(e.ci_high - e.ci_low) / (2 * Z95 * e.p_hat) for e in estimates])
    dt = t_arr - t_arr.mean()
    sxx = float(dt @ dt)
    slope = float(dt @ y) / sxx
    stderr = math.sqrt(float((dt * dt) @ (se * se))) / sxx
    points = tuple((float(a), float(b)) for a, b in zip(t_arr, y))
    return RateFit(slope, stderr, points, tuple(estimates))


def empirical_rate(params: ModelParams, theta: float, t_list: Sequence[float], n_runs: int,
                   seed: int, *, workers: Optional[int] = None,
                   max_population: int = DEFAULT_MAX_POPULATION) -> RateFit:
    """Fitted (1/t) ln P(M_t >= theta v t) trend over ``t_list``."""
    ts = [float(t) for t in t_list]
    if len(ts) < 2 or any(b <= a for a, b in zip(ts, ts[1:])) or ts[0] <= 0:
        raise ValueError("t_list must be positive, strictly increasing and of length >= 2")
    v = speed(params).v
    estimates = [
        estimate_tail(params, t, theta * v * t, n_runs, derive_seed(seed, j),
                      workers=workers, max_population=max_population)
        for j, t in enumerate(ts)
    ]
    return fit_log_slope(ts, estimates)


def _z_report(values: np.ndarray, target: float, n_runs: int, seed: int) -> ValidationReport:
    empirical = float(values.mean())
    stderr = float(values.std(ddof=1)) / math.sqrt(n_runs)
    diff = empirical - target
    if stderr > 0:
        z = diff / stderr
    else:
        z = 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(target)) else math.copysign(math.inf, diff)
    return ValidationReport(target, empirical, stderr, z, abs(z) <= Z_PASS, n_runs, seed)


def type1_moment_target(params: ModelParams, t: float, x: float) -> float:
    if t == 0:
        return 1.0 if 0.0 >= x else 0.0
    return math.exp(params.beta * t) * gaussian_tail(x, params.sigma * math.sqrt(t))


def type2_moment_target(params: ModelParams, t: float, x: float, abs_tol: float = 1e-10) -> float:
    """alpha * int_0^t e^{beta s + (t - s)} P(N(0, sigma2 s + t - s) > x) ds.

    ``abs_tol`` is relative to the integrand's peak, which sits at an end point.
    """
    if params.alpha == 0 or t == 0:
        return 0.0
    b, s2 = params.beta, params.sigma2

    def g(s: float) -> float:
        return math.exp(b * s + (t - s)) * gaussian_tail(x, math.sqrt(s2 * s + t - s))

    peak = max(g(0.0), g(t), g(0.5 * t))
    if peak == 0:
        return 0.0
    return params.alpha * integrate(g, 0.0, t, QuadratureSpec(abs_tol * peak))


def validate_first_moment_type1(params: ModelParams, t: float, x: float, n_runs: int, seed: int, *,
                                workers: Optional[int] = None) -> ValidationReport:
    """Mean type-1 count at or above ``x`` against e^{beta t} P(sigma B_t >= x); passes iff |z| <= 3."""
    _check_runs(n_runs, 100)
    batch = simulate_batch(params, SimConfig(t, seed, level_thresholds=(x,)), n_runs, workers=workers)
    return _z_report(batch.counts1[:, 0].astype(float), type1_moment_target(params, t, x), n_runs, seed)


def validate_first_moment_type2(params: ModelParams, t: float, x: float, n_runs: int, seed: int, *,
                                workers: Optional[int] = None) -> ValidationReport:
    """Mean type-2 count at or above ``x`` against the quadrature target; passes iff |z| <= 3."""
    _check_runs(n_runs, 100)
    batch = simulate_batch(params, SimConfig(t, seed, level_thresholds=(x,)), n_runs, workers=workers)
    return _z_report(batch.counts2[:, 0].astype(float), type2_moment_target(params, t, x), n_runs, seed)


def level_set_rate(sigma2: float, beta: float, x_frac: float, t: float, n_runs: int, seed: int, *,
                   workers: Optional[int] = None,
                   max_population: int = DEFAULT_MAX_POPULATION) -> ValidationReport:
    """Mean of (1/t) ln(1 + #particles above sqrt(2 beta) x_frac sigma t) against (1 - x_frac^2) beta.

    Passes iff the mean is within 0.15 of the target.
    """
    _check_runs(n_runs)
    if not 0 < x_frac < 1:
        raise ValueError(f"x_frac must lie in (0, 1), got {x_frac}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    level = math.sqrt(2 * beta) * x_frac * math.sqrt(sigma2) * t
    batch = simulate_single_batch(sigma2, beta, SimConfig(t, seed, max_population, (level,)),
                                  n_runs, workers=workers)
    values = np.log1p(batch.counts1[:, 0].astype(float)) / t
    target = (1 - x_frac * x_frac) * beta
    empirical = float(values.mean())
    stderr = float(values.std(ddof=1)) / math.sqrt(n_runs) if n_runs > 1 else 0.0
    diff = empirical - target
    z = diff / stderr if stderr > 0 else (0.0 if diff == 0 else math.copysign(math.inf, diff))
    return ValidationReport(target, empirical, stderr, z, abs(diff) <= LEVEL_SET_BAND, n_runs, seed)

"""Large-deviation rate of the maximum, P(M_t >= theta v t) ~ exp(A t).

In every region the exponent is the maximum over u in [0, 1] of a profile

    f(u) = (beta - 1) u + 1 - c / ((sigma2 - 1) u + 1),

where u is the fraction of time the optimal ancestral line spends as type 1
and c depends on the region (sigma2 beta theta^2, theta^2 or xi^2 theta^2 / 2).
The profile is concave, so the maximiser is u = 1, u = 0 or the stationary
point in between.  :func:`rate` evaluates the region's closed forms and
cross-checks them against a golden-section maximisation of the profile.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

from .numerics import maximize_unimodal
from .params import ModelParams, Region, classify_region

AGREEMENT_TOL = 1e-6
DEFAULT_ARG_TOL = 1e-10


class UnsupportedBoundaryError(ValueError):
    """Parameters sit on a region boundary, where no closed form is available."""


class WrongRegionError(ValueError):
    pass


class WrongRegimeError(ValueError):
    pass


class ThetaOutOfRangeError(ValueError):
    pass


class ProfileGapWarning(RuntimeWarning):
    """Closed form and numerical profile maximum disagree beyond AGREEMENT_TOL."""


class Regime(str, enum.Enum):
    SWITCH_AT_END = "switch_at_end"
    SWITCH_IMMEDIATELY = "switch_immediately"
    INTERIOR = "interior"


@dataclass(frozen=True)
class SpeedInfo:
    v: float
    log_correction: float

    def m(self, t: float) -> float:
        """Centring ``v t - log_correction * ln t``."""
        return self.v * t - self.log_correction * math.log(t)


@dataclass(frozen=True)
class RateResult:
    A: float
    regime: Regime
    u_star: float
    numeric_check: float
    region: Region

    @property
    def abs_gap(self) -> float:
        return abs(self.A - self.numeric_check)


@dataclass(frozen=True)
class StrategyDescriptor:
    """Switching recipe realising the interior-regime exponent.

    Type 1 is followed up to time ``u_star t``, where about ``exp(beta0 t)``
    type-1 particles sit near ``x0 t``; one of them founds the type-2 line
    that reaches ``target t``.
    """

    u_star: float
    x0: float
    beta0: float
    target: float

    @property
    def beta0_positive(self) -> bool:
        return self.beta0 > 0

    def exponent(self) -> float:
        """Type-1 crowd exponent plus the type-2 travel exponent."""
        rest = 1.0 - self.u_star
        if rest == 0.0:
            # no type-2 leg: the switch position is the target itself
            return self.beta0
        return self.beta0 + (1.0 - (self.target - self.x0) ** 2 / (2.0 * rest * rest)) * rest


def _region(params: ModelParams) -> Region:
    region = classify_region(params)
    if region is Region.BOUNDARY:
        raise UnsupportedBoundaryError(
            f"(beta={params.beta}, sigma2={params.sigma2}) lies on a region boundary"
        )
    return region


def _xi(beta: float, sigma2: float) -> float:
    return abs(sigma2 - beta) / math.sqrt(2.0 * (1.0 - sigma2) * (beta - 1.0))


def speed(params: ModelParams) -> SpeedInfo:
    region = _region(params)
    b, s2 = params.beta, params.sigma2
    if region is Region.I:
        return SpeedInfo(math.sqrt(2.0 * s2 * b), 3.0 / (2.0 * math.sqrt(2.0 * b / s2)))
    if region is Region.II:
        return SpeedInfo(math.sqrt(2.0), 3.0 / (2.0 * math.sqrt(2.0)))
    return SpeedInfo(_xi(b, s2), 0.0)


def xi(params: ModelParams) -> float:
    """Speed of the anomalous (Region III) front, always positive."""
    if classify_region(params) is not Region.III:
        raise WrongRegionError("xi is only defined in Region III")
    return _xi(params.beta, params.sigma2)


def _profile_constant(params: ModelParams, region: Region, theta: float) -> float:
    if region is Region.I:
        return params.sigma2 * params.beta * theta * theta
    if region is Region.II:
        return theta * theta
    return _xi(params.beta, params.sigma2) ** 2 * theta * theta / 2.0


def profile(params: ModelParams, theta: float, u: float) -> float:
    """Exponent of the first moment of lines switching type at time ``u t``."""
    region = _region(params)
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    c = _profile_constant(params, region, theta)
    return (params.beta - 1.0) * u + 1.0 - c / ((params.sigma2 - 1.0) * u + 1.0)


def critical_point(params: ModelParams, theta: float) -> Optional[tuple[float, float]]:
    """Stationary point ``(u0, D*)`` of the profile inside (0, 1), or None.

    ``D* = (sigma2 - 1) u0 + 1`` is the profile's denominator at ``u0``.
    """
    region = _region(params)
    b, s2 = params.beta, params.sigma2
    if b == 1.0 or s2 == 1.0:
        return None
    ratio = (b - 1.0) / (1.0 - s2)
    if ratio <= 0:
        return None
    d_star = math.sqrt(_profile_constant(params, region, theta) / ratio)
    u0 = (d_star - 1.0) / (s2 - 1.0)
    if not 0.0 < u0 < 1.0:
        return None
    return u0, d_star


def regime_thresholds(params: ModelParams) -> tuple[float, float]:
    """theta^2 values where the maximiser leaves an endpoint, ordered low <= high.

    Regions I and III switch at the end below ``low`` and immediately above
    ``high``; Region II is the other way round.  ``(inf, inf)`` means the
    switch is at the end for every theta >= 1 and ``(-inf, -inf)`` that it
    is immediate.
    """
    region = _region(params)
    b, s2 = params.beta, params.sigma2
    if region is Region.I:
        if b <= 1.0 or s2 >= 1.0:
            return math.inf, math.inf
        return (b - 1.0) * s2 / ((1.0 - s2) * b), (b - 1.0) / ((1.0 - s2) * s2 * b)
    if region is Region.II:
        if b > 1.0 or s2 <= 1.0:
            return -math.inf, -math.inf
        return (b - 1.0) / (1.0 - s2), (1.0 - b) * s2 * s2 / (s2 - 1.0)
    xi2 = _xi(b, s2) ** 2
    scale = 2.0 * (b - 1.0) / ((1.0 - s2) * xi2)
    return scale * s2 * s2, scale


def _interior_u(params: ModelParams, region: Region, theta: float) -> float:
    b, s2 = params.beta, params.sigma2
    d_star = math.sqrt(_profile_constant(params, region, theta) * (1.0 - s2) / (b - 1.0))
    return min(1.0, max(0.0, (d_star - 1.0) / (s2 - 1.0)))


def closed_form_rate(params: ModelParams, theta: float) -> tuple[float, Regime, float]:
    """``(A, regime, u_star)`` from the region's closed forms, for theta >= 1.

    A theta^2 exactly on a threshold takes the interior branch; the adjacent
    formulas agree there.
    """
    region = _region(params)
    if not theta >= 1.0:
        raise ThetaOutOfRangeError(f"closed forms need theta >= 1, got {theta}")
    b, s2 = params.beta, params.sigma2
    th2 = theta * theta
    low, high = regime_thresholds(params)

    if region is Region.I:
        if th2 < low:
            return b * (1.0 - th2), Regime.SWITCH_AT_END, 1.0
        if th2 > high:
            return 1.0 - th2 * b * s2, Regime.SWITCH_IMMEDIATELY, 0.0
        return interior_closed_form(params, theta), Regime.INTERIOR, _interior_u(params, region, theta)

    if region is Region.II:
        if th2 < low or low == -math.inf:
            return 1.0 - th2, Regime.SWITCH_IMMEDIATELY, 0.0
        if th2 > high:
            return b - th2 / s2, Regime.SWITCH_AT_END, 1.0
        return interior_closed_form(params, theta), Regime.INTERIOR, _interior_u(params, region, theta)

    xi2 = _xi(b, s2) ** 2
    if th2 < low:
        return b - xi2 * th2 / (2.0 * s2), Regime.SWITCH_AT_END, 1.0
    if th2 > high:
        return 1.0 - xi2 * th2 / 2.0, Regime.SWITCH_IMMEDIATELY, 0.0
    return interior_closed_form(params, theta), Regime.INTERIOR, _interior_u(params, region, theta)


def interior_closed_form(params: ModelParams, theta: float) -> float:
    """Interior-regime formula of the region, evaluated for any theta > 0.

    Only meaningful inside the interior window; outside it this is just the
    algebraic expression, which is what threshold-continuity checks need.
    """
    region = _region(params)
    b, s2 = params.beta, params.sigma2
    if not three_phase(params):
        raise WrongRegimeError("these parameters have no interior regime")
    if region is Region.I:
        return (-2.0 * math.sqrt(b * (b - 1.0) * (1.0 - s2)) * math.sqrt(s2) * theta + b - s2) / (1.0 - s2)
    if region is Region.II:
        return (2.0 * math.sqrt((b - 1.0) * (1.0 - s2)) * theta + b - s2) / (1.0 - s2)
    # profile value at the stationary point, which collapses to a linear form
    return (b - s2) * (1.0 - theta) / (1.0 - s2)


def three_phase(params: ModelParams) -> bool:
    """True when the rate has an interior window between two finite thresholds."""
    return all(math.isfinite(x) for x in regime_thresholds(params))


def interior_literal_form(params: ModelParams, theta: float) -> float:
    """Alternative printed closed form for the Region III interior regime.

    Kept only for side-by-side comparison: it does not equal the profile
    maximum (at beta=3, sigma2=0.5, theta=1.2 it gives 19.14 instead of -1).
    """
    if classify_region(params) is not Region.III:
        raise WrongRegionError("the literal interior form belongs to Region III")
    b, s2 = params.beta, params.sigma2
    r2 = math.sqrt(2.0)
    return (r2 * (1.0 - b) - theta * theta * (s2 - b) ** 2 - 1.0) / (r2 * (s2 - 1.0)) + 1.0


def rate_numeric(params: ModelParams, theta: float, tol: float = DEFAULT_ARG_TOL) -> tuple[float, float]:
    """``(u_star, A)`` maximising the region profile over [0, 1] by golden section."""
    region = _region(params)
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    c = _profile_constant(params, region, theta)
    b1, s1 = params.beta - 1.0, params.sigma2 - 1.0
    return maximize_unimodal(lambda u: b1 * u + 1.0 - c / (s1 * u + 1.0), 0.0, 1.0, tol)


def rate(params: ModelParams, theta: float) -> RateResult:
    """Closed-form rate for theta > 1, cross-checked against :func:`rate_numeric`.

    A disagreement beyond ``AGREEMENT_TOL`` is reported through
    :class:`ProfileGapWarning` and the result's ``abs_gap``.
    """
    if not theta > 1.0:
        raise ThetaOutOfRangeError(f"theta must exceed 1, got {theta}")
    region = _region(params)
    a, regime, u_star = closed_form_rate(params, theta)
    _, numeric = rate_numeric(params, theta)
    result = RateResult(a, regime, u_star, numeric, region)
    if result.abs_gap > AGREEMENT_TOL:
        warnings.warn(
            f"closed form {a:.9g} differs from the profile maximum {numeric:.9g} "
            f"at beta={params.beta}, sigma2={params.sigma2}, theta={theta}",
            ProfileGapWarning,
            stacklevel=2,
        )
    return result


def optimal_strategy(params: ModelParams, theta: float) -> StrategyDescriptor:
    """Switch time, switch position slope and type-1 crowd exponent (interior regime only)."""
    region = _region(params)
    _, regime, u0 = closed_form_rate(params, theta)
    if regime is not Regime.INTERIOR:
        raise WrongRegimeError(f"no interior switch at theta={theta}: regime is {regime.value}")
    s2 = params.sigma2
    target = speed(params).v * theta
    x0 = target * u0 * s2 / (1.0 - u0 + u0 * s2)
    beta0 = params.beta * u0 - x0 * x0 / (2.0 * s2 * u0) if u0 > 0 else 0.0
    return StrategyDescriptor(u0, x0, beta0, target)

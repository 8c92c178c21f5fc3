"""Model parameters of the two-type reducible BBM and the (beta, sigma2) phase regions.

Type-2 particles always branch at rate 1 and diffuse with variance 1; only
the type-1 branching rate ``beta``, variance ``sigma2`` and the type-2
emission rate ``alpha`` are free.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class InvalidParameterError(ValueError):
    pass


class Region(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class ModelParams:
    beta: float
    sigma2: float
    alpha: float = 1.0

    def __post_init__(self):
        for name in ("beta", "sigma2", "alpha"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidParameterError(f"{name} must be a number, got {value!r}")
            # alpha = 0 is allowed: it switches off type 2 entirely
            if not math.isfinite(value) or value < 0 or (value == 0 and name != "alpha"):
                raise InvalidParameterError(f"{name} must be finite and positive, got {value!r}")
            object.__setattr__(self, name, float(value))

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        try:
            return cls(data["beta"], data["sigma2"], data.get("alpha", 1.0))
        except KeyError as exc:
            raise InvalidParameterError(f"missing parameter {exc.args[0]!r}") from None

    def to_dict(self) -> dict:
        return {"beta": self.beta, "sigma2": self.sigma2, "alpha": self.alpha}


def _slacks(beta: float, sigma2: float) -> dict[Region, tuple[float, ...]]:
    """Signed slack of every strict inequality; a region holds iff all are > 0."""
    if beta <= 1:
        upper_i = lower_ii = 1.0 / beta
    else:
        upper_i = beta / (2 * beta - 1)
        lower_ii = 2 - beta
    slacks = {
        Region.I: (sigma2 - upper_i,),
        Region.II: (lower_ii - sigma2,),
    }
    if beta > 1:
        slacks[Region.III] = (sigma2 + beta - 2, beta / (2 * beta - 1) - sigma2)
    else:
        # the anomalous region lies between the curves sigma2 = 2 - beta and
        # sigma2 = beta / (2 beta - 1), which only separate for beta > 1
        slacks[Region.III] = (-math.inf,)
    return slacks


def _check(params: ModelParams) -> None:
    if not isinstance(params, ModelParams):
        raise InvalidParameterError(f"expected ModelParams, got {type(params).__name__}")


def classify_region(params: ModelParams) -> Region:
    """Region containing ``(beta, sigma2)``; ``Region.BOUNDARY`` when none strictly holds."""
    _check(params)
    for region, slack in _slacks(params.beta, params.sigma2).items():
        if min(slack) > 0:
            return region
    return Region.BOUNDARY


def boundary_distance(params: ModelParams) -> float:
    """Smallest slack, in sigma2 units, of the inequalities defining the region.

    Moving ``sigma2`` by less than this amount never changes the region.
    """
    region = classify_region(params)
    if region is Region.BOUNDARY:
        return 0.0
    return min(_slacks(params.beta, params.sigma2)[region])

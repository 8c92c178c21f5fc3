"""Gaussian tails, adaptive Simpson quadrature and golden-section maximisation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy import special

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class DepthExceededError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    max_depth: int = 50

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_depth < 10:
            raise ValueError(f"max_depth must be at least 10, got {self.max_depth}")


def gaussian_tail(a: float, sigma: float = 1.0) -> float:
    """P(X > a) for X ~ N(0, sigma**2)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return 0.5 * float(special.erfc(a / (sigma * _SQRT2)))


def log_gaussian_tail(a: float, sigma: float = 1.0) -> float:
    """log P(X > a), finite far beyond the underflow point of :func:`gaussian_tail`."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = a / (sigma * _SQRT2)
    if x < 1.0:
        return math.log(0.5 * float(special.erfc(x)))
    # erfc(x) = erfcx(x) * exp(-x^2), erfcx stays O(1/x)
    return math.log(0.5 * float(special.erfcx(x))) - x * x


def gaussian_tail_upper(a: float, sigma: float = 1.0) -> float:
    """Mills-ratio bound ``sigma / (a sqrt(2 pi)) exp(-a^2 / (2 sigma^2))`` on P(X > a), a > 0."""
    if not a > 0:
        raise ValueError(f"the tail bound needs a > 0, got {a}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return _INV_SQRT_2PI * (sigma / a) * math.exp(-a * a / (2.0 * sigma * sigma))


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Adaptive Simpson integral of ``f`` over ``[a, b]``.

    Each panel is accepted once the two half-panel estimates differ from the
    whole-panel estimate by at most 15 times its share of ``spec.abs_tol``;
    the accepted value carries the Richardson correction.

    Raises:
        DepthExceededError: a panel still fails the test at ``spec.max_depth``.
    """
    if a > b:
        raise ValueError(f"integration bounds must satisfy a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    # explicit stack keeps the left-to-right summation order fixed
    stack = [(a, b, fa, fm, fb, whole, spec.abs_tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        fl = f(0.5 * (lo + mid))
        fr = f(0.5 * (mid + hi))
        left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi)
        delta = left + right - est
        if abs(delta) <= 15.0 * tol:
            total += left + right + delta / 15.0
            continue
        if depth + 1 >= spec.max_depth:
            raise DepthExceededError(
                f"adaptive Simpson did not converge on [{lo}, {hi}] within depth {spec.max_depth}"
            )
        stack.append((mid, hi, fmid, fr, fhi, right, 0.5 * tol, depth + 1))
        stack.append((lo, mid, flo, fl, fmid, left, 0.5 * tol, depth + 1))
    return total


def maximize_unimodal(
    f: Callable[[float], float],
    a: float,
    b: float,
    arg_tol: float = 1e-10,
) -> tuple[float, float]:
    """Golden-section search for the maximiser of a unimodal ``f`` on ``[a, b]``.

    The endpoints are compared with the bracketed optimum at the end, so a
    maximum sitting on the boundary is returned exactly; a tie goes to the
    endpoint.  At an interior maximum ``f`` is flat to rounding over a width
    of about ``sqrt(eps |f| / |f''|)``, so the argument cannot be located more
    finely than that whatever ``arg_tol`` says; the value ``f_star`` is
    accurate to rounding.
    """
    if a > b:
        raise ValueError(f"search interval must satisfy a <= b, got [{a}, {b}]")
    if not arg_tol > 0:
        raise ValueError(f"arg_tol must be positive, got {arg_tol}")
    lo, hi = a, b
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > arg_tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    best = (x, f(x))
    for edge in (a, b):
        fe = f(edge)
        if fe >= best[1]:
            best = (edge, fe)
    return best

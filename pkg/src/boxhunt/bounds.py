"""Closed-form speed-up limits and the Gamma-product inequality."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import mpmath

__all__ = [
    "Bound",
    "BoundKind",
    "uniform_bound",
    "adversarial_bound",
    "memoryless_bound",
    "gap_ratio",
    "asymptotic_gap",
    "GammaCheck",
    "gamma_product_check",
    "gamma_product_direct",
]


class BoundKind(str, enum.Enum):
    EXACT_OPTIMUM = "exact_optimum"
    ASYMPTOTIC_LOWER_BOUND = "asymptotic_lower_bound"


@dataclass(frozen=True)
class Bound:
    value: Fraction
    kind: BoundKind = BoundKind.EXACT_OPTIMUM

    def __float__(self) -> float:
        return float(self.value)


def _check_k(k: int, least: int = 1) -> None:
    if not isinstance(k, int) or k < least:
        raise ValueError(f"k must be an integer ≥ {least}, got {k!r}")


def uniform_bound(k: int) -> Bound:
    """Optimal non-coordinating speed-up for a uniformly placed treasure, k(k+1)/(3k-1)."""
    _check_k(k)
    return Bound(Fraction(k * (k + 1), 3 * k - 1))


def adversarial_bound(k: int) -> Bound:
    """Optimal speed-up against an adversarial placement, (k/4)(1+1/k)^2."""
    _check_k(k)
    return Bound(Fraction((k + 1) ** 2, 4 * k))


def memoryless_bound(k: int) -> Bound:
    """k/3: a limit lower bound only, not an optimum."""
    _check_k(k, 2)
    return Bound(Fraction(k, 3), BoundKind.ASYMPTOTIC_LOWER_BOUND)


def gap_ratio(k: int) -> Fraction:
    return uniform_bound(k).value / adversarial_bound(k).value


def asymptotic_gap(ks: Optional[Iterable[int]] = None):
    """Limit of uniform/adversarial as k grows (4/3).

    With ``ks`` also returns the finite-k ratios as ``[(k, ratio), ...]``.
    """
    limit = Fraction(4, 3)
    if ks is None:
        return limit
    return limit, [(k, gap_ratio(k)) for k in ks]


@dataclass(frozen=True)
class GammaCheck:
    a: int
    b: int
    phi: float
    lhs: float
    rhs: float
    holds: bool


_GAMMA_DPS = 40


def gamma_product_direct(a: int, b: int, phi: float) -> float:
    """prod_{i=a}^{b} i/(i+phi) by plain float multiplication."""
    return math.prod(i / (i + phi) for i in range(a, b + 1))


def gamma_product_check(a: int, b: int, phi: float, tol: float = 1e-12) -> GammaCheck:
    """Check prod_{i=a}^{b} i/(i+phi) <= (a/b)^phi.

    The product is evaluated as a ratio of Gamma functions in log space with
    ``_GAMMA_DPS`` significant digits; the comparison is also done at that
    precision so near-tight large-a cases are not decided by float noise.
    """
    if not (isinstance(a, int) and isinstance(b, int) and 1 <= a <= b):
        raise ValueError("need integers 1 <= a <= b")
    if not 0 < phi <= 1:
        raise ValueError("need 0 < phi <= 1")
    with mpmath.workdps(_GAMMA_DPS):
        p = mpmath.mpf(phi)
        log_lhs = (
            mpmath.loggamma(b + 1)
            - mpmath.loggamma(a)
            + mpmath.loggamma(a + p)
            - mpmath.loggamma(b + 1 + p)
        )
        log_rhs = p * (mpmath.log(a) - mpmath.log(b))
        lhs = mpmath.exp(log_lhs)
        rhs = mpmath.exp(log_rhs)
        holds = bool(lhs <= rhs + mpmath.mpf(tol))
    return GammaCheck(a, b, phi, float(lhs), float(rhs), holds)

"""Concentration parameter schedules and the admissible (s, sigma) windows.

The schedule attached to a concentration index n:

    kappa_n  = (log n)^(-delta1)
    eps_n    = c_moll / n
    t_n      = ((log n)^delta2 * n^(-(d/2 - s)))^sigma
    lambda_n = (kappa_n * n^(d/2 - s))^sigma

with 0 < delta1 < delta2 < 1, so that lambda_n t_n = (log n)^(sigma (delta2 - delta1))
exactly.  d = 3 is the case of interest; d in {1, 2} is a testing extension with
the same structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

from .errors import InvalidDeltas, InvalidIndex, InvalidRegime

DEFAULT_C_MOLL = 0.01  # the reference choice n * eps_n = 1/100
DEFAULT_DELTA1 = 0.05
DEFAULT_DELTA2 = 0.5


@dataclass(frozen=True)
class RegimeSpec:
    """The (s, sigma) pair plus schedule exponents shared by a whole run."""

    s: float
    sigma: float
    delta1: float = DEFAULT_DELTA1
    delta2: float = DEFAULT_DELTA2
    theta: float | None = None


@dataclass(frozen=True)
class ParameterSchedule:
    n: float
    s: float
    sigma: float
    delta1: float
    delta2: float
    c_moll: float
    dim: int
    kappa_n: float
    eps_n: float
    t_n: float
    lambda_n: float
    theta: float | None = None

    @property
    def concentration_exponent(self):
        """d/2 - s, the amplitude growth rate of the concentrated data."""
        return self.dim / 2.0 - self.s

    @property
    def phase(self):
        """lambda_n t_n = (log n)^(sigma (delta2 - delta1))."""
        return self.lambda_n * self.t_n


def make_schedule(n: float, s: float, sigma: float,
                  delta1: float = DEFAULT_DELTA1, delta2: float = DEFAULT_DELTA2,
                  c_moll: float = DEFAULT_C_MOLL, theta: float | None = None,
                  dim: int = 3) -> ParameterSchedule:
    """Evaluate the schedule at index n; requires n >= 3 so log n > 1."""
    if n < 3:
        raise InvalidIndex(f"need n >= 3 (so log n > 1), got {n}")
    if not (0.0 < delta1 < delta2 < 1.0):
        raise InvalidDeltas(f"need 0 < delta1 < delta2 < 1, got ({delta1}, {delta2})")
    if c_moll <= 0:
        raise ValueError("c_moll must be positive")
    log_n = math.log(n)
    gap = dim / 2.0 - s
    kappa = log_n ** (-delta1)
    eps = c_moll / n
    t_n = (log_n ** delta2 * n ** (-gap)) ** sigma
    lam = (kappa * n ** gap) ** sigma
    return ParameterSchedule(n=float(n), s=s, sigma=sigma, delta1=delta1, delta2=delta2,
                             c_moll=c_moll, dim=dim, kappa_n=kappa, eps_n=eps,
                             t_n=t_n, lambda_n=lam, theta=theta)


def schedule_for(regime: RegimeSpec, n: float, c_moll: float = DEFAULT_C_MOLL,
                 dim: int = 3) -> ParameterSchedule:
    return make_schedule(n, regime.s, regime.sigma, regime.delta1, regime.delta2,
                         c_moll=c_moll, theta=regime.theta, dim=dim)


@dataclass(frozen=True)
class RegimeCheck:
    s: float
    sigma: float
    s_critical: float
    lower: float
    valid: bool
    reasons: tuple = ()


def validate_regime(s: float, sigma: float) -> RegimeCheck:
    """Admissibility window: 1/2 <= sigma <= 2 and max{0, 3/2 - 2/(2 sigma - 1)} < s < 3/2 - 1/sigma."""
    s_c = 1.5 - 1.0 / sigma if sigma > 0 else -math.inf
    lower = max(0.0, 1.5 - 2.0 / (2.0 * sigma - 1.0)) if sigma > 0.5 else 0.0
    reasons = []
    if not 0.5 <= sigma <= 2.0:
        reasons.append(f"sigma = {sigma} outside [1/2, 2]")
    if s_c <= lower:
        reasons.append(f"window ({lower:.4g}, {s_c:.4g}) is empty for sigma = {sigma}")
    else:
        if not s > lower:
            reasons.append(f"s = {s} not above the lower edge {lower:.4g}")
        if not s < s_c:
            reasons.append(f"s = {s} not below the critical index {s_c:.4g}")
    return RegimeCheck(s=s, sigma=sigma, s_critical=s_c, lower=lower,
                       valid=not reasons, reasons=tuple(reasons))


def _require_valid(s, sigma):
    check = validate_regime(s, sigma)
    if not check.valid:
        raise InvalidRegime("; ".join(check.reasons))
    return check


def validate_inflation_deltas(s: float, sigma: float, delta1: float, delta2: float):
    """True iff s sigma (delta2 - delta1) > delta1; returns (ok, margin).

    The margin is the growth exponent of the predicted localized inflation
    rate (log n_k)^(s sigma (delta2 - delta1) - delta1).
    """
    _require_valid(s, sigma)
    margin = s * sigma * (delta2 - delta1) - delta1
    return margin > 0.0, margin


def theta_window(s: float, sigma: float) -> float:
    """Upper edge of the admissible perturbation exponent range (0, edge)."""
    return sigma * (1.5 - s) / 2.0 - 0.5


def validate_theta(s: float, sigma: float, theta: float) -> bool:
    """True iff 0 < theta < sigma (3/2 - s)/2 - 1/2 (strict on both sides)."""
    _require_valid(s, sigma)
    return 0.0 < theta < theta_window(s, sigma)


def default_theta(s: float, sigma: float) -> float:
    """Midpoint of the admissible window."""
    _require_valid(s, sigma)
    return 0.5 * theta_window(s, sigma)

"""Closed-form solutions of the cubic amplitude equation r' = alpha r (mu - r^2)."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from src.errors import ClosedFormDomainError


def escape_time(r0: float, mu: float, alpha: float) -> Optional[float]:
    """Time at which the cubic normal form escapes to infinity, if it does.

    Positive values are forward escapes (alpha < 0), negative values backward
    escapes (alpha > 0). Returns None when the solution exists for all time in
    both directions.
    """
    u0 = r0 * r0
    if alpha == 0 or u0 == 0:
        return None
    if mu == 0:
        return -1.0 / (2.0 * alpha * u0)
    ratio = u0 / (u0 - mu) if u0 != mu else math.inf
    if ratio <= 0 or not math.isfinite(ratio) or ratio == 1.0:
        return None
    return -math.log(ratio) / (2.0 * mu * alpha)


def closed_form_cubic(r0: float, mu: float, alpha: float, t):
    """r(t) = sqrt(mu r0^2 / ((mu - r0^2) e^{-2 mu alpha t} + r0^2)).

    ``t`` may be a scalar or an array. Raises ClosedFormDomainError, carrying
    the analytic escape time, when any requested time lies past the escape.
    """
    tt = np.asarray(t, dtype=np.float64)
    u0 = r0 * r0
    if mu == 0:
        numerator = np.full_like(tt, u0)
        denominator = 1.0 + 2.0 * alpha * u0 * tt
    else:
        numerator = np.full_like(tt, mu * u0)
        denominator = (mu - u0) * np.exp(-2.0 * mu * alpha * tt) + u0

    with np.errstate(divide="ignore", invalid="ignore"):
        squared = numerator / denominator
    if u0 > 0 and (np.any(denominator == 0) or np.any(~np.isfinite(squared)) or np.any(squared < 0)):
        raise ClosedFormDomainError(escape_time(r0, mu, alpha))

    result = np.sign(r0) * np.sqrt(np.where(u0 > 0, squared, 0.0))
    return float(result) if result.ndim == 0 else result

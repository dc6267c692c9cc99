"""Elementary bounding dynamics: sandwich recurrence, logistic bound, criteria."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model_core import CompetitionParams

__all__ = [
    "SandwichIterates",
    "sandwich",
    "logistic_upper_bound",
    "dichotomy_predicates",
]


@dataclass(frozen=True)
class SandwichIterates:
    n: int
    upper_u: np.ndarray
    upper_v: np.ndarray
    lower_u: np.ndarray
    lower_v: np.ndarray


def sandwich(p: CompetitionParams, n: int) -> SandwichIterates:
    """Affine bounding recurrence contracting onto (u*, v*) with ratio hk.

    upper_{n+1} = 1 - k*lower_v_n etc., seeded by upper=1, lower=(1-h, 1-k).
    """
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    uu = np.empty(n)
    uv = np.empty(n)
    lu = np.empty(n)
    lv = np.empty(n)
    uu[0] = uv[0] = 1.0
    lu[0] = 1.0 - p.h
    lv[0] = 1.0 - p.k
    for i in range(1, n):
        uu[i] = 1.0 - p.k * lv[i - 1]
        uv[i] = 1.0 - p.h * lu[i - 1]
        lu[i] = 1.0 - p.k * uv[i - 1]
        lv[i] = 1.0 - p.h * uu[i - 1]
    return SandwichIterates(n=n, upper_u=uu, upper_v=uv, lower_u=lu, lower_v=lv)


def logistic_upper_bound(initial: float, t: float) -> float:
    """Closed-form logistic solution u(t) = u0 e^t / (1 + u0(e^t - 1))."""
    if not initial > 0:
        raise DomainError(f"initial must be positive, got {initial}")
    et = math.exp(t)
    return initial * et / (1.0 + initial * (et - 1.0))


def dichotomy_predicates(
    p: CompetitionParams, g0: float, gamma: float
) -> dict:
    """Spreading criteria: guaranteed if g0 >= pi/(2 sqrt(1-k)) (boundary
    counts as guaranteed); a positive threshold gamma* is guaranteed to exist
    when g0 < pi/2.  The window between the two is indeterminate by theory."""
    thr_spread = math.pi / (2.0 * math.sqrt(1.0 - p.k))
    thr_small = math.pi / 2.0
    return {
        "guaranteed_spreading": g0 >= thr_spread,
        "small_domain": g0 < thr_small,
        "thresholds": (thr_spread, thr_small),
    }

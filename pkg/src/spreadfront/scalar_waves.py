"""Scalar half-line building blocks: the KPP semi-wave and the omega problem.

Both are two-point BVPs on [0, S_max] solved with second-order central
differences and Newton iteration from the linear-interpolant initial guess.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import NonConvergence, SpeedOutOfRange, DomainError

__all__ = ["ScalarProfile", "solve_kpp", "solve_omega"]

TAIL_TOL = 1e-8


@dataclass(frozen=True)
class ScalarProfile:
    grid: np.ndarray
    values: np.ndarray
    slope_at_0: float
    limit_at_infinity: float
    decay_exponent: float


def _newton_bvp(
    grid: np.ndarray,
    diff: float,
    c_drift: float,
    reaction,
    reaction_prime,
    y_right: float,
    tol: float = 1e-11,
    maxit: int = 60,
    y0: np.ndarray | None = None,
) -> np.ndarray:
    """Solve diff*y'' + c_drift*y' + reaction(y) = 0 with y(0)=0, y(S)=y_right.

    Damped Newton from a saturating-exponential initial guess; the damping
    halves the step until the residual norm does not grow.
    """
    n = grid.size
    hgrid = grid[1] - grid[0]
    # saturating guess with the right end behavior; scale 1/sqrt of the
    # linearized reaction strength near the limit
    if y0 is not None:
        y = y0.copy()
    else:
        kappa = math.sqrt(
            max(abs(reaction_prime(np.array([y_right]))[0]), 1e-6) / diff)
        y = y_right * (1.0 - np.exp(-kappa * grid))
    y[0] = 0.0
    y[-1] = y_right
    sub = diff / hgrid**2 - c_drift / (2.0 * hgrid)
    sup = diff / hgrid**2 + c_drift / (2.0 * hgrid)

    def resid(yv: np.ndarray) -> np.ndarray:
        yi = yv[1:-1]
        return (
            diff * (yv[:-2] - 2.0 * yi + yv[2:]) / hgrid**2
            + c_drift * (yv[2:] - yv[:-2]) / (2.0 * hgrid)
            + reaction(yi)
        )

    def relax(yv: np.ndarray, dt: float, sweeps: int) -> np.ndarray:
        # pseudo-transient smoothing: implicit linear part, explicit reaction;
        # marches toward the stable steady state to enter Newton's basin
        nu = dt * diff / hgrid**2
        cr = dt * c_drift / (2.0 * hgrid)
        ab = np.zeros((3, n - 2))
        ab[1, :] = 1.0 + 2.0 * nu
        ab[0, 1:] = -nu - cr
        ab[2, :-1] = -nu + cr
        for _ in range(sweeps):
            rhs = yv[1:-1] + dt * reaction(yv[1:-1])
            rhs[0] += (nu - cr) * yv[0]
            rhs[-1] += (nu + cr) * yv[-1]
            yv = yv.copy()
            yv[1:-1] = solve_banded((1, 1), ab, rhs)
        return yv

    def newton(yv: np.ndarray, iters: int) -> tuple[np.ndarray, float]:
        res = resid(yv)
        for _ in range(iters):
            rnorm = np.max(np.abs(res))
            if rnorm < tol:
                return yv, rnorm
            diag = -2.0 * diff / hgrid**2 + reaction_prime(yv[1:-1])
            ab = np.zeros((3, n - 2))
            ab[0, 1:] = sup
            ab[1, :] = diag
            ab[2, :-1] = sub
            delta = solve_banded((1, 1), ab, -res)
            lam = 1.0
            y_try, res_try = yv, res
            for _ in range(30):
                y_try = yv.copy()
                y_try[1:-1] += lam * delta
                res_try = resid(y_try)
                if np.max(np.abs(res_try)) < rnorm:
                    break
                lam *= 0.5
            yv, res = y_try, res_try
        return yv, float(np.max(np.abs(res)))

    y, rnorm = newton(y, maxit)
    if rnorm < tol:
        return y
    for _ in range(6):
        y = relax(y, 0.2, 400)
        y, rnorm = newton(y, maxit)
        if rnorm < tol:
            return y
    raise NonConvergence("scalar BVP Newton iteration did not converge")


def _one_sided_slope(grid: np.ndarray, y: np.ndarray) -> float:
    hgrid = grid[1] - grid[0]
    return (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * hgrid)


def solve_kpp(
    d: float, a: float, b: float, c: float,
    S_max: float | None = None, n: int | None = None,
) -> ScalarProfile:
    """Monotone front of d*x'' - c*x' + a*x(b-x) = 0 with x(0)=0, x(inf)=b.

    Solvable exactly for 0 <= c < 2*sqrt(abd).  decay_exponent records the
    closed-form rate (c - sqrt(c^2+4ab))/(2d); see the tail-fit tests for the
    measured rate when d != 1.
    """
    if not (d > 0 and a > 0 and b > 0):
        raise DomainError("d, a, b must be positive")
    cmax = 2.0 * math.sqrt(a * b * d)
    if not (0 <= c < cmax):
        raise SpeedOutOfRange(f"need 0 <= c < {cmax:.6g}, got c={c}")
    decay = (c - math.sqrt(c * c + 4.0 * a * b)) / (2.0 * d)
    # the measured tail rate, used only to size the domain
    decay_true = (c - math.sqrt(c * c + 4.0 * a * b * d)) / (2.0 * d)
    if S_max is None:
        S_max = min(400.0, max(20.0, 40.0 / abs(decay_true)))
    if n is None:
        n = max(800, int(S_max / 0.01))
    grid = np.linspace(0.0, S_max, n)

    def solve_at(guess: np.ndarray | None) -> np.ndarray:
        return _newton_bvp(
            grid, d, -c,
            lambda y: a * y * (b - y),
            lambda y: a * (b - 2.0 * y),
            y_right=b,
            y0=guess,
        )

    try:
        y = solve_at(None)
    except NonConvergence:
        # near the speed threshold the profile degenerates to a layer pinned
        # at the right boundary; seed Newton with exactly that shape
        kappa = math.sqrt(a * b / d)
        layer = b * np.maximum(1.0 - np.exp(-kappa * (grid - (S_max - 20.0 / kappa))),
                               0.0)
        y = solve_at(layer)
    return ScalarProfile(
        grid=grid,
        values=y,
        slope_at_0=_one_sided_slope(grid, y),
        limit_at_infinity=b,
        decay_exponent=decay,
    )


def solve_omega(
    d: float, c: float, r: float, h: float, u_star: float,
    S_max: float | None = None, n: int | None = None,
) -> ScalarProfile:
    """Monotone solution of d*w'' + c*w' + r(hu*-w)(1-hu*+w) = 0 on [0,inf).

    w(0)=0, w(inf)=h*u*; requires h*u* < 1 (automatic in weak competition).
    """
    if not h * u_star < 1:
        raise DomainError(f"need h*u_star < 1, got {h * u_star}")
    limit = h * u_star
    decay = (-c - math.sqrt(c * c + 4.0 * d * r)) / (2.0 * d)
    if S_max is None:
        S_max = min(400.0, max(20.0, 40.0 / abs(decay)))
    if n is None:
        n = max(800, int(S_max / 0.01))
    grid = np.linspace(0.0, S_max, n)
    y = _newton_bvp(
        grid, d, c,
        lambda y: r * (limit - y) * (1.0 - limit + y),
        lambda y: r * (-(1.0 - limit + y) + (limit - y)),
        y_right=limit,
    )
    # the true profile is strictly increasing; a violation means the
    # discretization is off
    if np.any(np.diff(y) < -1e-12):
        raise NonConvergence("omega profile lost strict monotonicity")
    return ScalarProfile(
        grid=grid,
        values=y,
        slope_at_0=_one_sided_slope(grid, y),
        limit_at_infinity=limit,
        decay_exponent=decay,
    )

"""Independent reference implementations used only by tests.

The shooting integrator, residual stencils, and fine-grid reference run share
no code with the production solvers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BlowUp, NonConvergence
from .model_core import CompetitionParams, equilibria
from .semiwave import SemiWaveProfile
from .stefan_sim import InitialData, SimOutcome, StefanConfig, simulate

__all__ = [
    "ResidualReport",
    "shoot_scalar",
    "shooting_solve",
    "residual",
    "fine_reference_run",
]


@dataclass(frozen=True)
class ResidualReport:
    sup_residual: float
    node_of_max: int
    per_equation: tuple[float, float]


def _scalar_rhs(kind: str, prm: dict):
    if kind == "kpp":
        d, a, b, c = prm["d"], prm["a"], prm["b"], prm["c"]

        def rhs(s, y):
            return [y[1], (c * y[1] - a * y[0] * (b - y[0])) / d]

        return rhs, b
    if kind == "omega":
        d, c, r, lim = prm["d"], prm["c"], prm["r"], prm["h"] * prm["u_star"]

        def rhs(s, y):
            return [y[1], (-c * y[1] - r * (lim - y[0]) * (1.0 - lim + y[0])) / d]

        return rhs, lim
    raise ValueError(f"unknown scalar problem kind {kind!r}")


def shoot_scalar(kind: str, prm: dict, slope_guess: float,
                 S_max: float = 40.0) -> float:
    """Integrate the scalar ODE from 0 with the guessed slope.

    Returns the deviation of the trajectory from the target limit at the
    point where it stops (S_max, or earlier if it leaves [-1, 2b]).
    """
    rhs, target = _scalar_rhs(kind, prm)

    def escape(s, y):
        return min(y[0] + 1.0, 2.0 * target - y[0])

    escape.terminal = True
    sol = solve_ivp(rhs, (0.0, S_max), [0.0, slope_guess], rtol=1e-10,
                    atol=1e-12, events=escape, dense_output=False)
    if sol.t_events[0].size and sol.t_events[0][0] < 0.5 * S_max:
        raise BlowUp(f"trajectory escaped at s={sol.t_events[0][0]:.4g}")
    return float(sol.y[0, -1] - target)


def _shot_sign(rhs, target: float, slope: float, S_max: float) -> int:
    """+1 if the trajectory overshoots the target level, -1 if it stalls.

    The connecting orbit is the separatrix between slopes whose trajectory
    crosses the target from below and slopes whose derivative dies first.
    """

    def crossed(s, y):
        return y[0] - target

    def stalled(s, y):
        return y[1]

    crossed.terminal = True
    crossed.direction = 1.0
    stalled.terminal = True
    stalled.direction = -1.0
    sol = solve_ivp(rhs, (0.0, S_max), [0.0, slope], rtol=1e-11, atol=1e-13,
                    events=[crossed, stalled])
    if sol.t_events[0].size:
        return 1
    if sol.t_events[1].size:
        return -1
    # reached S_max still climbing below the target: undershoot
    return -1


def shooting_solve(kind: str, prm: dict, S_max: float = 40.0,
                   tol: float = 1e-12, maxit: int = 100) -> float:
    """Separatrix slope by overshoot/undershoot bisection.

    A secant on the end-point deviation cannot work here: the connection is
    a saddle orbit, so any slope error grows exponentially along the
    integration and the deviation never reaches a small tolerance.  The
    crossing/stalling dichotomy is exact and bisects cleanly.
    """
    rhs, target = _scalar_rhs(kind, prm)
    lo = 1e-8 * target
    if _shot_sign(rhs, target, lo, S_max) > 0:
        raise NonConvergence("no undershooting slope found")
    hi = target
    tries = 0
    while _shot_sign(rhs, target, hi, S_max) < 0:
        hi *= 2.0
        tries += 1
        if tries > 60:
            raise NonConvergence("no overshooting slope found")
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)):
            return mid
        if _shot_sign(rhs, target, mid, S_max) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def residual(profile: SemiWaveProfile, p: CompetitionParams, c: float) -> ResidualReport:
    """Central-difference defect of the original two-equation system.

    Evaluated at interior nodes; the two nodes adjacent to s=0 are excluded
    (phi'' is one-sided there).
    """
    s, phi, psi = profile.s_grid, profile.phi, profile.psi
    h = s[1] - s[0]
    i0 = int(np.searchsorted(s, 0.0))
    idx = np.arange(1, s.size - 1)
    keep = np.abs(idx - i0) > 2
    idx = idx[keep]

    r_phi = (
        (phi[idx - 1] - 2.0 * phi[idx] + phi[idx + 1]) / h**2
        - c * (phi[idx + 1] - phi[idx - 1]) / (2.0 * h)
        + phi[idx] * (1.0 - phi[idx] - p.k * psi[idx])
    )
    # the phi equation only holds for s > 0; phi = 0 kills it for s < 0 anyway
    r_phi[s[idx] < 0] = 0.0
    r_psi = (
        p.d * (psi[idx - 1] - 2.0 * psi[idx] + psi[idx + 1]) / h**2
        - c * (psi[idx + 1] - psi[idx - 1]) / (2.0 * h)
        + p.r * psi[idx] * (1.0 - psi[idx] - p.h * phi[idx])
    )
    sup1 = float(np.max(np.abs(r_phi)))
    sup2 = float(np.max(np.abs(r_psi)))
    both = np.concatenate([np.abs(r_phi), np.abs(r_psi)])
    return ResidualReport(
        sup_residual=float(both.max()),
        node_of_max=int(idx[int(both.argmax()) % idx.size]),
        per_equation=(sup1, sup2),
    )


def fine_reference_run(
    p: CompetitionParams,
    gamma: float,
    init: InitialData,
    horizon: float,
    cfg: StefanConfig | None = None,
) -> SimOutcome:
    """Refined-grid twin of simulate: 4x grid, 8x smaller dt cap."""
    if cfg is None:
        cfg = StefanConfig()
    fine_cfg = replace(cfg, n_u=4 * cfg.n_u, dt_max=cfg.dt_max / 8.0)
    xi = np.linspace(0.0, 1.0, cfg.n_u + 1)
    xi_f = np.linspace(0.0, 1.0, fine_cfg.n_u + 1)
    u0f = np.interp(xi_f, xi, init.u0)
    u0f[-1] = 0.0
    dx_v = init.g0 / cfg.n_u if cfg.dx_v is None else cfg.dx_v
    x_v = dx_v * np.arange(init.v0.size)
    x_vf = (dx_v / 4.0) * np.arange(4 * (init.v0.size - 1) + 1)
    v0f = np.interp(x_vf, x_v, init.v0)
    fine_cfg = replace(fine_cfg, dx_v=dx_v / 4.0)
    init_f = InitialData(g0=init.g0, u0=u0f, v0=v0f, v_inf=init.v_inf)
    return simulate(p, gamma, init_f, horizon, fine_cfg)

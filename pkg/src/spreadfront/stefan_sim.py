"""Free-boundary time integration via the front-fixing transform xi = x/g(t).

u lives on a fixed unit grid in xi with a 1/g^2 diffusion coefficient and a
xi*g_dot/g advection term; v lives on a physical grid [0, L] that auto-grows
ahead of the front.  Diffusion is implicit (tridiagonal), reaction and
advection explicit, and the Stefan law g' = -gamma*(1/g)*d_xi u(1) uses a
second-order one-sided stencil with one fixed-point correction per step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import (
    BracketError,
    CFLViolation,
    DomainError,
    StepRejected,
    UndecidedAtHorizon,
)
from .model_core import CompetitionParams

__all__ = [
    "StefanConfig",
    "InitialData",
    "FreeBoundaryState",
    "SimOutcome",
    "make_initial_data",
    "step",
    "simulate",
    "classify_threshold_gamma",
]


@dataclass(frozen=True)
class StefanConfig:
    n_u: int = 800
    dt_max: float = 0.05
    cfl: float = 0.5
    out_dt: float = 0.5
    vanish_tol: float = 1e-4
    plateau_tol: float = 1e-5
    plateau_window: float = 10.0
    v_margin: float = 20.0  # L0 = g0 + v_margin*sqrt(d/r)
    regrow_gap: float = 10.0  # double L when g > L - regrow_gap
    dx_v: float | None = None  # default g0/n_u
    skip_v: bool = False  # pure Fisher free-boundary run (u only)
    reaction_off: bool = False  # test hook: drop all reaction terms
    eps_mono: float = 1e-9
    stop_on_classify: bool = False
    dt_min: float = 1e-9


@dataclass(frozen=True)
class InitialData:
    g0: float
    u0: np.ndarray  # samples on uniform [0, g0], n_u+1 nodes
    v0: np.ndarray  # samples on uniform [0, L0]
    v_inf: float

    def __post_init__(self) -> None:
        if not self.g0 > 0:
            raise DomainError(f"g0 must be positive, got {self.g0}")
        u0, v0 = self.u0, self.v0
        if u0[-1] != 0.0:
            raise DomainError("u0 must vanish at the front x=g0")
        if np.any(u0[:-1] <= 0):
            raise DomainError("u0 must be positive on [0, g0)")
        du0 = (-3 * u0[0] + 4 * u0[1] - u0[2]) / 2.0
        if abs(du0) > 1e-2 * max(1.0, np.max(u0)):
            raise DomainError("discrete u0'(0) must be ~0 (zero-flux axis)")
        if np.any(v0 <= 0) or not self.v_inf > 0:
            raise DomainError("v0 must be positive with positive far field")
        tail = v0[v0.size // 2:]
        if tail.min() <= 0:
            raise DomainError("liminf of v0 over the tail must be positive")


@dataclass
class FreeBoundaryState:
    t: float
    g: float
    u_hat: np.ndarray  # on xi in [0,1], n_u+1 nodes, u_hat[-1] = 0
    v: np.ndarray      # on [0, L], spacing dx_v
    dx_v: float
    g_dot: float = 0.0


@dataclass(frozen=True)
class SimOutcome:
    classification: str  # "Spreading" | "Vanishing" | "Undecided"
    g_series: np.ndarray  # columns (t, g)
    u_sup_series: np.ndarray
    speed_estimate: float
    final_state: FreeBoundaryState
    series: dict = field(default_factory=dict)  # t, g, g_dot, u_sup, u_at_0, v_at_0


def make_initial_data(
    g0: float,
    amplitude: float = 0.5,
    v_inf: float = 1.0,
    kind: str = "bump",
    cfg: StefanConfig | None = None,
    p: CompetitionParams | None = None,
    u_table: np.ndarray | None = None,
) -> InitialData:
    """Standard initial data: a positive bump for u0 and constant v0 = v_inf."""
    if cfg is None:
        cfg = StefanConfig()
    if not g0 > 0:
        raise DomainError(f"g0 must be positive, got {g0}")
    x = np.linspace(0.0, g0, cfg.n_u + 1)
    if kind == "bump":
        u0 = amplitude * (1.0 - (x / g0) ** 2)
    elif kind == "cosine":
        u0 = amplitude * np.cos(0.5 * math.pi * x / g0)
    elif kind == "table":
        if u_table is None:
            raise DomainError("kind='table' needs u_table samples on [0, g0]")
        xi_t = np.linspace(0.0, 1.0, u_table.size)
        u0 = np.interp(x / g0, xi_t, u_table)
    else:
        raise DomainError(f"unknown initial-data kind {kind!r}")
    u0[-1] = 0.0
    dr = (p.d / p.r) if p is not None else 1.0
    L0 = g0 + cfg.v_margin * math.sqrt(dr)
    dx_v = cfg.dx_v if cfg.dx_v is not None else g0 / cfg.n_u
    n_v = int(math.ceil(L0 / dx_v)) + 1
    v0 = np.full(n_v, v_inf)
    return InitialData(g0=g0, u0=u0, v0=v0, v_inf=v_inf)


def _front_gradient(u_hat: np.ndarray, dxi: float) -> float:
    # second-order one-sided stencil at xi=1 (u_hat[-1] = 0)
    return (3.0 * u_hat[-1] - 4.0 * u_hat[-2] + u_hat[-3]) / (2.0 * dxi)


def _implicit_diffusion(u: np.ndarray, nu: float, rhs_extra: np.ndarray,
                        left_neumann: bool, right_dirichlet: float | None) -> np.ndarray:
    """Solve (I - nu*D2) u_new = u + rhs_extra with the stated BCs.

    nu = dt*coef/dx^2.  Neumann ends use mirrored ghosts; a Dirichlet right
    end pins the last node.
    """
    n = u.size
    ab = np.zeros((3, n))
    ab[1, :] = 1.0 + 2.0 * nu
    ab[0, 1:] = -nu
    ab[2, :-1] = -nu
    b = u + rhs_extra
    if left_neumann:
        ab[0, 1] = -2.0 * nu  # ghost u[-1] = u[1]
    if right_dirichlet is not None:
        ab[1, -1] = 1.0
        ab[0, -1] = 0.0
        ab[2, -2] = 0.0
        b[-1] = right_dirichlet
    else:
        ab[2, -2] = -2.0 * nu  # Neumann right, ghost u[n] = u[n-2]
    return solve_banded((1, 1), ab, b)


def _advance_u(
    u_hat: np.ndarray, g_new: float, g_dot: float, dt: float, dxi: float,
    p: CompetitionParams, v_on_u: np.ndarray, reaction_off: bool,
) -> np.ndarray:
    xi = np.linspace(0.0, 1.0, u_hat.size)
    adv = np.zeros_like(u_hat)
    adv[1:-1] = (g_dot / g_new) * xi[1:-1] * (u_hat[2:] - u_hat[:-2]) / (2.0 * dxi)
    if reaction_off:
        react = np.zeros_like(u_hat)
    else:
        react = u_hat * (1.0 - u_hat - p.k * v_on_u)
    rhs = dt * (adv + react)
    nu = dt / (g_new * g_new * dxi * dxi)
    u_new = _implicit_diffusion(u_hat, nu, rhs, left_neumann=True, right_dirichlet=0.0)
    return u_new


def step(
    state: FreeBoundaryState,
    p: CompetitionParams,
    gamma: float,
    dt: float,
    cfg: StefanConfig | None = None,
) -> FreeBoundaryState:
    """One IMEX step of (u_hat, v, g)."""
    if cfg is None:
        cfg = StefanConfig()
    n_u = state.u_hat.size - 1
    dxi = 1.0 / n_u
    u_hat, g, v = state.u_hat, state.g, state.v

    if cfg.skip_v:
        v_on_u = np.zeros_like(u_hat)
    else:
        x_u_old = np.linspace(0.0, 1.0, u_hat.size) * g
        x_v = state.dx_v * np.arange(v.size)
        v_on_u = np.interp(x_u_old, x_v, v)

    # predictor front speed from the current level
    grad0 = _front_gradient(u_hat, dxi)
    gdot0 = -gamma * grad0 / g
    g1 = g + dt * gdot0
    u_new = _advance_u(u_hat, g1, gdot0, dt, dxi, p, v_on_u, cfg.reaction_off)

    # corrected front speed from the new u level
    grad1 = _front_gradient(u_new, dxi)
    gdot1 = -gamma * grad1 / g1
    g_new = g + dt * gdot1
    if gdot1 < -cfg.eps_mono * max(1.0, gamma):
        raise StepRejected(f"front retreated: g_dot = {gdot1:.3e}")

    if cfg.skip_v:
        v_new = v
    else:
        x_v = state.dx_v * np.arange(v.size)
        u_on_v = np.interp(x_v / g_new, np.linspace(0.0, 1.0, u_new.size), u_new,
                           right=0.0)
        u_on_v[x_v > g_new] = 0.0
        if cfg.reaction_off:
            react_v = np.zeros_like(v)
        else:
            react_v = p.r * v * (1.0 - v - p.h * u_on_v)
        nu_v = p.d * dt / (state.dx_v ** 2)
        v_new = _implicit_diffusion(v, nu_v, dt * react_v,
                                    left_neumann=True, right_dirichlet=None)

    return FreeBoundaryState(
        t=state.t + dt, g=g_new, u_hat=u_new, v=v_new,
        dx_v=state.dx_v, g_dot=gdot1,
    )


def _grow_v(state: FreeBoundaryState, cfg: StefanConfig) -> FreeBoundaryState:
    L = state.dx_v * (state.v.size - 1)
    if state.g <= L - cfg.regrow_gap:
        return state
    n_extra = state.v.size - 1  # double the domain
    pad = np.full(n_extra, state.v[-1])
    return FreeBoundaryState(
        t=state.t, g=state.g, u_hat=state.u_hat,
        v=np.concatenate([state.v, pad]), dx_v=state.dx_v, g_dot=state.g_dot,
    )


def _pick_dt(state: FreeBoundaryState, p: CompetitionParams, cfg: StefanConfig) -> float:
    n_u = state.u_hat.size - 1
    dx_phys = state.g / n_u
    dt = cfg.dt_max
    if abs(state.g_dot) > 0:
        dt = min(dt, cfg.cfl * dx_phys / abs(state.g_dot))
    # explicit reaction stability budget (decay rates bounded by these)
    react_bound = max(1.0 + p.k, p.r * (1.0 + p.h)) * 2.0
    dt = min(dt, 0.5 / react_bound)
    if dt < cfg.dt_min:
        raise CFLViolation(f"required dt {dt:.3e} below dt_min")
    return dt


def simulate(
    p: CompetitionParams,
    gamma: float,
    init: InitialData,
    horizon: float,
    cfg: StefanConfig | None = None,
) -> SimOutcome:
    """Run to the horizon with adaptive dt and classify the outcome.

    Spreading once g exceeds pi/(2*sqrt(1-k)); Vanishing once sup u_hat drops
    below vanish_tol with a plateaued front; otherwise Undecided.
    """
    if cfg is None:
        cfg = StefanConfig()
    dx_v = init.g0 / cfg.n_u if cfg.dx_v is None else cfg.dx_v
    u_hat = init.u0.copy()  # u0 sampled on [0,g0] maps directly to xi-grid
    state = FreeBoundaryState(t=0.0, g=init.g0, u_hat=u_hat, v=init.v0.copy(),
                              dx_v=float(dx_v))
    # initial front speed estimate for dt control
    state.g_dot = -gamma * _front_gradient(u_hat, 1.0 / cfg.n_u) / init.g0

    threshold = math.pi / (2.0 * math.sqrt(1.0 - p.k))
    M = max(1.0, float(np.max(init.u0)), float(np.max(init.v0)))

    rec = {k: [] for k in ("t", "g", "g_dot", "u_sup", "u_at_0", "v_at_0")}

    def record(s: FreeBoundaryState) -> None:
        rec["t"].append(s.t)
        rec["g"].append(s.g)
        rec["g_dot"].append(s.g_dot)
        rec["u_sup"].append(float(np.max(s.u_hat)))
        rec["u_at_0"].append(float(s.u_hat[0]))
        rec["v_at_0"].append(float(s.v[0]) if not cfg.skip_v else math.nan)

    record(state)
    next_out = cfg.out_dt
    classification = "Undecided"
    while state.t < horizon - 1e-12:
        dt = min(_pick_dt(state, p, cfg), horizon - state.t)
        # land exactly on output times so series are grid-independent
        if state.t + dt > next_out - 1e-12:
            dt = next_out - state.t
        state = step(state, p, gamma, dt, cfg)
        if not cfg.skip_v:
            state = _grow_v(state, cfg)
        if np.max(state.u_hat) > M * 1.5 or (not cfg.skip_v and np.max(state.v) > M * 1.5):
            raise StepRejected("a priori bound violated; step too large")
        if state.t >= next_out - 1e-12:
            record(state)
            next_out += cfg.out_dt
            t_arr = np.array(rec["t"])
            if classification == "Undecided" and state.g > threshold:
                classification = "Spreading"
                if cfg.stop_on_classify:
                    break
            if classification == "Undecided":
                win = t_arr >= state.t - cfg.plateau_window
                if (
                    state.t > cfg.plateau_window
                    and np.max(rec["u_sup"][-win.sum():]) < cfg.vanish_tol
                    and np.max(np.abs(rec["g_dot"][-win.sum():])) < cfg.plateau_tol
                ):
                    classification = "Vanishing"
                    break

    t_arr = np.array(rec["t"])
    g_arr = np.array(rec["g"])
    speed = math.nan
    if classification == "Spreading" and t_arr[-1] > 0:
        half = t_arr >= 0.5 * t_arr[-1]
        if half.sum() >= 2:
            speed = float(np.polyfit(t_arr[half], g_arr[half], 1)[0])
    return SimOutcome(
        classification=classification,
        g_series=np.column_stack([t_arr, g_arr]),
        u_sup_series=np.array(rec["u_sup"]),
        speed_estimate=speed,
        final_state=state,
        series={k: np.array(v) for k, v in rec.items()},
    )


def classify_threshold_gamma(
    p: CompetitionParams,
    init: InitialData,
    cfg: StefanConfig | None = None,
    T_cls: float = 150.0,
    gamma_tol: float = 0.05,
    bracket: tuple[float, float] = (1e-3, 4.0),
) -> float:
    """Threshold gamma* separating vanishing from spreading, by bisection.

    Returns 0 immediately when g0 already guarantees spreading.  gamma_tol is
    relative to the upper bracket end.
    """
    if cfg is None:
        cfg = StefanConfig()
    cfg_cls = StefanConfig(**{**cfg.__dict__, "stop_on_classify": True})
    threshold = math.pi / (2.0 * math.sqrt(1.0 - p.k))
    if init.g0 >= threshold:
        return 0.0

    def spreads(gamma: float) -> bool:
        out = simulate(p, gamma, init, T_cls, cfg_cls)
        if out.classification == "Undecided":
            raise UndecidedAtHorizon(
                f"gamma={gamma:.6g} undecided at T={T_cls}; raise T_cls"
            )
        return out.classification == "Spreading"

    lo, hi = bracket
    tries = 0
    while spreads(lo):
        lo /= 4.0
        tries += 1
        if tries > 8:
            raise BracketError("no vanishing endpoint found for gamma bracket")
    tries = 0
    while not spreads(hi):
        hi *= 4.0
        tries += 1
        if tries > 8:
            raise BracketError("no spreading endpoint found for gamma bracket")
    while hi - lo > gamma_tol * hi:
        mid = 0.5 * (lo + hi)
        if spreads(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)

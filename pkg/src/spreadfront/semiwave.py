"""Cooperative semi-wave system: monotone kernel iteration, c*, and c_gamma.

The original pair (phi, psi) connects (0,1) to the coexistence state
(u*, v*), with phi identically zero for s <= 0.  The solver works in the
cooperative variables (phi~, psi~) = (phi, 1-psi), whose monotone fixed-point
operator F is built from one-sided exponential kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import lfilter
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import (
    BracketError,
    DomainError,
    FitError,
    NonConvergence,
    NumericalError,
    QuadratureError,
)
from .model_core import CompetitionParams, equilibria, kernel_exponents, linearization_roots
from .scalar_waves import solve_kpp, solve_omega

__all__ = [
    "SemiWaveConfig",
    "SemiWaveProfile",
    "NoNontrivialSolution",
    "IterationState",
    "build_upper_solution",
    "apply_F",
    "solve_semiwave",
    "critical_speed",
    "speed_for_gamma",
    "perturbed_speed",
    "decay_fit",
]


@dataclass(frozen=True)
class SemiWaveConfig:
    n: int = 4000
    s_span: float | None = None  # override for S_left = S_right; None = auto
    fp_tol: float = 1e-8
    c_tol: float = 1e-3
    trivial_frac: float = 1e-3  # trivial_tol = trivial_frac * u_star
    residual_tol: float = 1e-6
    sweep_cap: int = 100_000
    newton_polish: bool = True
    newton_tol: float = 1e-10
    newton_maxit: int = 40
    tail_tol: float = 1e-4
    # fraction of [0, S_right] beyond which a converged front counts as escaped
    escape_frac: float = 0.8
    # sweeps between drift checkpoints; the drift classifier needs
    # drift_warmup sweeps of history before it may declare front escape
    drift_check: int = 1000
    drift_warmup: int = 30_000


@dataclass(frozen=True)
class SemiWaveProfile:
    c: float
    s_grid: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    phi_slope_at_0: float
    decay_rate: float
    sweeps: int = 0


@dataclass(frozen=True)
class NoNontrivialSolution:
    """Returned when the branch has collapsed (c >= c*)."""

    c: float
    sup_phi: float
    sweeps: int = 0


@dataclass
class IterationState:
    s_grid: np.ndarray
    phi_tilde: np.ndarray
    psi_tilde: np.ndarray
    upper: tuple[np.ndarray, np.ndarray]
    lower: tuple[np.ndarray, np.ndarray] | None
    beta: float
    sweep_count: int = 0


def _beta(p: CompetitionParams) -> float:
    return max(1.0 + p.k, p.r * (1.0 + p.h))


def _f1(p: CompetitionParams, phi_t: np.ndarray, psi_t: np.ndarray) -> np.ndarray:
    return phi_t * (1.0 - p.k - phi_t + p.k * psi_t)


def _f2(p: CompetitionParams, phi_t: np.ndarray, psi_t: np.ndarray) -> np.ndarray:
    return p.r * (1.0 - psi_t) * (p.h * phi_t - psi_t)


def _make_grid(S_left: float, S_right: float, n: int) -> tuple[np.ndarray, int]:
    """Uniform grid containing s=0 as a node; returns (grid, index of 0)."""
    ds = (S_left + S_right) / (n - 1)
    n_neg = int(round(S_left / ds))
    n_pos = n - 1 - n_neg
    grid = ds * np.arange(-n_neg, n_pos + 1)
    return grid, n_neg


def _default_span(p: CompetitionParams, c: float) -> float:
    hat = linearization_roots(p, c).hat_mu
    return max(60.0, 40.0 / abs(hat[1]))


def build_upper_solution(
    p: CompetitionParams, S_left: float, S_right: float, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Upper solution pair on the cooperative scale.

    phi_bar is the c=0 KPP front of chi'' + chi(u*-chi) = 0 extended by zero
    to s < 0; psi_bar is h*u* minus the reflected omega profile for s < 0 and
    the constant h*u* for s >= 0.
    """
    eq = equilibria(p)
    us = eq.u_star
    grid, i0 = _make_grid(S_left, S_right, n)
    chi = solve_kpp(1.0, 1.0, us, 0.0, S_max=max(S_right, 40.0 / math.sqrt(us)))
    omega = solve_omega(p.d, 0.0, p.r, p.h, us, S_max=max(S_left, 40.0))
    phi_bar = np.zeros_like(grid)
    phi_bar[i0:] = np.interp(grid[i0:], chi.grid, chi.values, right=us)
    psi_bar = np.full_like(grid, p.h * us)
    psi_bar[:i0] = p.h * us - np.interp(-grid[:i0], omega.grid, omega.values,
                                        right=p.h * us)
    return phi_bar, psi_bar


class _KernelOperator:
    """Applies F = (F1, F2) on a fixed grid for fixed (p, c).

    Integrals of exp(lambda*(s-xi)) against piecewise-linear H are evaluated
    exactly segment by segment; the resulting one-step recurrences run through
    scipy.signal.lfilter.  Constant extension of H beyond S_right supplies the
    analytic right tails; the left tail (psi~ -> 0) is dropped (Dirichlet 0).
    """

    def __init__(self, p: CompetitionParams, c: float, grid: np.ndarray, i0: int):
        self.p = p
        self.c = c
        self.grid = grid
        self.i0 = i0
        self.ds = grid[1] - grid[0]
        self.beta = _beta(p)
        eq = equilibria(p)
        self.u_star = eq.u_star
        roots = kernel_exponents(1.0, p.d, c, self.beta)
        self.lam1, self.lam2 = roots.lambda1, roots.lambda2
        self.mu1, self.mu2 = roots.mu1, roots.mu2
        self._w = {
            lam: self._weights(lam, self.ds)
            for lam in (self.lam1, self.mu1)
        }
        self._wb = {
            lam: self._weights_back(lam, self.ds)
            for lam in (self.lam2, self.mu2)
        }

    @staticmethod
    def _weights(lam: float, h: float) -> tuple[float, float, float]:
        # forward sweep: A_i = E*A_{i-1} + w0*H_{i-1} + w1*H_i, lam < 0
        E = math.exp(lam * h)
        em1 = math.expm1(lam * h)
        w1 = (em1 - lam * h) / (lam * lam * h)
        w0 = em1 / lam - w1
        return E, w0, w1

    @staticmethod
    def _weights_back(lam: float, h: float) -> tuple[float, float, float]:
        # backward sweep: B_i = E*B_{i+1} + q0*H_i + q1*H_{i+1}, lam > 0
        E = math.exp(-lam * h)
        em1 = -math.expm1(-lam * h)  # 1 - exp(-lam h)
        q1 = (em1 - lam * h * math.exp(-lam * h)) / (lam * lam * h)
        q0 = em1 / lam - q1
        return E, q0, q1

    @staticmethod
    def _forward(H: np.ndarray, E: float, w0: float, w1: float) -> np.ndarray:
        u = np.empty_like(H)
        u[0] = 0.0
        u[1:] = w0 * H[:-1] + w1 * H[1:]
        return lfilter([1.0], [1.0, -E], u)

    @staticmethod
    def _backward(H: np.ndarray, E: float, q0: float, q1: float) -> np.ndarray:
        Hr = H[::-1]
        u = np.empty_like(Hr)
        u[0] = 0.0
        u[1:] = q0 * Hr[1:] + q1 * Hr[:-1]
        return lfilter([1.0], [1.0, -E], u)[::-1]

    def apply(self, phi_t: np.ndarray, psi_t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p, beta = self.p, self.beta
        i0 = self.i0
        s_pos = self.grid[i0:]
        H1 = beta * phi_t[i0:] + _f1(p, phi_t[i0:], psi_t[i0:])
        H2 = beta * psi_t + _f2(p, phi_t, psi_t)

        lam1, lam2 = self.lam1, self.lam2
        A = self._forward(H1, *self._w[lam1])
        B = self._backward(H1, *self._wb[lam2])
        tailB = (H1[-1] / lam2) * np.exp(lam2 * (s_pos - s_pos[-1]))
        Ctot = B[0] + tailB[0]
        F1_pos = (A + B + tailB - np.exp(lam1 * s_pos) * Ctot) / (lam2 - lam1)

        mu1, mu2 = self.mu1, self.mu2
        P = self._forward(H2, *self._w[mu1])
        Q = self._backward(H2, *self._wb[mu2])
        tailQ = (H2[-1] / mu2) * np.exp(mu2 * (self.grid - self.grid[-1]))
        F2 = (P + Q + tailQ) / (p.d * (mu2 - mu1))

        F1 = np.zeros_like(phi_t)
        F1[i0:] = F1_pos
        if not (np.all(np.isfinite(F1)) and np.all(np.isfinite(F2))):
            raise QuadratureError("kernel integrals produced non-finite values")
        np.clip(F1, 0.0, self.u_star, out=F1)
        np.clip(F2, 0.0, p.h * self.u_star, out=F2)
        return F1, F2


def apply_F(state: IterationState, p: CompetitionParams, c: float) -> IterationState:
    """One sweep of the monotone operator; output clamped to [0,u*]x[0,hu*]."""
    i0 = int(np.searchsorted(state.s_grid, 0.0))
    op = _KernelOperator(p, c, state.s_grid, i0)
    phi_new, psi_new = op.apply(state.phi_tilde, state.psi_tilde)
    return IterationState(
        s_grid=state.s_grid,
        phi_tilde=phi_new,
        psi_tilde=psi_new,
        upper=state.upper,
        lower=state.lower,
        beta=state.beta,
        sweep_count=state.sweep_count + 1,
    )


def _newton_polish(
    p: CompetitionParams,
    c: float,
    grid: np.ndarray,
    i0: int,
    phi_t: np.ndarray,
    psi_t: np.ndarray,
    cfg: SemiWaveConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Newton on the central-difference ODE system.

    Dirichlet data are taken from the converged iterate at both ends (and
    phi~ = 0 for s <= 0), so the polish does not alter the collapse
    diagnostics near c*.
    """
    us = equilibria(p).u_star
    h = grid[1] - grid[0]
    n = grid.size
    phi = phi_t.copy()
    psi = psi_t.copy()
    # unknown indices
    ip = np.arange(i0 + 1, n - 1)  # phi~ interior (s > 0)
    iq = np.arange(1, n - 1)       # psi~ interior
    np_u, nq_u = ip.size, iq.size

    def residuals() -> tuple[np.ndarray, np.ndarray]:
        rp = (
            (phi[ip - 1] - 2.0 * phi[ip] + phi[ip + 1]) / h**2
            - c * (phi[ip + 1] - phi[ip - 1]) / (2.0 * h)
            + _f1(p, phi[ip], psi[ip])
        )
        rq = (
            p.d * (psi[iq - 1] - 2.0 * psi[iq] + psi[iq + 1]) / h**2
            - c * (psi[iq + 1] - psi[iq - 1]) / (2.0 * h)
            + _f2(p, phi[iq], psi[iq])
        )
        return rp, rq

    sub_p = 1.0 / h**2 + c / (2.0 * h)
    sup_p = 1.0 / h**2 - c / (2.0 * h)
    sub_q = p.d / h**2 + c / (2.0 * h)
    sup_q = p.d / h**2 - c / (2.0 * h)

    jp = np.arange(np_u)
    jq = np.arange(nq_u)
    nu = np_u + nq_u
    for _ in range(cfg.newton_maxit):
        rp, rq = residuals()
        res = max(np.max(np.abs(rp)), np.max(np.abs(rq)))
        if res < cfg.newton_tol:
            break
        # phi~ block: unknown j <-> node ip[j]; psi~ block offset np_u,
        # unknown np_u + (node-1) <-> psi~ at node
        dfdp = 1.0 - p.k - 2.0 * phi[ip] + p.k * psi[ip]
        dfdq = p.k * phi[ip]
        dgdp = p.r * (1.0 - psi[iq]) * p.h
        dgdq = p.r * (-(p.h * phi[iq] - psi[iq]) - (1.0 - psi[iq]))
        rows = [jp, jp[1:], jp[:-1], jp,
                np_u + jq, np_u + jq[1:], np_u + jq[:-1]]
        cols = [jp, jp[1:] - 1, jp[:-1] + 1, np_u + (ip - 1),
                np_u + jq, np_u + jq[1:] - 1, np_u + jq[:-1] + 1]
        vals = [np.full(np_u, -2.0 / h**2) + dfdp,
                np.full(np_u - 1, sub_p), np.full(np_u - 1, sup_p), dfdq,
                np.full(nq_u, -2.0 * p.d / h**2) + dgdq,
                np.full(nq_u - 1, sub_q), np.full(nq_u - 1, sup_q)]
        # psi~ rows couple to phi~ only where phi~ is an unknown (node > i0)
        mask = iq > i0
        rows.append(np_u + jq[mask])
        cols.append(iq[mask] - (i0 + 1))
        vals.append(dgdp[mask])
        J = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(nu, nu),
        )
        delta = spsolve(J, -np.concatenate([rp, rq]))
        phi[ip] += delta[:np_u]
        psi[iq] += delta[np_u:]
    return phi, psi


def _front_index(phi_t: np.ndarray, level: float) -> int:
    above = np.nonzero(phi_t >= level)[0]
    return int(above[0]) if above.size else phi_t.size - 1


def _front_escaping(
    history: list[tuple[int, int, float]],
    ds: float,
    cfg: SemiWaveConfig,
    sup_phi: float,
    u_star: float,
) -> bool:
    """True when the iterate is a front translating rightward forever.

    At marginal speeds (c at or just above the existence threshold) the
    iteration neither collapses nor settles: the half-height point advances
    every checkpoint while the sweep-to-sweep change decays like a power law
    instead of geometrically.  Three signs together trigger the call: the
    plateau behind the front is intact, the front advanced over both a long
    and a recent window, and a geometric extrapolation of the change puts
    convergence beyond twice the sweep budget.
    """
    if sup_phi <= 0.5 * u_star or len(history) < 21:
        return False
    s_now, f_now, ch_now = history[-1]
    _, f_long, _ = history[-21]
    s_mid, f_mid, ch_mid = history[-6]
    if (f_now - f_long) * ds < 1.0 or (f_now - f_mid) * ds < 0.3:
        return False
    if ch_now >= ch_mid:
        return True
    rate = math.log(ch_now / ch_mid) / (s_now - s_mid)
    projected = s_now + math.log(cfg.fp_tol / ch_now) / rate
    return projected > 2.0 * cfg.sweep_cap


def solve_semiwave(
    p: CompetitionParams, c: float, cfg: SemiWaveConfig | None = None
) -> SemiWaveProfile | NoNontrivialSolution:
    """Monotone kernel iteration from the upper solution, plus Newton polish.

    Returns NoNontrivialSolution when the iterate collapses below
    trivial_tol = trivial_frac*u* or the front escapes to the right edge of
    the truncated domain (the c >= c* regime).
    """
    if cfg is None:
        cfg = SemiWaveConfig()
    if c < 0:
        raise DomainError(f"c must be nonnegative, got {c}")
    eq = equilibria(p)
    us = eq.u_star
    trivial_tol = cfg.trivial_frac * us
    span = cfg.s_span if cfg.s_span is not None else _default_span(p, c)
    grid, i0 = _make_grid(span, span, cfg.n)
    phi_bar, psi_bar = build_upper_solution(p, span, span, cfg.n)
    op = _KernelOperator(p, c, grid, i0)

    phi_t, psi_t = phi_bar.copy(), psi_bar.copy()
    sweeps = 0
    ds = grid[1] - grid[0]
    escape_ix = i0 + int(cfg.escape_frac * (grid.size - 1 - i0))
    # drift history: (sweep, front index, change) every drift_check sweeps,
    # used to recognize a front that translates forever (marginal c >= c*)
    history: list[tuple[int, int, float]] = []
    while True:
        phi_new, psi_new = op.apply(phi_t, psi_t)
        # monotone scheme: iterates must not increase (tolerate rounding)
        over = max(np.max(phi_new - phi_t), np.max(psi_new - psi_t))
        if over > 1e-8:
            raise NumericalError(f"monotone iteration increased by {over:.3e}")
        np.minimum(phi_new, phi_t, out=phi_new)
        np.minimum(psi_new, psi_t, out=psi_new)
        change = max(np.max(phi_t - phi_new), np.max(psi_t - psi_new))
        phi_t, psi_t = phi_new, psi_new
        sweeps += 1
        sup_phi = float(phi_t.max())
        if sup_phi < trivial_tol:
            return NoNontrivialSolution(c=c, sup_phi=sup_phi, sweeps=sweeps)
        if change < cfg.fp_tol:
            break
        if sweeps % cfg.drift_check == 0:
            fi = _front_index(phi_t, 0.5 * sup_phi)
            history.append((sweeps, fi, change))
            if fi >= escape_ix:
                return NoNontrivialSolution(c=c, sup_phi=sup_phi, sweeps=sweeps)
            if sweeps >= cfg.drift_warmup and _front_escaping(
                history, ds, cfg, sup_phi, us
            ):
                return NoNontrivialSolution(c=c, sup_phi=sup_phi, sweeps=sweeps)
        if sweeps >= cfg.sweep_cap:
            fi = _front_index(phi_t, 0.5 * sup_phi)
            drifting = (
                len(history) >= 6
                and (fi - history[-6][1]) * ds >= 0.5
                and sup_phi > 0.5 * us
            )
            if fi >= escape_ix or drifting:
                return NoNontrivialSolution(c=c, sup_phi=sup_phi, sweeps=sweeps)
            raise NonConvergence(
                f"semiwave iteration: {sweeps} sweeps, change {change:.3e}"
            )
    if _front_index(phi_t, 0.5 * float(phi_t.max())) >= escape_ix:
        return NoNontrivialSolution(c=c, sup_phi=float(phi_t.max()), sweeps=sweeps)

    if cfg.newton_polish:
        phi_t, psi_t = _newton_polish(p, c, grid, i0, phi_t, psi_t, cfg)

    slope = (-3.0 * phi_t[i0] + 4.0 * phi_t[i0 + 1] - phi_t[i0 + 2]) / (2.0 * ds)
    profile = SemiWaveProfile(
        c=c,
        s_grid=grid,
        phi=phi_t,
        psi=1.0 - psi_t,
        phi_slope_at_0=float(slope),
        decay_rate=0.0,
        sweeps=sweeps,
    )
    try:
        rate = _fit_decay(profile, p)
    except FitError:
        rate = linearization_roots(p, c).hat_mu[1]
    return replace(profile, decay_rate=rate)


def _fit_decay(profile: SemiWaveProfile, p: CompetitionParams) -> float:
    eq = equilibria(p)
    us = eq.u_star
    grid = profile.s_grid
    i0 = int(np.searchsorted(grid, 0.0))
    psi_t = 1.0 - profile.psi
    gap1 = us - profile.phi
    gap2 = p.h * us - psi_t

    n_pos = grid.size - i0
    start = grid.size - max(10, n_pos // 4)
    floor = 1e-12
    rates = []
    for gap in (gap1, gap2):
        ix = start + np.nonzero(gap[start:] > floor)[0]
        if ix.size < 10:
            # tail underflowed; widen the window leftward
            ix = np.nonzero((gap > floor) & (np.arange(grid.size) > i0 + n_pos // 2))[0]
        if ix.size < 10:
            raise FitError("not enough usable tail nodes for decay fit")
        coef = np.polyfit(grid[ix], np.log(gap[ix]), 1)
        rates.append(coef[0])
    m1, m2 = rates
    if abs(m1 - m2) > 0.10 * abs(m1):
        raise FitError(f"component decay rates disagree: {m1:.5g} vs {m2:.5g}")
    return 0.5 * (m1 + m2)


def decay_fit(profile: SemiWaveProfile, p: CompetitionParams) -> float:
    """Common log-linear tail rate of u*-phi and hu*-psi~ (should match mu^_2)."""
    return _fit_decay(profile, p)


_cstar_cache: dict[tuple, float] = {}


def _cache_key(p: CompetitionParams, cfg: SemiWaveConfig) -> tuple:
    return (p.d, p.r, p.h, p.k, cfg.n, cfg.s_span, cfg.fp_tol, cfg.c_tol,
            cfg.trivial_frac, cfg.escape_frac)


def critical_speed(p: CompetitionParams, cfg: SemiWaveConfig | None = None) -> float:
    """Largest speed with a nontrivial semi-wave, by bisection on existence.

    The analytic bracket is [2*sqrt(1-k), 2*sqrt(u*)].
    """
    if cfg is None:
        cfg = SemiWaveConfig()
    key = _cache_key(p, cfg)
    if key in _cstar_cache:
        return _cstar_cache[key]
    us = equilibria(p).u_star
    lo = 2.0 * math.sqrt(1.0 - p.k)
    hi = 2.0 * math.sqrt(us)

    def exists(c: float) -> bool:
        return isinstance(solve_semiwave(p, c, cfg), SemiWaveProfile)

    # Existence is guaranteed strictly below the analytic lower bound, but can
    # fail at the bound itself (the threshold may sit exactly there), so the
    # lower sanity check is taken well inside the guaranteed region.
    if not exists(0.5 * lo):
        raise BracketError(f"no semi-wave at c={0.5 * lo:.6g} inside the bracket")
    if exists(hi):
        raise BracketError(f"semi-wave persists at the analytic upper bound c={hi:.6g}")
    while hi - lo > cfg.c_tol:
        mid = 0.5 * (lo + hi)
        if exists(mid):
            lo = mid
        else:
            hi = mid
    c_star = 0.5 * (lo + hi)
    _cstar_cache[key] = c_star
    return c_star


def speed_for_gamma(
    p: CompetitionParams, gamma: float, cfg: SemiWaveConfig | None = None
) -> tuple[float, SemiWaveProfile]:
    """Unique root of gamma*phi'_c(0) = c on (0, c*), by bisection.

    p(c) = gamma*phi'_c(0) - c is strictly decreasing, positive at 0 and
    negative from c_gamma up to (and past) c*, so the analytic upper bound
    2*sqrt(u*) >= c* serves as the bisection's upper end without computing
    c* itself; nonexistent speeds score -inf.
    """
    if cfg is None:
        cfg = SemiWaveConfig()
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")

    def pfun(c: float) -> float:
        sol = solve_semiwave(p, c, cfg)
        if isinstance(sol, NoNontrivialSolution):
            return -math.inf
        return gamma * sol.phi_slope_at_0 - c

    lo, hi = 0.0, 2.0 * math.sqrt(equilibria(p).u_star)
    if pfun(lo) <= 0:
        raise BracketError("gamma*phi'_0(0) <= 0 at c=0; no positive root")
    while hi - lo > cfg.c_tol:
        mid = 0.5 * (lo + hi)
        if pfun(mid) > 0:
            lo = mid
        else:
            hi = mid
    c_gamma = 0.5 * (lo + hi)
    sol = solve_semiwave(p, c_gamma, cfg)
    if isinstance(sol, NoNontrivialSolution):
        c_gamma = lo
        sol = solve_semiwave(p, c_gamma, cfg)
        if isinstance(sol, NoNontrivialSolution):
            raise NonConvergence("no profile at the bisected c_gamma")
    return c_gamma, sol


def perturbed_speed(
    p: CompetitionParams,
    gamma: float,
    eps: float,
    direction: str,
    cfg: SemiWaveConfig | None = None,
) -> float:
    """Speed of the eps-perturbed system via the sigma = sqrt(1 +- 2eps) scaling.

    direction="lower" shifts growth to (1-2eps, 1+2eps) (the delta system);
    direction="upper" to (1+2eps, 1-2eps) (the tau system).  Both reduce to an
    unperturbed problem with rescaled (r, h, k, gamma), and the speed maps
    back as c = sigma * c_tilde.
    """
    if cfg is None:
        cfg = SemiWaveConfig()
    if eps == 0.0:
        return speed_for_gamma(p, gamma, cfg)[0]
    if not 0 < eps < 0.5:
        raise DomainError(f"eps must lie in (0, 0.5), got {eps}")
    sm = math.sqrt(1.0 - 2.0 * eps)
    sp_ = math.sqrt(1.0 + 2.0 * eps)
    if direction == "lower":
        sigma, other = sm, sp_
    elif direction == "upper":
        sigma, other = sp_, sm
    else:
        raise DomainError(f"direction must be 'lower' or 'upper', got {direction!r}")
    ratio2 = (other / sigma) ** 2
    r_t = p.r * ratio2
    h_t = p.h / ratio2
    k_t = p.k * ratio2
    if not (0 < h_t < 1 and 0 < k_t < 1):
        raise DomainError(
            f"perturbed parameters leave weak competition: h={h_t:.6g}, k={k_t:.6g}"
        )
    p_t = CompetitionParams(d=p.d, r=r_t, h=h_t, k=k_t)
    eq_t = equilibria(p_t)
    if not (eq_t.u_star > 0 and eq_t.v_star > 0):
        raise DomainError("perturbed equilibria nonpositive")
    gamma_t = gamma * sigma ** 2
    c_t, _ = speed_for_gamma(p_t, gamma_t, cfg)
    return sigma * c_t

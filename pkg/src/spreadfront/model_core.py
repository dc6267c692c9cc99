"""Nondimensional parameters, equilibria, and closed-form spectral quantities.

Everything here is a pure function of its inputs; the rest of the package
builds on these values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NumericalError

__all__ = [
    "CompetitionParams",
    "Equilibria",
    "SpectralRoots",
    "nondimensionalize",
    "equilibria",
    "kernel_exponents",
    "linearization_roots",
]


@dataclass(frozen=True)
class CompetitionParams:
    """Nondimensional weak-competition parameters (d, r, h, k).

    d is the diffusion ratio, r the growth ratio, h and k the competition
    coefficients, both required in (0,1).  The exact k=0 decoupled case is
    admitted only behind scalar_mode=True (used for Fisher consistency checks).
    """

    d: float
    r: float
    h: float
    k: float
    scalar_mode: bool = False

    def __post_init__(self) -> None:
        if not (self.d > 0 and self.r > 0):
            raise DomainError(f"d and r must be positive, got d={self.d}, r={self.r}")
        if self.scalar_mode:
            if self.k != 0.0:
                raise DomainError("scalar_mode requires k == 0 exactly")
            if not (0 < self.h < 1):
                raise DomainError(f"h must lie in (0,1), got h={self.h}")
        else:
            if not (0 < self.h < 1 and 0 < self.k < 1):
                raise DomainError(
                    f"weak competition needs 0<h<1 and 0<k<1, got h={self.h}, k={self.k}"
                )


@dataclass(frozen=True)
class Equilibria:
    u_star: float
    v_star: float


@dataclass(frozen=True)
class SpectralRoots:
    """Kernel exponents (lambda/mu parts) and/or the quartic roots hat_mu."""

    lambda1: float | None = None
    lambda2: float | None = None
    mu1: float | None = None
    mu2: float | None = None
    hat_mu: tuple[float, float, float, float] | None = None


def nondimensionalize(
    a1: float, a2: float, b1: float, b2: float,
    c1: float, c2: float, d1: float, d2: float,
) -> CompetitionParams:
    """Reduce the eight raw coefficients to (d, r, h, k)."""
    vals = dict(a1=a1, a2=a2, b1=b1, b2=b2, c1=c1, c2=c2, d1=d1, d2=d2)
    for name, v in vals.items():
        if not v > 0:
            raise DomainError(f"{name} must be strictly positive, got {v}")
    d = d2 / d1
    r = a2 / a1
    k = a2 * c1 / (a1 * b2)
    h = a1 * c2 / (a2 * b1)
    return CompetitionParams(d=d, r=r, h=h, k=k)


def equilibria(p: CompetitionParams) -> Equilibria:
    """Coexistence state (u*, v*) = ((1-k)/(1-hk), (1-h)/(1-hk))."""
    denom = 1.0 - p.h * p.k
    return Equilibria(u_star=(1.0 - p.k) / denom, v_star=(1.0 - p.h) / denom)


def kernel_exponents(d1: float, d2: float, c: float, beta: float) -> SpectralRoots:
    """Roots of d1*l^2 - c*l - beta = 0 and d2*m^2 - c*m - beta = 0.

    Each quadratic has one negative and one positive root whenever beta > 0.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    sq1 = math.sqrt(c * c + 4.0 * beta * d1)
    sq2 = math.sqrt(c * c + 4.0 * beta * d2)
    return SpectralRoots(
        lambda1=(c - sq1) / (2.0 * d1),
        lambda2=(c + sq1) / (2.0 * d1),
        mu1=(c - sq2) / (2.0 * d2),
        mu2=(c + sq2) / (2.0 * d2),
    )


def _bisect(f, lo: float, hi: float, rtol: float = 1e-13, maxit: int = 200) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise NumericalError(f"no sign change on bracket [{lo}, {hi}]")
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or (hi - lo) <= rtol * max(1.0, abs(mid)):
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def linearization_roots(p: CompetitionParams, c: float) -> SpectralRoots:
    """Four real roots of (m^2-c*m-u*)(d*m^2-c*m-r*v*) - k*h*r*u**v* = 0.

    The quadratic factors' own roots m_i^+- delimit five sign-alternating
    intervals, so each quartic root is found by bisection on a guaranteed
    bracket (no general polynomial solver).
    """
    if c < 0:
        raise DomainError(f"c must be nonnegative, got {c}")
    eq = equilibria(p)
    us, vs, d, r = eq.u_star, eq.v_star, p.d, p.r

    def q1(m: float) -> float:
        return m * m - c * m - us

    def q2(m: float) -> float:
        return d * m * m - c * m - r * vs

    def P1(m: float) -> float:
        return q1(m) * q2(m) - p.k * p.h * r * us * vs

    m1m = (c - math.sqrt(c * c + 4.0 * us)) / 2.0
    m1p = (c + math.sqrt(c * c + 4.0 * us)) / 2.0
    m2m = (c - math.sqrt(c * c + 4.0 * d * r * vs)) / (2.0 * d)
    m2p = (c + math.sqrt(c * c + 4.0 * d * r * vs)) / (2.0 * d)

    if p.k == 0.0 or p.h == 0.0:
        # decoupled quartic factors exactly into the two quadratics
        roots = sorted([m1m, m2m, m1p, m2p])
        return SpectralRoots(hat_mu=tuple(roots))

    neg_in, neg_out = max(m1m, m2m), min(m1m, m2m)
    pos_in, pos_out = min(m1p, m2p), max(m1p, m2p)

    # expand outward until P1 turns positive again (P1 -> +inf at both ends)
    lo = neg_out - 1.0
    while P1(lo) <= 0:
        lo = neg_out + 2.0 * (lo - neg_out)
    hi = pos_out + 1.0
    while P1(hi) <= 0:
        hi = pos_out + 2.0 * (hi - pos_out)

    hat1 = _bisect(P1, lo, neg_out)
    hat2 = _bisect(P1, neg_in, 0.0)
    hat3 = _bisect(P1, 0.0, pos_in)
    hat4 = _bisect(P1, pos_out, hi)

    roots = (hat1, hat2, hat3, hat4)
    scale = max(1.0, abs(hat4)) ** 4 * max(1.0, d)
    for m in roots:
        if abs(P1(m)) > 1e-10 * scale:
            raise NumericalError(f"quartic root {m} fails residual check")
    return SpectralRoots(hat_mu=roots)

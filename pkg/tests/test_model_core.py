"""Parameter reduction, equilibria, and closed-form spectral roots."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spreadfront import (
    CompetitionParams,
    DomainError,
    equilibria,
    kernel_exponents,
    linearization_roots,
    nondimensionalize,
)

P_SYM = CompetitionParams(d=1.0, r=1.0, h=0.5, k=0.5)

weak = st.floats(min_value=0.05, max_value=0.95)
pos = st.floats(min_value=0.1, max_value=10.0)


def test_nondimensionalize_known_values():
    # d = d2/d1, r = a2/a1, k = a2 c1/(a1 b2), h = a1 c2/(a2 b1)
    p = nondimensionalize(a1=2.0, a2=1.0, b1=3.0, b2=2.0,
                          c1=1.0, c2=1.2, d1=4.0, d2=2.0)
    assert p.d == pytest.approx(0.5)
    assert p.r == pytest.approx(0.5)
    assert p.k == pytest.approx(0.25)
    assert p.h == pytest.approx(0.8)


def test_nondimensionalize_rejects_nonpositive():
    with pytest.raises(DomainError):
        nondimensionalize(2.0, 1.0, 3.0, 2.0, 1.0, 1.2, 0.0, 2.0)


def test_params_validation():
    with pytest.raises(DomainError):
        CompetitionParams(d=1.0, r=1.0, h=1.5, k=0.5)
    with pytest.raises(DomainError):
        CompetitionParams(d=-1.0, r=1.0, h=0.5, k=0.5)
    # k = 0 is only admitted behind scalar_mode
    with pytest.raises(DomainError):
        CompetitionParams(d=1.0, r=1.0, h=0.5, k=0.0)
    ps = CompetitionParams(d=1.0, r=1.0, h=0.5, k=0.0, scalar_mode=True)
    assert ps.k == 0.0
    with pytest.raises(DomainError):
        CompetitionParams(d=1.0, r=1.0, h=0.5, k=0.1, scalar_mode=True)


def test_equilibria_symmetric_case():
    eq = equilibria(P_SYM)
    assert eq.u_star == pytest.approx(2.0 / 3.0, rel=1e-14)
    assert eq.v_star == pytest.approx(2.0 / 3.0, rel=1e-14)


@given(h=weak, k=weak, d=pos, r=pos)
@settings(max_examples=200, deadline=None)
def test_equilibria_solve_the_zero_growth_system(h, k, d, r):
    p = CompetitionParams(d=d, r=r, h=h, k=k)
    eq = equilibria(p)
    assert 0 < eq.u_star < 1 and 0 < eq.v_star < 1
    assert 1.0 - eq.u_star - k * eq.v_star == pytest.approx(0.0, abs=1e-12)
    assert 1.0 - eq.v_star - h * eq.u_star == pytest.approx(0.0, abs=1e-12)
    # identity used by the upper solution: v* = 1 - h u*
    assert eq.v_star == pytest.approx(1.0 - h * eq.u_star, abs=1e-14)


@given(c=st.floats(min_value=0.0, max_value=5.0),
       beta=st.floats(min_value=0.1, max_value=10.0),
       d2=pos)
@settings(max_examples=200, deadline=None)
def test_kernel_exponents_satisfy_quadratics(c, beta, d2):
    roots = kernel_exponents(1.0, d2, c, beta)
    for lam in (roots.lambda1, roots.lambda2):
        assert lam * lam - c * lam - beta == pytest.approx(0.0, abs=1e-9)
    for mu in (roots.mu1, roots.mu2):
        assert d2 * mu * mu - c * mu - beta == pytest.approx(0.0, abs=1e-9)
    assert roots.lambda1 < 0 < roots.lambda2
    assert roots.mu1 < 0 < roots.mu2


def test_kernel_exponents_reject_bad_beta():
    with pytest.raises(DomainError):
        kernel_exponents(1.0, 1.0, 1.0, 0.0)


def test_linearization_roots_symmetric_factorization():
    # at (d,r,h,k) = (1,1,0.5,0.5), c=0 the quartic factors as
    # (m^2-1)(m^2-1/3) = 0: roots -1, -1/sqrt(3), 1/sqrt(3), 1
    roots = linearization_roots(P_SYM, 0.0).hat_mu
    s3 = 1.0 / math.sqrt(3.0)
    expected = (-1.0, -s3, s3, 1.0)
    assert np.allclose(roots, expected, atol=1e-12)


def test_linearization_roots_decoupled_path():
    ps = CompetitionParams(d=1.0, r=1.0, h=0.5, k=0.0, scalar_mode=True)
    roots = linearization_roots(ps, 0.3).hat_mu
    eq = equilibria(ps)
    # exact quadratic-factor roots
    for m in roots:
        q1 = m * m - 0.3 * m - eq.u_star
        q2 = m * m - 0.3 * m - eq.v_star
        assert min(abs(q1), abs(q2)) < 1e-12


@given(h=weak, k=weak, d=pos, r=pos, c=st.floats(min_value=0.0, max_value=3.0))
@settings(max_examples=150, deadline=None)
def test_linearization_roots_sorted_and_signed(h, k, d, r, c):
    p = CompetitionParams(d=d, r=r, h=h, k=k)
    eq = equilibria(p)
    roots = linearization_roots(p, c).hat_mu
    assert roots[0] < roots[1] < 0.0 < roots[2] < roots[3]
    # quartic residual at every root, relative to its own scale
    for m in roots:
        q = (m * m - c * m - eq.u_star) * (d * m * m - c * m - p.r * eq.v_star)
        val = q - k * h * p.r * eq.u_star * eq.v_star
        scale = max(1.0, abs(m)) ** 4 * max(1.0, d)
        assert abs(val) <= 1e-9 * scale


def test_linearization_roots_rejects_negative_speed():
    with pytest.raises(DomainError):
        linearization_roots(P_SYM, -0.1)

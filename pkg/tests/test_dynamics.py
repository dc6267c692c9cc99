"""Bounding dynamics: sandwich recurrence, logistic bound, spreading criteria."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from spreadfront import (
    CompetitionParams,
    DomainError,
    dichotomy_predicates,
    equilibria,
    logistic_upper_bound,
    sandwich,
)

P = CompetitionParams(d=1.0, r=1.0, h=0.5, k=0.5)

weak = st.floats(min_value=0.05, max_value=0.95)


def test_sandwich_seed_and_ordering():
    it = sandwich(P, 8)
    assert it.upper_u[0] == 1.0 and it.upper_v[0] == 1.0
    assert it.lower_u[0] == pytest.approx(1.0 - P.h)
    assert it.lower_v[0] == pytest.approx(1.0 - P.k)
    assert np.all(it.lower_u <= it.upper_u + 1e-15)
    assert np.all(it.lower_v <= it.upper_v + 1e-15)


@given(h=weak, k=weak)
@settings(max_examples=100, deadline=None)
def test_sandwich_contracts_at_ratio_hk(h, k):
    p = CompetitionParams(d=1.0, r=1.0, h=h, k=k)
    it = sandwich(p, 10)
    gap_u = it.upper_u - it.lower_u
    # the gap contracts by exactly hk every two steps (affine recurrence)
    for i in range(2, 10):
        assert gap_u[i] == pytest.approx(h * k * gap_u[i - 2], rel=1e-12, abs=1e-15)


@given(h=weak, k=weak)
@settings(max_examples=100, deadline=None)
def test_sandwich_boxes_trap_the_coexistence_state(h, k):
    p = CompetitionParams(d=1.0, r=1.0, h=h, k=k)
    eq = equilibria(p)
    it = sandwich(p, 60)
    # both ends converge onto the coexistence state within the geometric
    # gap bound (the iterates oscillate around it, so no one-sided trap)
    # deviations obey e_n = hk * e_{n-2} exactly, with |e_0|, |e_1| <= 1
    bound = (h * k) ** 29 + 1e-12
    assert abs(it.upper_u[-1] - eq.u_star) <= bound
    assert abs(it.lower_u[-1] - eq.u_star) <= bound
    assert abs(it.upper_v[-1] - eq.v_star) <= bound
    assert abs(it.lower_v[-1] - eq.v_star) <= bound


def test_sandwich_rejects_bad_n():
    with pytest.raises(DomainError):
        sandwich(P, 0)


def test_logistic_closed_form_matches_ode_oracle():
    for u0, t in [(0.3, 2.0), (1.5, 1.0), (0.05, 5.0)]:
        sol = solve_ivp(lambda s, y: y * (1 - y), (0.0, t), [u0],
                        rtol=1e-11, atol=1e-13)
        assert logistic_upper_bound(u0, t) == pytest.approx(
            float(sol.y[0, -1]), rel=1e-8)


def test_logistic_rejects_nonpositive_initial():
    with pytest.raises(DomainError):
        logistic_upper_bound(0.0, 1.0)


def test_dichotomy_threshold_values():
    out = dichotomy_predicates(P, 3.0, 1.0)
    thr_spread, thr_small = out["thresholds"]
    assert thr_spread == pytest.approx(math.pi / (2.0 * math.sqrt(0.5)))
    assert thr_small == pytest.approx(math.pi / 2.0)
    assert out["guaranteed_spreading"] is True
    small = dichotomy_predicates(P, 1.0, 1.0)
    assert small["guaranteed_spreading"] is False
    assert small["small_domain"] is True
    # boundary counts as guaranteed
    edge = dichotomy_predicates(P, thr_spread, 1.0)
    assert edge["guaranteed_spreading"] is True


@given(h=weak, k=weak, g0=st.floats(min_value=0.1, max_value=10.0))
@settings(max_examples=100, deadline=None)
def test_dichotomy_windows_are_consistent(h, k, g0):
    p = CompetitionParams(d=1.0, r=1.0, h=h, k=k)
    out = dichotomy_predicates(p, g0, 1.0)
    thr_spread, thr_small = out["thresholds"]
    assert thr_small <= thr_spread
    # the two certainties can never hold at once
    assert not (out["guaranteed_spreading"] and out["small_domain"])

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from euler_poisson_ct.oracle import (
    IvpSpec,
    OracleError,
    coupled_flow_indicator_rhs,
    first_zero,
    flow_rhs,
    indicator_rhs_constant_background,
    indicator_rhs_zero_background,
    integrate_ivp,
    oracle_quad,
    oracle_root,
)


def test_equilibrium_oscillator():
    res = integrate_ivp(IvpSpec(lambda t, y: [y[1], 1.0 - y[0]], [1.0, 0.0], (0.0, 30.0)))
    assert res.status == "finished"
    assert np.max(np.abs(res.y[:, 0] - 1.0)) < 1e-14


def test_inverse_cube_trajectory():
    res = integrate_ivp(IvpSpec(lambda t, y: [y[1], y[0] ** -3], [1.0, 0.0], (0.0, 10.0)))
    assert res.y[-1][0] == pytest.approx(math.sqrt(101.0), rel=1e-9)


def test_event_on_quadratic_indicator():
    res = first_zero(indicator_rhs_zero_background(1.0, 1.0), [1.0, -3.0], 5.0)
    assert res.status == "event"
    assert res.event_t == pytest.approx(3.0 - math.sqrt(7.0), abs=1e-12)


def test_event_time_independent_of_step_cap():
    rhs = indicator_rhs_constant_background(1.0, 1.0, 1.0)
    t1 = first_zero(rhs, [1.0, -1.5], 5.0).event_t
    t2 = first_zero(rhs, [1.0, -1.5], 5.0, max_step=1e-2).event_t
    assert t1 == pytest.approx(math.asin(2.0 / 3.0), abs=1e-10)
    assert abs(t1 - t2) < 1e-10


def test_hidden_double_crossing_is_found():
    # Gamma = 1 - 2.0001 t + t^2 dips below zero on a short interval near t = 1
    res = first_zero(indicator_rhs_zero_background(2.0, 1.0), [1.0, -2.0001], 10.0)
    assert res.status == "event"
    disc = 2.0001**2 - 4.0
    assert res.event_t == pytest.approx((2.0001 - math.sqrt(disc)) / 2.0, rel=1e-9)


def test_growth_halts_integration():
    res = integrate_ivp(IvpSpec(lambda t, y: [y[0] ** 2], [1.0], (0.0, 2.0)))
    assert res.status == "overflow"
    assert res.t[-1] == pytest.approx(1.0, abs=1e-6)


def test_spec_validation():
    with pytest.raises(ValueError):
        IvpSpec(lambda t, y: y, [1.0], (1.0, 0.0))
    with pytest.raises(ValueError):
        IvpSpec(lambda t, y: y, [1.0], (0.0, 1.0), rel_tol=0.0)


def test_oracle_root():
    assert oracle_root(lambda x: x * x - 2.0, 1.0, 2.0) == pytest.approx(math.sqrt(2.0), rel=1e-14)
    with pytest.raises(OracleError):
        oracle_root(lambda x: 0.0, 0.0, 1.0)
    with pytest.raises(OracleError):
        oracle_root(lambda x: 1.0 + x * x, -1.0, 1.0)


def test_oracle_quad_weighted_endpoint():
    assert oracle_quad(lambda x: x * x, 0.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert oracle_quad(lambda x: 1.0, 0.0, 1.0, singular="b", power=-0.5) == pytest.approx(2.0, rel=1e-12)


def test_flow_rhs_planar_is_uniform_acceleration():
    res = integrate_ivp(IvpSpec(flow_rhs(0, 1.0, 1.0), [1.0, 1.0], (0.0, 1.0)))
    assert res.y[-1][0] == pytest.approx(2.5, rel=1e-12)


@given(du0=st.floats(-3.0, 3.0), n0=st.floats(0.1, 3.0))
def test_coupled_planar_indicator_is_quadratic(du0, n0):
    rhs = coupled_flow_indicator_rhs(0, 1.0, n0, n0)
    res = integrate_ivp(IvpSpec(rhs, [1.0, 1.0, 1.0, du0], (0.0, 0.2)))
    t = 0.2
    assert res.y[-1][2] == pytest.approx(1.0 + du0 * t + 0.5 * n0 * t * t, abs=1e-10)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from euler_poisson_ct.numerics import (
    QuadratureError,
    RootBracketError,
    expand_bracket,
    find_root,
    golden_min,
    quad,
    quad_singular_end,
    solve_ode,
)
from euler_poisson_ct.oracle import oracle_quad


def test_quad_polynomial():
    assert quad(lambda x: x * x, 0.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-14)


def test_quad_graded_inverse_sqrt():
    val = quad(lambda x: (1.0 - x) ** -0.5 if x < 1.0 else 0.0, 0.0, 1.0, graded="b")
    assert val == pytest.approx(2.0, rel=1e-10)


def test_quad_singular_end_power_law():
    # int_0^1 s^(-0.7) ds = 1/0.3
    assert quad_singular_end(lambda s: s**-0.7, 1.0) == pytest.approx(1.0 / 0.3, rel=1e-9)


def test_quad_reversed_limits_flip_sign():
    assert quad(math.sin, math.pi, 0.0) == pytest.approx(-2.0, rel=1e-13)


def test_quad_nonintegrable_raises():
    with pytest.raises(QuadratureError):
        quad(lambda x: 1.0 / x if x > 0 else 0.0, 0.0, 1.0, max_intervals=200)


@given(
    coeffs=st.lists(st.floats(-5, 5), min_size=1, max_size=8),
    a=st.floats(-3, 0),
    b=st.floats(0.1, 3),
)
def test_quad_matches_independent_rule(coeffs, a, b):
    f = lambda x: float(np.polyval(coeffs, x) * math.cos(x))  # noqa: E731
    mine = quad(f, a, b)
    ref = oracle_quad(f, a, b)
    scale = quad(lambda x: abs(f(x)), a, b) + 1e-300
    assert abs(mine - ref) <= 1e-10 * scale + 1e-13


def test_find_root_sqrt2():
    assert find_root(lambda x: x * x - 2.0, 1.0, 2.0) == pytest.approx(math.sqrt(2.0), rel=1e-13)


def test_find_root_requires_sign_change():
    with pytest.raises(RootBracketError):
        find_root(lambda x: x * x + 1.0, -1.0, 1.0)


def test_find_root_rejects_vanishing_endpoints():
    with pytest.raises(RootBracketError):
        find_root(lambda x: 0.0, 0.0, 1.0)


@given(r=st.floats(0.01, 100.0))
def test_find_root_cubic(r):
    x = find_root(lambda x: x**3 - r, 0.0, max(1.0, r))
    assert x == pytest.approx(r ** (1.0 / 3.0), rel=1e-12)


def test_expand_bracket_finds_far_root():
    lo, hi = expand_bracket(lambda x: x - 1000.0, 0.0, 1.0)
    assert lo < 1000.0 <= hi
    assert hi - lo <= 1000.0


def test_golden_min_parabola():
    x, v = golden_min(lambda x: (x - 0.3) ** 2 + 1.0, -1.0, 2.0)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert v == pytest.approx(1.0, abs=1e-13)


def _inverse_cube(t, y):
    return [y[1], y[0] ** -3]


def test_ode_inverse_cube_closed_form():
    sol = solve_ode(_inverse_cube, 0.0, [1.0, 0.0], 10.0)
    assert sol.status == "finished"
    assert sol.y[-1][0] == pytest.approx(math.sqrt(101.0), rel=1e-9)


def test_ode_equilibrium_stays_put():
    sol = solve_ode(lambda t, y: [y[1], 1.0 - y[0]], 0.0, [1.0, 0.0], 20.0)
    assert np.max(np.abs(sol.y[:, 0] - 1.0)) < 1e-14


def test_ode_event_quadratic_root():
    sol = solve_ode(lambda t, y: [y[1], 1.0], 0.0, [1.0, -3.0], 5.0, events=[lambda t, y: y[0]])
    assert sol.status == "event"
    assert sol.event_t[0] == pytest.approx(3.0 - math.sqrt(7.0), abs=1e-12)


def test_ode_event_independent_of_first_step():
    ts = []
    for h0 in (1e-6, 1e-3, 1e-1):
        sol = solve_ode(
            lambda t, y: [y[1], 1.0], 0.0, [1.0, -3.0], 5.0, events=[lambda t, y: y[0]], first_step=h0
        )
        ts.append(sol.event_t[0])
    assert max(ts) - min(ts) < 1e-10


def test_ode_error_drops_with_tolerance():
    exact = math.sqrt(101.0)
    errs, steps = [], []
    for tol in (1e-8, 1e-9, 1e-10, 1e-11, 1e-12):
        sol = solve_ode(_inverse_cube, 0.0, [1.0, 0.0], 10.0, rtol=tol, atol=tol * 1e-2)
        errs.append(abs(sol.y[-1][0] - exact))
        steps.append(len(sol.t))
    for e0, e1 in zip(errs, errs[1:]):
        assert e1 < e0 / 5.0
    # a fifth-order method needs about 10**(1/5) times more steps per decade
    for n0, n1 in zip(steps, steps[1:]):
        assert 1.3 < n1 / n0 < 2.0


def test_ode_overflow_status():
    sol = solve_ode(lambda t, y: [y[0] ** 2], 0.0, [1.0], 2.0)
    assert sol.status in ("overflow", "underflow")
    assert sol.t[-1] == pytest.approx(1.0, abs=1e-4)


def test_ode_dense_output_matches_closed_form():
    sol = solve_ode(_inverse_cube, 0.0, [1.0, 0.0], 10.0)
    for t in (0.37, 2.5, 7.91):
        assert sol(t)[0] == pytest.approx(math.sqrt(1.0 + t * t), rel=1e-9)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from euler_poisson_ct.oracle import IvpSpec, density_gradient_rhs, first_zero, integrate_ivp
from euler_poisson_ct.riccati import (
    BlowupReachedError,
    RiccatiProblem,
    riccati_first_violation,
    riccati_global,
    riccati_solution,
    zero_background_problem,
)


def _zero(t):
    return 0.0


def _minus_one(t):
    return -1.0


def test_unforced_riccati():
    assert riccati_solution(RiccatiProblem(_zero, _minus_one, 2.0), 1.0) == pytest.approx(2.0 / 3.0, rel=1e-13)


def test_no_dynamics():
    p = RiccatiProblem(_zero, _zero, 5.0)
    for t in (0.0, 1.0, 123.0):
        assert riccati_solution(p, t) == 5.0


def test_forced_gradient_matches_oracle():
    k, rho0, du0 = 1.0, 1.0, -1.0
    w = riccati_solution(zero_background_problem(k, rho0, du0), 1.0)
    res = integrate_ivp(IvpSpec(density_gradient_rhs(k), [du0, rho0], (0.0, 1.0), rel_tol=1e-12, abs_tol=1e-14))
    assert w == pytest.approx(res.y[-1][0], abs=1e-8)
    # closed form: Gamma_t / Gamma with Gamma = 1 - t + t^2/2
    assert w == pytest.approx(0.0, abs=1e-12)


def test_global_when_discriminant_negative():
    assert riccati_global(zero_background_problem(1.0, 1.0, -1.0), 50.0)


def test_zero_initial_value_is_global():
    assert riccati_global(RiccatiProblem(_zero, _minus_one, 0.0), 10.0)


def test_violation_located_at_quadratic_root():
    p = zero_background_problem(1.0, 1.0, -2.0)
    assert not riccati_global(p, 10.0)
    lo, hi = riccati_first_violation(p, 10.0)
    assert lo <= 2.0 - math.sqrt(2.0) <= hi
    assert hi - lo < 1e-9 * hi


def test_tangency_between_grid_points_is_caught():
    # 1 - w0 int B touches zero exactly once at t = 1: the double-root boundary
    p = zero_background_problem(2.0, 1.0, -2.0)
    assert not riccati_global(p, 1000.0)


def test_solution_raises_with_bracket():
    with pytest.raises(BlowupReachedError) as err:
        riccati_solution(RiccatiProblem(_zero, _minus_one, -1.0), 2.0)
    lo, hi = err.value.bracket
    assert lo < 1.0 <= hi and hi - lo < 1e-9 * hi
    assert err.value.t_c == pytest.approx(1.0, rel=1e-9)


@given(w0=st.floats(-5.0, 5.0).filter(lambda v: abs(v) > 1e-3))
def test_unforced_blowup_iff_negative(w0):
    p = RiccatiProblem(_zero, _minus_one, w0)
    hit = riccati_first_violation(p, 2000.0)
    if w0 > 0:
        assert hit is None
    else:
        assert abs(0.5 * (hit[0] + hit[1]) + 1.0 / w0) < 1e-9 * max(1.0, -1.0 / w0)


@settings(max_examples=15)
@given(a=st.floats(-1.0, 1.0), w0=st.floats(-3.0, 3.0), t=st.floats(0.0, 3.0))
def test_linear_case_reduces_to_exponential(a, w0, t):
    p = RiccatiProblem(lambda s: a * math.cos(s), _zero, w0)
    assert riccati_solution(p, t) == pytest.approx(w0 * math.exp(a * math.sin(t)), rel=1e-10, abs=1e-14)


@settings(max_examples=10)
@given(
    a=st.floats(-0.5, 0.5),
    b=st.floats(-1.0, 1.0),
    w0=st.floats(-1.0, 1.0),
)
def test_solution_matches_direct_integration(a, b, w0):
    def aa(t):
        return a * math.sin(t)

    def bb(t):
        return b * math.exp(-0.1 * t)

    # closed-form integrating factor keeps the 50-point comparison cheap;
    # the quadrature path is covered by test_quadrature_factor_matches_closed_form
    p = RiccatiProblem(aa, bb, w0, integrating_factor=lambda t: math.exp(a * (1.0 - math.cos(t))))
    T = 5.0
    if not riccati_global(p, T):
        return
    res = integrate_ivp(
        IvpSpec(lambda t, y: [aa(t) * y[0] + bb(t) * y[0] ** 2], [w0], (0.0, T), rel_tol=1e-12, abs_tol=1e-14)
    )
    for t in np.linspace(0.0, T, 50):
        ref = float(res(t)[0])
        assert riccati_solution(p, t) == pytest.approx(ref, rel=1e-7, abs=1e-10)


def test_oracle_blowup_agrees_with_predicate():
    k, rho0, du0 = 1.0, 1.0, -2.0
    res = first_zero(lambda t, y: [y[1], k * rho0], [1.0, du0], 10.0)
    lo, hi = riccati_first_violation(zero_background_problem(k, rho0, du0), 10.0)
    assert lo - 1e-10 <= res.event_t <= hi + 1e-10


def test_quadrature_factor_matches_closed_form():
    a, b, w0 = 0.3, 0.5, -0.5
    p_quad = RiccatiProblem(lambda s: a * math.sin(s), lambda s: b * math.exp(-0.1 * s), w0)
    p_exact = RiccatiProblem(
        p_quad.a, p_quad.b, w0, integrating_factor=lambda t: math.exp(a * (1.0 - math.cos(t)))
    )
    for t in (0.5, 2.0, 5.0):
        assert riccati_solution(p_quad, t) == pytest.approx(riccati_solution(p_exact, t), rel=1e-12)

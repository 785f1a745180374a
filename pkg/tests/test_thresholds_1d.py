import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from euler_poisson_ct.oracle import (
    IvpSpec,
    first_zero,
    indicator_rhs_constant_background,
    indicator_rhs_relaxation,
    indicator_rhs_zero_background,
    integrate_ivp,
)
from euler_poisson_ct.profiles import InitialData, constant_profile, linear_profile
from euler_poisson_ct.thresholds_1d import (
    ConstantBackground,
    DegenerateCaseError,
    NoBlowupError,
    PastBlowupError,
    RelaxationStrong,
    RelaxationWeak,
    ZeroBackground,
    blowup_time_1d,
    blowup_time_local,
    classify_regime,
    critical_time_weak,
    extremum_time_residual,
    gamma_1d,
    gradient_zero_background,
    indicator_1d,
    oscillator_energy,
    relaxation_limit_margin,
    relaxation_printed_margin,
    solution_along_characteristic,
    table_quadrant,
    threshold_margin,
    verdict_1d,
)
from euler_poisson_ct.verdicts import ModelConstraintError, VerdictKind

GRID = np.linspace(-1.0, 1.0, 5)


def const_data(rho0, du0):
    return InitialData(constant_profile(rho0), linear_profile(du0))


# -- models -------------------------------------------------------------------


@pytest.mark.parametrize(
    "factory",
    [
        lambda: ZeroBackground(0.0),
        lambda: ConstantBackground(1.0, 0.0),
        lambda: ConstantBackground(0.0, 1.0),
        lambda: RelaxationWeak(1.0, 1.0, 0.4),
        lambda: RelaxationStrong(1.0, 1.0, 0.6),
        lambda: RelaxationWeak(-1.0, 1.0, 1.0),
    ],
)
def test_model_constraints(factory):
    with pytest.raises(ModelConstraintError):
        factory()


# -- indicator ----------------------------------------------------------------


def test_zero_background_indicator():
    g, gt = gamma_1d(ZeroBackground(1.0), const_data(1.0, -1.0), 0.3, 1.0)
    assert (g, gt) == pytest.approx((0.5, 0.0), abs=1e-15)


def test_equilibrium_background_indicator():
    m = ConstantBackground(1.0, 1.0)
    for t in (0.0, 0.7, 13.0):
        assert gamma_1d(m, const_data(1.0, 0.0), 0.0, t)[0] == pytest.approx(1.0, abs=1e-15)


def test_weak_relaxation_indicator_matches_oracle():
    m = RelaxationWeak(1.0, 1.0, 1.0)
    assert m.mu == pytest.approx(math.sqrt(0.75))
    res = integrate_ivp(
        IvpSpec(indicator_rhs_relaxation(1.0, 1.0, 1.0, 1.0), [1.0, -0.3], (0.0, 2.0), rel_tol=1e-12, abs_tol=1e-14)
    )
    g, gt = indicator_1d(m, 1.0, -0.3, 2.0)
    assert g == pytest.approx(res.y[-1][0], abs=1e-8)
    assert gt == pytest.approx(res.y[-1][1], abs=1e-8)


_models = st.one_of(
    st.builds(ZeroBackground, st.floats(0.1, 3.0)),
    st.builds(ConstantBackground, st.floats(0.1, 3.0), st.floats(0.1, 3.0)),
    st.builds(ConstantBackground, st.floats(-3.0, -0.1), st.floats(0.1, 3.0)),
    st.tuples(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(1.05, 5.0)).map(
        lambda v: RelaxationWeak(v[0], v[1], v[2] / (2 * math.sqrt(v[0] * v[1])))
    ),
    st.tuples(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(0.1, 0.95)).map(
        lambda v: RelaxationStrong(v[0], v[1], v[2] / (2 * math.sqrt(v[0] * v[1])))
    ),
)


def _oracle_rhs(m, rho0):
    if isinstance(m, ZeroBackground):
        return indicator_rhs_zero_background(m.k, rho0)
    if isinstance(m, ConstantBackground):
        return indicator_rhs_constant_background(m.k, m.c, rho0)
    return indicator_rhs_relaxation(m.k, m.c, m.eps, rho0)


@given(m=_models, rho0=st.floats(0.1, 3.0), du0=st.floats(-3.0, 3.0), t=st.floats(0.0, 2.0))
def test_closed_form_indicator_solves_its_ode(m, rho0, du0, t):
    assume(t > 0)
    res = integrate_ivp(IvpSpec(_oracle_rhs(m, rho0), [1.0, du0], (0.0, t), rel_tol=1e-12, abs_tol=1e-14))
    g, gt = indicator_1d(m, rho0, du0, t)
    scale = 1.0 + float(np.max(np.abs(res.y)))
    assert abs(g - res.y[-1][0]) < 1e-8 * scale
    assert abs(gt - res.y[-1][1]) < 1e-8 * scale


# -- solution along a characteristic ------------------------------------------


def test_density_and_gradient():
    rho, ux = solution_along_characteristic(ZeroBackground(1.0), const_data(1.0, 0.0), 0.0, 2.0)
    assert rho == pytest.approx(1.0 / 3.0)
    assert ux == pytest.approx(2.0 / 3.0)


@given(m=_models, rho0=st.floats(0.1, 3.0), du0=st.floats(-3.0, 3.0))
def test_initial_time_reproduces_data(m, rho0, du0):
    rho, ux = solution_along_characteristic(m, const_data(rho0, du0), 0.5, 0.0)
    assert rho == pytest.approx(rho0, rel=1e-15)
    assert ux == pytest.approx(du0, rel=1e-14, abs=1e-12)


def test_past_blowup_raises():
    with pytest.raises(PastBlowupError):
        solution_along_characteristic(ZeroBackground(1.0), const_data(1.0, -3.0), 0.0, 1.0)


def test_algebraic_decay_at_large_time():
    rho, ux = solution_along_characteristic(ZeroBackground(1.0), const_data(1.0, -1.0), 0.0, 1000.0)
    assert rho == pytest.approx(2e-6, rel=0.02)
    assert ux == pytest.approx(2e-3, rel=0.02)


@given(k=st.floats(0.5, 2.0), rho0=st.floats(0.5, 2.0), frac=st.floats(-0.95, 2.0))
def test_asymptotics_for_global_data(k, rho0, frac):
    du0 = frac * math.sqrt(2 * k * rho0)
    t = 1e3
    rho, ux = solution_along_characteristic(ZeroBackground(k), const_data(rho0, du0), 0.0, t)
    assert abs(k * t * t * rho / 2 - 1) < 0.02
    assert abs(t * ux / 2 - 1) < 0.02


@given(k=st.floats(-3.0, -0.1), c=st.floats(0.1, 3.0), rho0=st.floats(0.1, 3.0), du0=st.floats(-3.0, 3.0))
def test_attractive_background_decay(k, c, rho0, du0):
    m = ConstantBackground(k, c)
    assume(threshold_margin(m, rho0, du0) > 1e-9)
    s = m.growth
    data = const_data(rho0, du0)
    vals = [solution_along_characteristic(m, data, 0.0, t)[0] * math.exp(s * t / 2) for t in np.linspace(0, 50, 101)]
    # with X = e^{st}, Gamma X = B X^2 + P X + A is increasing from 1 at X = 1, so
    # Gamma X >= max(1, b X^2), b = min(1, B), and rho e^{st/2} <= rho0 b^{-3/4}
    B = 0.5 * (1.0 - rho0 / c + du0 / s)
    assert max(vals) <= rho0 * min(1.0, B) ** -0.75 * (1 + 1e-9)


def test_phase_plane_ellipse_closes():
    m = ConstantBackground(2.0, 0.5)
    rho0, du0 = 1.3, -0.4
    period = 2 * math.pi / m.omega
    e0 = oscillator_energy(m, rho0, *indicator_1d(m, rho0, du0, 0.0))
    e1 = oscillator_energy(m, rho0, *indicator_1d(m, rho0, du0, period))
    assert abs(e1 - e0) < 1e-12
    g, gt = indicator_1d(m, rho0, du0, period)
    assert math.hypot(g - 1.0, gt - du0) < 1e-6


# -- verdicts -----------------------------------------------------------------


def test_nondecreasing_velocity_is_global():
    v = verdict_1d(ZeroBackground(1.0), const_data(2.0, 0.0), GRID)
    assert v.kind is VerdictKind.GLOBAL and v.margin == pytest.approx(2.0)


def test_boundary_is_breakdown_with_double_root():
    v = verdict_1d(ZeroBackground(1.0), const_data(0.5, -1.0), GRID)
    assert v.kind is VerdictKind.BREAKDOWN
    assert v.t_c == pytest.approx(2.0, rel=1e-12)


def test_zero_background_breakdown_time():
    v = verdict_1d(ZeroBackground(1.0), const_data(1.0, -3.0), GRID)
    assert v.kind is VerdictKind.BREAKDOWN
    assert v.t_c == pytest.approx(3.0 - math.sqrt(7.0), rel=1e-13)
    res = first_zero(indicator_rhs_zero_background(1.0, 1.0), [1.0, -3.0], 5.0)
    assert v.t_c == pytest.approx(res.event_t, rel=1e-10)


def test_attractive_background_global_example():
    m = ConstantBackground(-1.0, 2.0)
    v = verdict_1d(m, const_data(1.0, -0.5), GRID)
    assert v.kind is VerdictKind.GLOBAL
    res = first_zero(indicator_rhs_constant_background(-1.0, 2.0, 1.0), [1.0, -0.5], 50.0)
    # Gamma grows like exp(sqrt(2) t) and may trip the overflow guard; it never crosses zero
    assert res.status in ("finished", "overflow")
    assert np.all(res.y[:, 0] > 0)


def test_thin_background_has_no_admissible_slope():
    v = verdict_1d(ConstantBackground(1.0, 3.0), const_data(1.0, 0.0), GRID)
    assert v.kind is VerdictKind.BREAKDOWN and v.witness_alpha is not None


def test_non_strict_attractive_boundary_is_global():
    m = ConstantBackground(-1.0, 2.0)
    du0 = -(1 - 0.5) * math.sqrt(2.0)
    assert threshold_margin(m, 1.0, du0) == pytest.approx(0.0, abs=1e-15)
    assert verdict_1d(m, InitialData(constant_profile(1.0), linear_profile(du0)), [0.0]).kind is VerdictKind.GLOBAL


def test_strong_relaxation_is_one_sided():
    m = RelaxationStrong(1.0, 1.0, 0.2)
    assert verdict_1d(m, const_data(1.0, 0.5), GRID).kind is VerdictKind.GLOBAL_SUFFICIENT
    assert verdict_1d(m, const_data(1.0, -5.0), GRID).kind is VerdictKind.INDETERMINATE


def test_verdict_locates_worst_alpha():
    data = InitialData.from_text("1", "-1.5*atan(x-0.3)")
    v = verdict_1d(ZeroBackground(1.0), data, np.linspace(-2, 2, 41))
    assert v.witness_alpha == pytest.approx(0.3, abs=1e-6)
    assert v.kind is VerdictKind.BREAKDOWN


def test_empty_grid_rejected():
    with pytest.raises(ValueError):
        verdict_1d(ZeroBackground(1.0), const_data(1.0, 0.0), [])


@given(m=_models, rho0=st.floats(0.1, 3.0), du0=st.floats(-3.0, 3.0))
def test_margin_sign_agrees_with_kind(m, rho0, du0):
    v = verdict_1d(m, const_data(rho0, du0), [0.0])
    assert not (v.kind.is_global and v.kind.is_breakdown)
    if isinstance(m, RelaxationStrong):
        assert v.kind in (VerdictKind.GLOBAL_SUFFICIENT, VerdictKind.INDETERMINATE)
    elif v.margin > 0:
        assert v.kind is VerdictKind.GLOBAL
    elif v.margin < 0:
        assert v.kind is VerdictKind.BREAKDOWN


@given(k=st.floats(0.1, 3.0), rho0=st.floats(0.1, 3.0), du0=st.floats(-4.0, 4.0), lam=st.floats(0.1, 10.0))
def test_scaling_never_flips_strict_verdict(k, rho0, du0, lam):
    m = ZeroBackground(k)
    m1 = threshold_margin(m, rho0, du0)
    m2 = threshold_margin(m, lam * lam * rho0, lam * du0)
    assume(abs(m1) > 1e-9)
    assert math.copysign(1, m1) == math.copysign(1, m2)
    assert m2 == pytest.approx(lam * m1, rel=1e-12, abs=1e-12)


@settings(max_examples=40)
@given(m=_models, rho0=st.floats(0.1, 3.0), du0=st.floats(-3.0, 3.0))
def test_exact_verdicts_match_oracle(m, rho0, du0):
    assume(not isinstance(m, RelaxationStrong))
    margin = threshold_margin(m, rho0, du0)
    assume(abs(margin) > 1e-6)
    c = getattr(m, "c", 0.0)
    horizon = 20.0 / math.sqrt(abs(c * m.k) + abs(m.k) * rho0 + 1.0)
    if isinstance(m, RelaxationWeak):
        horizon = max(horizon, 4 * math.pi / m.mu)
    res = first_zero(_oracle_rhs(m, rho0), [1.0, du0], horizon)
    try:
        t_c = blowup_time_local(m, rho0, du0)
    except NoBlowupError:
        t_c = None
    if margin > 0:
        assert t_c is None and res.status != "event"
    else:
        assert t_c is not None
        if t_c < horizon:
            assert res.status == "event"
            assert abs(res.event_t - t_c) < 1e-6 * t_c


# -- blow-up times ------------------------------------------------------------


def test_blowup_times_examples():
    assert blowup_time_1d(ZeroBackground(1.0), const_data(1.0, -3.0), 0.0) == pytest.approx(3 - math.sqrt(7), rel=1e-14)
    assert blowup_time_1d(ConstantBackground(1.0, 1.0), const_data(1.0, -1.5), 0.0) == pytest.approx(
        math.asin(2.0 / 3.0), rel=1e-12
    )


def test_attractive_blowup_matches_oracle():
    t_c = blowup_time_local(ConstantBackground(-1.0, 1.0), 1.0, -0.5)
    res = first_zero(indicator_rhs_constant_background(-1.0, 1.0, 1.0), [1.0, -0.5], 20.0)
    assert t_c == pytest.approx(res.event_t, abs=1e-8)
    assert indicator_1d(ConstantBackground(-1.0, 1.0), 1.0, -0.5, t_c)[0] == pytest.approx(0.0, abs=1e-12)


def test_blowup_on_global_configuration_raises():
    with pytest.raises(NoBlowupError):
        blowup_time_1d(ZeroBackground(1.0), const_data(1.0, 0.0), 0.0)


# -- singular limit -----------------------------------------------------------


def test_vanishing_background_recovers_zero_background_threshold():
    k, rho0, c = 1.0, 1.0, 1e-6
    assert abs(math.sqrt(k * (2 * rho0 - c)) - math.sqrt(2 * k * rho0)) < 1e-3
    for c in (1e-2, 1e-4, 1e-6):
        cb = threshold_margin(ConstantBackground(k, c), rho0, 0.0)
        zb = threshold_margin(ZeroBackground(k), rho0, 0.0)
        assert abs(cb - zb) < c


# -- weak relaxation ----------------------------------------------------------


def test_critical_time_example():
    m = RelaxationWeak(1.0, 1.0, 1.0)
    ct = critical_time_weak(m, const_data(1.0, -0.3), 0.0)
    mu = math.sqrt(0.75)
    assert ct.mu == pytest.approx(mu)
    # with rho0 = c the stationary points satisfy tan(mu t) = 2 eps mu, and for
    # u0' < 0 the first of them is the minimum
    assert ct.t_star == pytest.approx(math.atan(2 * mu) / mu, rel=1e-14)
    assert ct.t_star == pytest.approx(1.2091995761561, rel=1e-12)
    g, gt = indicator_1d(m, 1.0, -0.3, ct.t_star)
    assert abs(gt) < 1e-12
    res = integrate_ivp(
        IvpSpec(indicator_rhs_relaxation(1.0, 1.0, 1.0, 1.0), [1.0, -0.3], (0.0, ct.t_star), rel_tol=1e-12, abs_tol=1e-14)
    )
    gtt = 1.0 * 1.0 - res.y[-1][1] / 1.0 - 1.0 * res.y[-1][0]
    assert abs(res.y[-1][1]) < 1e-6 * abs(gtt) * ct.t_star and gtt > 0


def test_critical_time_branch_for_fast_expansion():
    m = RelaxationWeak(1.0, 1.0, 2.0)
    rho0 = 1.5
    du0 = 2 * 2.0 * 1.0 * (rho0 - 1.0) + 0.5
    ct = critical_time_weak(m, const_data(rho0, du0), 0.0)
    assert table_quadrant(m, rho0, du0) == 3
    assert math.pi / m.mu < ct.t_star < 1.5 * math.pi / m.mu
    assert ct.quadrant == 3


@given(
    k=st.floats(0.2, 3.0),
    c=st.floats(0.2, 3.0),
    ratio=st.floats(1.05, 10.0),
    rho0=st.floats(0.1, 3.0),
    # Gamma_tt is recomputed from Gamma below, which needs |Gamma - rho0/c| above roundoff
    du0=st.floats(-3.0, 3.0).filter(lambda v: abs(v) > 1e-6),
)
def test_critical_time_is_first_minimum(k, c, ratio, rho0, du0):
    m = RelaxationWeak(k, c, ratio / (2 * math.sqrt(c * k)))
    quad_pred = table_quadrant(m, rho0, du0)
    assume(quad_pred is not None)
    ct = critical_time_weak(m, const_data(rho0, du0), 0.0)
    g, gt = indicator_1d(m, rho0, du0, ct.t_star)
    gtt = k * (rho0 - c * g) - gt / m.eps
    assert gtt > 0
    assert abs(gt) <= 1e-9 * (abs(gtt) * max(ct.t_star, 1e-3) + 1)
    assert ct.quadrant == quad_pred
    # no interior minimum before t*: Gamma on [0, t*] never dips below min(Gamma(0), Gamma(t*))
    ts = np.linspace(0.0, ct.t_star, 200)
    assert min(indicator_1d(m, rho0, du0, s)[0] for s in ts) >= min(g, 1.0) - 1e-12


def test_critical_time_limit_is_continuous():
    # rho0 > c and u0' -> 0-: the first minimum sits in the first quarter period
    # and slides continuously onto its endpoint t = 0
    m = RelaxationWeak(1.0, 1.0, 1.0)
    rho0 = 1.4
    ts = [critical_time_weak(m, const_data(rho0, -(10.0**-j)), 0.0).t_star for j in (1, 3, 5, 7)]
    assert all(t1 < t0 for t0, t1 in zip(ts, ts[1:]))
    assert ts[-1] < 1e-6
    rhs = indicator_rhs_relaxation(1.0, 1.0, 1.0, rho0)

    def flipped(t, y):
        # state (-Gamma', Gamma): the minimum is the first zero of component 0
        g, gt = rhs(t, [y[1], -y[0]])
        return [-gt, -y[0]]

    for du0, t_star in ((-0.1, ts[0]), (-1e-3, ts[1])):
        res = first_zero(flipped, [-du0, 1.0], 10.0, slope_index=None)
        assert res.event_t == pytest.approx(t_star, rel=1e-8)


def test_critical_time_degenerate_case():
    with pytest.raises(DegenerateCaseError):
        critical_time_weak(RelaxationWeak(1.0, 1.0, 1.0), const_data(1.0, 0.0), 0.0)


@given(k=st.floats(0.2, 3.0), c=st.floats(0.2, 3.0), rho0=st.floats(0.1, 3.0), du0=st.floats(-3.0, 3.0))
def test_printed_weak_condition_is_sufficient(k, c, rho0, du0):
    m = RelaxationWeak(k, c, 2.0 / (2 * math.sqrt(c * k)))
    if relaxation_printed_margin(m, rho0, du0) > 0:
        assert threshold_margin(m, rho0, du0) > 0


def test_weak_condition_large_eps_limit():
    k, c, rho0, du0 = 1.0, 1.0, 1.2, -0.5
    target = relaxation_limit_margin(k, c, rho0, du0)
    errs = [abs(relaxation_printed_margin(RelaxationWeak(k, c, eps), rho0, du0) - target) for eps in (1e2, 1e4, 1e6)]
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 1e-4


def test_weak_relaxation_density_converges():
    m = RelaxationWeak(1.0, 1.0, 1.0)
    data = const_data(1.5, 0.2)
    assert verdict_1d(m, data, [0.0]).kind is VerdictKind.GLOBAL
    rho, _ = solution_along_characteristic(m, data, 0.0, 40 * m.eps)
    assert abs(rho - 1.0) < 1e-3 * abs(1.5 - 1.0)


# -- regime taxonomy ----------------------------------------------------------


def test_case_1i():
    assert classify_regime(2.0, 1.0, 1.0).case_id == "1i"


def test_case_1ii():
    r = classify_regime(0.5, 1.0, 1.0)
    assert r.case_id == "1ii"
    assert r.d_max == pytest.approx(1 / math.sqrt(1.75), rel=1e-14)
    assert r.t_e_plus == pytest.approx(-0.5 + math.sqrt(1.75), rel=1e-14)


def test_case_2ii():
    r = classify_regime(-1.2, 1.0, 1.0)
    assert r.case_id == "2ii"
    assert r.d_min == pytest.approx(-1 / math.sqrt(0.56), rel=1e-14)
    assert r.d_max == pytest.approx(1 / math.sqrt(0.56), rel=1e-14)


def test_case_2i_and_3():
    r = classify_regime(-0.5, 1.0, 1.0)
    assert r.case_id == "2i" and r.t_zero == pytest.approx(0.5)
    r = classify_regime(-3.0, 1.0, 1.0)
    assert r.case_id == "3" and r.t_c_minus == pytest.approx(3 - math.sqrt(7), rel=1e-14)


def test_attractive_classification_rejected():
    with pytest.raises(ModelConstraintError):
        classify_regime(0.0, 1.0, -1.0)


@given(k=st.floats(0.2, 3.0), rho0=st.floats(0.2, 3.0), frac=st.floats(-1.4, 1.4))
def test_extrema_match_sampled_gradient(k, rho0, frac):
    d0 = frac * math.sqrt(k * rho0)
    r = classify_regime(d0, rho0, k)
    for t_e in (r.t_e_plus, r.t_e_minus):
        if t_e is None:
            continue
        assert t_e > 0
        assert extremum_time_residual(k, rho0, d0, t_e) == pytest.approx(0.0, abs=1e-10 * (1 + k * rho0) ** 2)
    if r.d_max is not None:
        d, _ = gradient_zero_background(k, rho0, d0, r.t_e_plus)
        assert d == pytest.approx(r.d_max, rel=1e-12)
        ts = np.linspace(0, 10 * r.t_e_plus + 10, 400)
        assert max(gradient_zero_background(k, rho0, d0, t)[0] for t in ts) <= r.d_max * (1 + 1e-12)
    if r.d_min is not None:
        d, _ = gradient_zero_background(k, rho0, d0, r.t_e_minus)
        assert d == pytest.approx(r.d_min, rel=1e-12)

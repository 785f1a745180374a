"""Independent numerical oracle.

Everything here is backed by scipy (``solve_ivp`` with the DOP853 pair,
``brentq``, QUADPACK ``quad``) and shares no code with the closed-form
modules or with :mod:`euler_poisson_ct.numerics`. Tests and the validation
suite compare the two routes.

The module also carries the raw right-hand sides of the indicator and
flow-map ODEs, written directly from the equations of motion.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

__all__ = [
    "IvpSpec",
    "IvpResult",
    "integrate_ivp",
    "oracle_root",
    "oracle_quad",
    "first_zero",
    "indicator_rhs_zero_background",
    "indicator_rhs_constant_background",
    "indicator_rhs_relaxation",
    "flow_rhs",
    "coupled_flow_indicator_rhs",
    "OracleError",
]


class OracleError(RuntimeError):
    """The oracle could not produce a trustworthy answer."""


@dataclass
class IvpSpec:
    """Initial-value problem description.

    Attributes:
        rhs: ``(t, y) -> dy/dt``.
        y0: Initial state.
        t_span: ``(t0, t1)``.
        rel_tol, abs_tol: Integration tolerances.
        events: Scalar functions of ``(t, y)``; the first sign change of any
            of them halts the integration.
        max_state: Halt once ``max|y|`` exceeds this (numerical blow-up).
    """

    rhs: Callable[[float, np.ndarray], Sequence[float]]
    y0: Sequence[float]
    t_span: tuple[float, float]
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    events: Sequence[Callable[[float, np.ndarray], float]] = ()
    max_state: float = 1e12
    max_step: float = math.inf

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not self.t_span[1] > self.t_span[0]:
            raise ValueError("t_span must be increasing")

    @property
    def dimension(self) -> int:
        return len(self.y0)


@dataclass
class IvpResult:
    """Outcome of :func:`integrate_ivp`.

    ``status`` is ``"finished"``, ``"event"``, ``"overflow"`` or ``"failed"``.
    ``event_t`` is the halting event time (events are terminal).
    """

    t: np.ndarray
    y: np.ndarray
    status: str
    message: str
    event_t: float | None = None
    event_index: int | None = None
    sol: object = field(default=None, repr=False)

    def __call__(self, t):
        if self.sol is None:
            raise OracleError("no dense output available")
        return self.sol(t)


def integrate_ivp(spec: IvpSpec) -> IvpResult:
    """Integrate with DOP853, locating the first event to ~1e-12 in ``t``.

    Events are terminal. Integration also stops when the state exceeds
    ``spec.max_state``; callers treat that as numerical blow-up.
    """
    evs = []
    for g in spec.events:

        def ev(t, y, g=g):
            return g(t, y)

        ev.terminal = True
        evs.append(ev)

    def growth(t, y):
        return spec.max_state - float(np.max(np.abs(y)))

    growth.terminal = True
    evs.append(growth)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = integrate.solve_ivp(
            spec.rhs,
            spec.t_span,
            np.asarray(spec.y0, dtype=float),
            method="DOP853",
            rtol=spec.rel_tol,
            atol=spec.abs_tol,
            events=evs,
            dense_output=True,
            max_step=spec.max_step,
        )
    event_t = event_index = None
    status = "finished" if res.status == 0 else ("failed" if res.status < 0 else "event")
    if res.status == 1:
        hits = [(te[0], i) for i, te in enumerate(res.t_events) if len(te)]
        event_t, event_index = min(hits)
        if event_index == len(spec.events):
            status = "overflow"
        else:
            # scipy's event location is an interpolant root; polish it on the
            # dense output with a tight brentq
            g = spec.events[event_index]
            lo = res.t[-2] if len(res.t) > 1 else spec.t_span[0]
            hi = event_t
            probe = hi + 1e-9 * max(1.0, abs(hi))
            try:
                if probe <= res.t[-1] and np.sign(g(lo, res.sol(lo))) != np.sign(g(probe, res.sol(probe))):
                    event_t = optimize.brentq(
                        lambda s: g(s, res.sol(s)), lo, probe, xtol=1e-15, rtol=4 * np.finfo(float).eps
                    )
            except ValueError:
                pass
    elif res.status == -1:
        status = "failed"
    return IvpResult(res.t, res.y.T, status, res.message, event_t, event_index, res.sol)


def oracle_root(f: Callable[[float], float], a: float, b: float) -> float:
    """Root of ``f`` on ``[a, b]`` via scipy ``brentq`` at relative 1e-12 or tighter.

    Raises:
        OracleError: no sign change, or ``f`` vanishes at both ends.
    """
    fa, fb = f(a), f(b)
    if fa == 0.0 and fb == 0.0:
        raise OracleError("f vanishes at both bracket ends")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise OracleError(f"no sign change on [{a}, {b}]")
    return optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def oracle_quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = 1e-12,
    singular: str | None = None,
    power: float | None = None,
) -> float:
    """QUADPACK integral.

    With ``singular="b"`` and ``power=p`` the integrand is treated as
    ``f(x) * (b - x)**p`` via the algebraic weight of QAWS, so ``f`` must be
    the smooth factor only. ``singular="a"`` does the same at ``a``.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if singular is None:
            val, _ = integrate.quad(f, a, b, epsabs=1e-15, epsrel=rel_tol, limit=500)
        elif singular == "b":
            val, _ = integrate.quad(f, a, b, weight="alg", wvar=(0.0, power), epsabs=1e-15, epsrel=rel_tol, limit=500)
        elif singular == "a":
            val, _ = integrate.quad(f, a, b, weight="alg", wvar=(power, 0.0), epsabs=1e-15, epsrel=rel_tol, limit=500)
        else:
            raise ValueError(f"singular must be None, 'a' or 'b', got {singular!r}")
    return float(val)


def _dip_before(res: IvpResult, index: int, slope_index: int | None, samples: int = 16) -> float | None:
    """Earliest zero of component ``index`` hidden inside a single step.

    Event detection only compares signs at step ends, so a short negative
    excursion inside one long step goes unseen. Each step is sampled on the
    dense output; local minima, located through sign changes of the
    component ``slope_index`` when given, are polished with brentq.
    """
    sol = res.sol
    ts = res.t
    stop = res.event_t if res.status == "event" else ts[-1]
    f = lambda s: float(sol(s)[index])  # noqa: E731
    for a, b in zip(ts[:-1], ts[1:]):
        if a >= stop:
            break
        b = min(b, stop)
        grid = np.linspace(a, b, samples + 1)
        vals = np.array([f(s) for s in grid])
        cands = []
        if slope_index is not None:
            slopes = np.array([float(sol(s)[slope_index]) for s in grid])
            for i in range(samples):
                if slopes[i] < 0.0 < slopes[i + 1]:
                    tm = optimize.brentq(lambda s: float(sol(s)[slope_index]), grid[i], grid[i + 1], xtol=1e-15)
                    cands.append((tm, f(tm)))
        cands += list(zip(grid[1:], vals[1:]))
        for tm, v in sorted(cands):
            if v <= 0.0 and tm < stop:
                j = int(np.searchsorted(grid, tm, side="left"))
                lo = grid[max(j - 1, 0)]
                if f(lo) <= 0.0:
                    return float(lo)
                return float(optimize.brentq(f, lo, tm, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return None


def first_zero(
    rhs: Callable[[float, np.ndarray], Sequence[float]],
    y0: Sequence[float],
    t_end: float,
    index: int = 0,
    rel_tol: float = 1e-11,
    abs_tol: float = 1e-13,
    max_step: float = math.inf,
    slope_index: int | None = -1,
) -> IvpResult:
    """Integrate until component ``index`` first crosses zero (or ``t_end``).

    ``slope_index`` names the component holding the time derivative of
    component ``index`` (default ``index + 1``; pass ``None`` when there is
    none). It is used to catch zeros that a single step would jump over.
    """
    if slope_index == -1:
        slope_index = index + 1 if index + 1 < len(y0) else None
    spec = IvpSpec(
        rhs,
        y0,
        (0.0, t_end),
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        events=[lambda t, y: y[index]],
        max_step=max_step,
    )
    res = integrate_ivp(spec)
    if res.status in ("event", "finished") and res.sol is not None:
        hidden = _dip_before(res, index, slope_index)
        if hidden is not None:
            res.status, res.event_t, res.event_index = "event", hidden, 0
    return res


# ---------------------------------------------------------------------------
# Equations of motion along one characteristic
# ---------------------------------------------------------------------------


def indicator_rhs_zero_background(k: float, rho0: float):
    """Gamma'' = k rho0, state (Gamma, Gamma')."""

    def rhs(t, y):
        return [y[1], k * rho0]

    return rhs


def indicator_rhs_constant_background(k: float, c: float, rho0: float):
    """Gamma'' + c k Gamma = k rho0."""

    def rhs(t, y):
        return [y[1], k * rho0 - c * k * y[0]]

    return rhs


def indicator_rhs_relaxation(k: float, c: float, eps: float, rho0: float):
    """Gamma'' + Gamma'/eps + c k Gamma = k rho0."""

    def rhs(t, y):
        return [y[1], k * rho0 - y[1] / eps - c * k * y[0]]

    return rhs


def density_gradient_rhs(k: float, a_of_t: Callable[[float], float] | None = None):
    """Regular (d, rho) system along a zero-background characteristic.

    ``d = u_x``: d' = -d^2 + k rho, rho' = -d rho. Used to check Riccati
    solutions whose coefficient has an integrable pole.
    """

    def rhs(t, y):
        d, r = y
        return [-d * d + k * r, -d * r]

    return rhs


def flow_rhs(nu: int, k: float, e0: float):
    """r'' = k e0 r^(-nu), state (r, r')."""

    def rhs(t, y):
        return [y[1], k * e0 / y[0] ** nu]

    return rhs


def coupled_flow_indicator_rhs(nu: int, k: float, e0: float, rho0w: float):
    """State (r, r', Gamma, Gamma') for an isotropic characteristic.

    ``rho0w`` is the weighted density n0(alpha) * alpha**nu. The indicator
    equation follows from differentiating r'' = k e0(alpha) r^(-nu) in alpha.
    """

    def rhs(t, y):
        r, rp, g, gp = y
        rn = r**nu
        return [rp, k * e0 / rn, gp, k * rho0w / rn - k * nu * e0 / (rn * r) * g]

    return rhs


__all__ += ["density_gradient_rhs"]

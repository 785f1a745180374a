"""Isotropic flow maps r(alpha, t) and the indicator Gamma = dr/dalpha.

For isotropic flows with geometric factor nu the weighted field
e = E r^nu is constant along particle paths, so each path obeys

    r'' = k e0(alpha) r^(-nu),  r(0) = alpha,  r'(0) = u0(alpha),

with e0(alpha) = int_0^alpha n0(xi) xi^nu dxi. The maps below are the
explicit solutions for nu = 0, 1, 2, 3; Gamma comes from the variational
equation obtained by differentiating in alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numerics import expand_bracket, find_root, quad, solve_ode
from .profiles import HALF_LINE, InitialData, weighted_mass
from .verdicts import ModelConstraintError

__all__ = [
    "IsotropicConfig",
    "ParticleData",
    "FlowPoint",
    "SphericalParams",
    "FlowBounds",
    "IndicatorTrace",
    "PastBlowupError",
    "flow_planar",
    "flow_cylindrical",
    "flow_spherical",
    "flow_nu3",
    "flow_point",
    "flow_bounds",
    "spherical_params",
    "cylindrical_time",
    "indicator_multid",
    "indicator_trace",
    "solution_multid",
    "energy_residual",
]


class PastBlowupError(ArithmeticError):
    """Gamma reached zero before the requested time.

    Attributes:
        t_c: The first zero of Gamma.
    """

    def __init__(self, message: str, t_c: float):
        super().__init__(message)
        self.t_c = t_c


@dataclass(frozen=True)
class ParticleData:
    """Initial data of the particle starting at ``alpha``.

    Attributes:
        n0, u0, du0: Density, velocity and velocity slope at alpha.
        e0: Weighted mass inside alpha.
        E0: e0 / alpha^nu.
        rho0w: Weighted density n0 alpha^nu (= de0/dalpha).
    """

    alpha: float
    n0: float
    u0: float
    du0: float
    e0: float
    E0: float
    rho0w: float


@dataclass
class IsotropicConfig:
    """Geometric factor, force constant and half-line initial data.

    The ``data.rho0`` profile is the number density n0(r).
    """

    nu: int
    k: float
    data: InitialData
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.nu < 0 or int(self.nu) != self.nu:
            raise ModelConstraintError(f"nu must be a nonnegative integer, got {self.nu}")
        if not self.k > 0:
            raise ModelConstraintError(f"isotropic model needs k > 0, got {self.k}")
        if self.data.domain != HALF_LINE:
            self.data = InitialData(
                self.data.rho0.with_domain(HALF_LINE), self.data.u0.with_domain(HALF_LINE)
            )

    def particle(self, alpha: float, require_positive_u0: bool = True) -> ParticleData:
        """Initial data at ``alpha`` (cached).

        Raises:
            ModelConstraintError: alpha <= 0, n0 < 0, or u0 not positive
                (u0 = 0 is admitted when ``require_positive_u0`` is false).
        """
        if not alpha > 0:
            raise ModelConstraintError(f"alpha must be positive, got {alpha}")
        alpha = float(alpha)
        p = self._cache.get(alpha)
        if p is None:
            n0 = self.data.rho0(alpha)
            if n0 < 0:
                raise ModelConstraintError(f"n0({alpha}) = {n0} is negative")
            e0 = weighted_mass(self.data.rho0, self.nu, alpha)
            n0, e0 = float(n0), float(e0)
            p = ParticleData(
                alpha,
                n0,
                float(self.data.u0(alpha)),
                float(self.data.u0.derivative(alpha)),
                e0,
                e0 / alpha**self.nu,
                n0 * alpha**self.nu,
            )
            self._cache[alpha] = p
        if require_positive_u0 and not p.u0 > 0:
            raise ModelConstraintError(f"isotropic analysis assumes u0 > 0; u0({alpha}) = {p.u0}")
        if p.u0 < 0:
            raise ModelConstraintError(f"u0({alpha}) = {p.u0} is negative")
        return p


@dataclass(frozen=True)
class FlowPoint:
    """Position and velocity of a particle at time ``t``; ``tau`` is the
    parametrisation variable for nu = 1, 2."""

    r: float
    u: float
    t: float
    tau: Optional[float] = None


@dataclass(frozen=True)
class SphericalParams:
    """Q: terminal speed; R: length scale; tau0: parameter offset."""

    Q: float
    R: float
    tau0: float


def _check_nu(cfg: IsotropicConfig, nu: int) -> None:
    if cfg.nu != nu:
        raise ModelConstraintError(f"this flow map needs nu={nu}, config has nu={cfg.nu}")


# ---------------------------------------------------------------------------
# Explicit maps
# ---------------------------------------------------------------------------


def _planar(alpha: float, u0: float, e0: float, k: float, t: float) -> FlowPoint:
    r = alpha + u0 * t + 0.5 * k * e0 * t * t
    if not r > 0:
        raise ArithmeticError(f"particle reached the origin by t={t}")
    return FlowPoint(r, u0 + k * e0 * t, t)


def flow_planar(cfg: IsotropicConfig, alpha: float, t: float) -> FlowPoint:
    """Planar map: constant acceleration k e0."""
    _check_nu(cfg, 0)
    p = cfg.particle(alpha)
    return _planar(alpha, p.u0, p.e0, cfg.k, t)


def cylindrical_time(alpha: float, u0: float, e0: float, k: float, tau: float) -> float:
    """t(tau) = alpha * int_0^tau exp(k e0 xi^2/2 + u0 xi) dxi."""
    if tau == 0.0:
        return 0.0
    a = k * e0
    return alpha * quad(lambda x: math.exp(0.5 * a * x * x + u0 * x), 0.0, tau, rel_tol=1e-13, abs_tol=0.0)


def _forcing_negligible(nu: int, alpha: float, u0: float, e0: float, k: float, t: float) -> bool:
    """True when the field moves the particle by less than rounding of alpha + u0 t.

    The acceleration never exceeds k e0 / alpha^nu, so the displacement from
    free streaming is at most k e0 t^2 / (2 alpha^nu).
    """
    return k * e0 * t * t <= 1e-17 * alpha**nu * (alpha + u0 * t)


def _cylindrical(alpha: float, u0: float, e0: float, k: float, t: float) -> FlowPoint:
    if t == 0.0:
        return FlowPoint(alpha, u0, 0.0, 0.0)
    if e0 == 0.0 or _forcing_negligible(1, alpha, u0, e0, k, t):
        tau = math.log1p(u0 * t / alpha) / u0
        return FlowPoint(alpha + u0 * t, u0, t, tau)
    a = k * e0

    def resid(tau: float) -> float:
        return cylindrical_time(alpha, u0, e0, k, tau) - t

    # free streaming gives an upper estimate of tau for the same t
    guess = math.log1p(u0 * t / alpha) / u0
    lo, hi = expand_bracket(resid, 0.0, max(guess, 1e-12))
    tau = find_root(resid, lo, hi, xtol=1e-300, rtol=1e-15)
    r = alpha * math.exp(0.5 * a * tau * tau + u0 * tau)
    return FlowPoint(r, a * tau + u0, t, tau)


def flow_cylindrical(cfg: IsotropicConfig, alpha: float, t: float) -> FlowPoint:
    """Cylindrical map via the parameter tau, with t(tau) inverted by Brent."""
    _check_nu(cfg, 1)
    p = cfg.particle(alpha)
    return _cylindrical(alpha, p.u0, p.e0, cfg.k, t)


def spherical_params(alpha: float, u0: float, e0: float, k: float) -> SphericalParams:
    """Q = sqrt(u0^2 + 2 k e0/alpha), R = 2 k e0/Q^2 and tau0 > 0 with
    cosh(tau0) = 2 alpha/R - 1 = 1 + alpha u0^2/(k e0)."""
    if not e0 > 0:
        raise ValueError("spherical parameters need e0 > 0")
    Q = math.sqrt(u0 * u0 + 2.0 * k * e0 / alpha)
    R = 2.0 * k * e0 / (Q * Q)
    z = alpha * u0 * u0 / (k * e0)
    tau0 = math.log1p(z + math.sqrt(z) * math.sqrt(z + 2.0))
    return SphericalParams(Q, R, tau0)


def _spherical(alpha: float, u0: float, e0: float, k: float, t: float) -> FlowPoint:
    if e0 == 0.0 or _forcing_negligible(2, alpha, u0, e0, k, t):
        return FlowPoint(alpha + u0 * t, u0, t)
    sp = spherical_params(alpha, u0, e0, k)
    Q, R, tau0 = sp.Q, sp.R, sp.tau0
    if t == 0.0:
        return FlowPoint(alpha, u0, 0.0, 0.0)

    def time_of(tau: float) -> float:
        # sinh(tau+tau0) - sinh(tau0) written without cancellation
        return R / (2.0 * Q) * (tau + 2.0 * math.cosh(tau0 + 0.5 * tau) * math.sinh(0.5 * tau))

    def resid(tau: float) -> float:
        return time_of(tau) - t

    lo, hi = expand_bracket(resid, 0.0, max(t / (alpha + 1e-300) * 1e-3, 1e-12))
    tau = find_root(resid, lo, hi, xtol=1e-300, rtol=1e-15)
    r = alpha + R * math.sinh(tau0 + 0.5 * tau) * math.sinh(0.5 * tau)
    u = Q * math.sqrt(max(1.0 - R / r, 0.0))
    return FlowPoint(r, u, t, tau)


def flow_spherical(cfg: IsotropicConfig, alpha: float, t: float) -> FlowPoint:
    """Spherical map r = (R/2)(1 + cosh(tau + tau0)) with t(tau) inverted."""
    _check_nu(cfg, 2)
    p = cfg.particle(alpha)
    return _spherical(alpha, p.u0, p.e0, cfg.k, t)


def _nu3(alpha: float, u0: float, e0: float, k: float, t: float) -> FlowPoint:
    C = u0 * u0 + k * e0 / (alpha * alpha)
    r = math.sqrt(alpha * alpha + 2.0 * alpha * u0 * t + C * t * t)
    return FlowPoint(r, (alpha * u0 + C * t) / r, t)


def flow_nu3(cfg: IsotropicConfig, alpha: float, t: float) -> FlowPoint:
    """Closed-form map for nu = 3 (u0 = 0 admitted)."""
    _check_nu(cfg, 3)
    p = cfg.particle(alpha, require_positive_u0=False)
    return _nu3(alpha, p.u0, p.e0, cfg.k, t)


def _ode_flow(nu: int, alpha: float, u0: float, e0: float, k: float, t: float) -> FlowPoint:
    if t == 0.0:
        return FlowPoint(alpha, u0, 0.0)
    sol = solve_ode(lambda s, y: [y[1], k * e0 / y[0] ** nu], 0.0, [alpha, u0], t, rtol=1e-12, atol=1e-14)
    r, u = sol.y[-1]
    return FlowPoint(float(r), float(u), t)


def flow_point(cfg: IsotropicConfig, alpha: float, t: float) -> FlowPoint:
    """Flow map for any nu: explicit for nu <= 3, integrated otherwise."""
    if cfg.nu == 3:
        return flow_nu3(cfg, alpha, t)
    p = cfg.particle(alpha)
    if cfg.nu == 0:
        return _planar(alpha, p.u0, p.e0, cfg.k, t)
    if cfg.nu == 1:
        return _cylindrical(alpha, p.u0, p.e0, cfg.k, t)
    if cfg.nu == 2:
        return _spherical(alpha, p.u0, p.e0, cfg.k, t)
    return _ode_flow(cfg.nu, alpha, p.u0, p.e0, cfg.k, t)


def energy_residual(nu: int, alpha: float, u0: float, e0: float, k: float, r: float, u: float) -> float:
    """u^2 minus its value predicted by the energy integral at radius r."""
    if nu == 0:
        return u * u - u0 * u0 - 2.0 * k * e0 * (r - alpha)
    if nu == 1:
        return u * u - u0 * u0 - 2.0 * k * e0 * math.log(r / alpha)
    return u * u - u0 * u0 - 2.0 * k * e0 / (nu - 1) * (alpha ** (1 - nu) - r ** (1 - nu))


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlowBounds:
    """Time-dependent bracket ``lo <= r <= hi`` and a time-independent ``floor``."""

    lo: float
    hi: float
    floor: float


def _cyl_upper(alpha: float, u0: float, e0: float, k: float, t: float) -> float:
    # r'' <= a / sqrt(q) with q = alpha^2 + 2 alpha u0 s + a s^2, integrated twice
    a = k * e0
    if a == 0.0 or t == 0.0:
        return alpha + u0 * t
    if _forcing_negligible(1, alpha, u0, e0, k, t):
        # r'' <= k e0 / alpha; the closed form below cancels badly here
        return alpha + u0 * t + 0.5 * a * t * t / alpha
    sa = math.sqrt(a)
    q = alpha * alpha + 2.0 * alpha * u0 * t + a * t * t
    sq = math.sqrt(q)
    J0 = (math.log(2.0 * sa * sq + 2.0 * a * t + 2.0 * alpha * u0) - math.log(2.0 * sa * alpha + 2.0 * alpha * u0)) / sa
    J1 = (sq - alpha) / a - alpha * u0 / a * J0
    return alpha + u0 * t + a * (t * J0 - J1)


def flow_bounds(nu: int, alpha: float, u0: float, e0: float, k: float, t: float) -> FlowBounds:
    """Expansion bounds for nu >= 1.

    Lower: [alpha^(nu+1) + (nu+1) alpha^nu u0 t + (nu+1)/2 k e0 t^2]^(1/(nu+1)).
    Upper: alpha + Q t with Q^2 = u0^2 + 2 k e0 alpha^(1-nu)/(nu-1) for
    nu >= 2; for nu = 1, the double integral of k e0 over the lower bound.
    Floor: alpha exp(-u0^2/(2 k e0)) for nu = 1 and
    [(nu-1) u0^2/(2 k e0) + alpha^(1-nu)]^(-1/(nu-1)) for nu >= 2.

    Raises:
        ModelConstraintError: nu = 0 (the planar map is explicit).
    """
    if nu < 1:
        raise ModelConstraintError("flow bounds are for nu >= 1; the planar map is explicit")
    m = nu + 1
    lo = (alpha**m + m * alpha**nu * u0 * t + 0.5 * m * k * e0 * t * t) ** (1.0 / m)
    if nu == 1:
        hi = _cyl_upper(alpha, u0, e0, k, t)
        floor = alpha * math.exp(-u0 * u0 / (2.0 * k * e0)) if e0 > 0 else alpha
    else:
        Q = math.sqrt(u0 * u0 + 2.0 * k * e0 * alpha ** (1 - nu) / (nu - 1))
        hi = alpha + Q * t
        if e0 > 0:
            floor = ((nu - 1) * u0 * u0 / (2.0 * k * e0) + alpha ** (1 - nu)) ** (-1.0 / (nu - 1))
        else:
            floor = alpha
    return FlowBounds(lo, hi, floor)


# ---------------------------------------------------------------------------
# Indicator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndicatorTrace:
    """Samples along one characteristic.

    ``rho`` is the number density n = rho0w / (r^nu Gamma). ``t_c`` is the
    first zero of Gamma when reached within the horizon; samples then stop
    before it.
    """

    alpha: float
    t: np.ndarray
    gamma: np.ndarray
    gamma_t: np.ndarray
    r: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    t_c: Optional[float] = None


def _variational_rhs(nu: int, k: float, e0: float, rho0w: float):
    ke = k * e0
    kr = k * rho0w

    def rhs(t, y):
        r, rp, g, gp = y
        rn = r**nu
        return [rp, ke / rn, gp, kr / rn - nu * ke / (rn * r) * g]

    return rhs


def _integrate(cfg: IsotropicConfig, p: ParticleData, t_end: float):
    rhs = _variational_rhs(cfg.nu, cfg.k, p.e0, p.rho0w)
    return solve_ode(
        rhs,
        0.0,
        [p.alpha, p.u0, 1.0, p.du0],
        t_end,
        rtol=1e-12,
        atol=1e-14,
        events=[lambda t, y: y[2]],
    )


def indicator_multid(cfg: IsotropicConfig, alpha: float, t: float) -> tuple[float, float]:
    """(Gamma, Gamma_t) at ``t`` from the variational equation.

    Raises:
        PastBlowupError: Gamma vanished in (0, t]; ``t_c`` carries the time.
    """
    p = cfg.particle(alpha, require_positive_u0=cfg.nu != 3)
    if t == 0.0:
        return 1.0, p.du0
    sol = _integrate(cfg, p, t)
    if sol.status == "event":
        raise PastBlowupError(f"Gamma vanishes at t={sol.event_t[0]:.12g} before t={t}", sol.event_t[0])
    if sol.status != "finished":
        raise ArithmeticError(f"indicator integration failed: {sol.message}")
    return float(sol.y[-1][2]), float(sol.y[-1][3])


def indicator_trace(cfg: IsotropicConfig, alpha: float, t_end: float, samples: int = 101) -> IndicatorTrace:
    """Sample Gamma, r, u and n on ``samples`` equally spaced times."""
    p = cfg.particle(alpha, require_positive_u0=cfg.nu != 3)
    sol = _integrate(cfg, p, t_end)
    t_c = sol.event_t[0] if sol.status == "event" else None
    last = sol.t[-1]
    ts = np.linspace(0.0, t_end, samples)
    ts = ts[ts < last] if t_c is not None else ts[ts <= last]
    ys = np.array([sol(s) for s in ts]) if ts.size else np.zeros((0, 4))
    r, u, g, gt = (ys[:, i] for i in range(4)) if ts.size else (np.array([]),) * 4
    rho = p.rho0w / (r**cfg.nu * g) if ts.size else np.array([])
    return IndicatorTrace(alpha, ts, g, gt, r, u, rho, t_c)


def solution_multid(cfg: IsotropicConfig, alpha: float, t: float) -> tuple[float, float]:
    """(n, u_r) at the point reached from ``alpha`` at time ``t``.

    Raises:
        PastBlowupError: Gamma vanished by ``t``.
    """
    p = cfg.particle(alpha, require_positive_u0=cfg.nu != 3)
    g, gt = indicator_multid(cfg, alpha, t)
    if not g > 0.0:
        raise PastBlowupError(f"Gamma = {g:.6g} <= 0 at t={t}", t)
    r = flow_point(cfg, alpha, t).r
    return p.rho0w / (r**cfg.nu * g), gt / g

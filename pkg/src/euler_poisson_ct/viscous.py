"""Envelope bounds for the viscous model and a finite-difference check.

For the viscous system beta = u_x/rho obeys
    beta_t + u beta_x = k + beta_xx / rho,
and a maximum principle confines beta(x, t) to
[inf beta0 + k t, sup beta0 + k t]. Along a characteristic
1/rho = 1/rho0 + int_0^t beta, which turns the beta envelope into two-sided
density and velocity-gradient bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .numerics import golden_min
from .profiles import InitialData
from .verdicts import ModelConstraintError, Verdict, VerdictKind

__all__ = [
    "BetaEnvelope",
    "ThresholdCrossedError",
    "CflError",
    "beta_bounds",
    "rho_bounds_viscous",
    "d_bounds_viscous",
    "envelope_from_data",
    "verdict_viscous",
    "SpatialGrid",
    "FDCheckResult",
    "fd_beta_check",
    "first_denominator_zero",
]


class ThresholdCrossedError(ArithmeticError):
    """A bound's denominator vanished; ``bracket`` encloses the vanishing time."""

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(message)
        self.bracket = bracket


class CflError(ValueError):
    """Requested explicit time step exceeds the stability limit."""


@dataclass(frozen=True)
class BetaEnvelope:
    """Initial range of beta = u0'/rho0 and the forcing constant ``k``."""

    beta_inf0: float
    beta_sup0: float
    k: float

    def __post_init__(self):
        if self.beta_inf0 > self.beta_sup0:
            raise ValueError("beta_inf0 must not exceed beta_sup0")
        if self.k < 0:
            raise ModelConstraintError("the envelope assumes k >= 0")


def beta_bounds(env: BetaEnvelope, t: float) -> tuple[float, float]:
    """Envelope of beta at time ``t``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return env.beta_inf0 + env.k * t, env.beta_sup0 + env.k * t


def first_denominator_zero(k: float, rho0: float, beta0: float) -> Optional[float]:
    """Earliest t > 0 with rho0 (k t^2/2 + beta0 t) + 1 = 0, or None."""
    a, b = 0.5 * k * rho0, rho0 * beta0
    if a == 0.0:
        return -1.0 / b if b < 0.0 else None
    disc = b * b - 4.0 * a
    if b >= 0.0 or disc < 0.0:
        return None
    # smaller positive root, written without cancellation
    return 2.0 / (-b + math.sqrt(disc))


def _denominator(k: float, rho0: float, beta0: float, t: float) -> float:
    return rho0 * (0.5 * k * t * t + beta0 * t) + 1.0


def _check_denominators(env: BetaEnvelope, rho0: float, t: float) -> None:
    # the inf-edge denominator is the smaller one and vanishes first
    if _denominator(env.k, rho0, env.beta_inf0, t) <= 0.0:
        tz = first_denominator_zero(env.k, rho0, env.beta_inf0)
        tz = t if tz is None else tz
        bracket = (math.nextafter(tz, 0.0), math.nextafter(tz, math.inf))
        raise ThresholdCrossedError(f"density bound denominator vanishes at t={tz:.17g}", bracket)


def rho_bounds_viscous(env: BetaEnvelope, rho0_alpha: float, t: float) -> tuple[float, float]:
    """Two-sided density bound along the characteristic from alpha.

    Raises:
        ThresholdCrossedError: a denominator is nonpositive at ``t``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    _check_denominators(env, rho0_alpha, t)
    lo = rho0_alpha / _denominator(env.k, rho0_alpha, env.beta_sup0, t)
    hi = rho0_alpha / _denominator(env.k, rho0_alpha, env.beta_inf0, t)
    return lo, hi


def d_bounds_viscous(env: BetaEnvelope, rho0_alpha: float, t: float) -> tuple[float, float]:
    """Two-sided bound on d = u_x = beta * rho along the characteristic.

    The product of the beta envelope and the (positive) density interval is
    bounded by its corner values, which is valid for either sign of beta.

    Raises:
        ThresholdCrossedError: a density denominator is nonpositive at ``t``.
    """
    r_lo, r_hi = rho_bounds_viscous(env, rho0_alpha, t)
    b_lo, b_hi = beta_bounds(env, t)
    lo = min(b_lo * r_lo, b_lo * r_hi)
    hi = max(b_hi * r_lo, b_hi * r_hi)
    return lo, hi


def _extreme(f, xs: np.ndarray, vals: np.ndarray, sense: int) -> float:
    """Grid extremum of ``f`` polished by golden section; ``sense`` = +1 for max."""
    i = int(np.argmax(sense * vals))
    best = float(vals[i])
    if xs.size >= 3:
        lo, hi = float(xs[max(i - 1, 0)]), float(xs[min(i + 1, xs.size - 1)])
        if hi > lo:
            _, v = golden_min(lambda x: -sense * f(x), lo, hi, tol=1e-12)
            best = max(sense * best, -v) * sense
    return best


def envelope_from_data(data: InitialData, k: float, alphas: Sequence[float]) -> tuple[BetaEnvelope, float, float]:
    """Beta envelope from the data on a grid, plus max rho0 and its location."""
    xs = np.sort(np.asarray(alphas, dtype=float))
    if xs.size == 0:
        raise ValueError("alpha grid is empty")

    def beta(x: float) -> float:
        r = data.rho0(x)
        if not r > 0.0:
            raise ModelConstraintError(f"viscous model needs rho0 > 0; rho0({x}) = {r}")
        return data.u0.derivative(x) / r

    bvals = np.array([beta(x) for x in xs])
    rvals = np.array([data.rho0(x) for x in xs])
    b_inf = _extreme(beta, xs, bvals, -1)
    b_sup = _extreme(beta, xs, bvals, +1)
    r_max = _extreme(data.rho0, xs, rvals, +1)
    i = int(np.argmax(rvals))
    return BetaEnvelope(b_inf, b_sup, k), r_max, float(xs[i])


def verdict_viscous(data: InitialData, k: float, alphas: Sequence[float]) -> Verdict:
    """Sufficient thresholds for the viscous model.

    With beta0 = u0'/rho0 and the threshold -sqrt(2k/rho0(alpha)):
    BreakdownSufficient if sup beta0 lies below it for some alpha,
    GlobalSufficient if inf beta0 lies above it for every alpha, otherwise
    Indeterminate. Both tests are decided by the largest rho0. A breakdown
    verdict reports in ``t_bound`` the time by which the density bound's
    denominator vanishes.
    """
    if not k > 0:
        raise ModelConstraintError("viscous thresholds need k > 0")
    env, r_max, a_max = envelope_from_data(data, k, alphas)
    thr = -math.sqrt(2.0 * k / r_max)
    upper_margin = env.beta_inf0 - thr
    lower_margin = env.beta_sup0 - thr
    if lower_margin < 0.0:
        t_bound = first_denominator_zero(k, r_max, env.beta_sup0)
        return Verdict(
            VerdictKind.BREAKDOWN_SUFFICIENT,
            witness_alpha=a_max,
            margin=lower_margin,
            t_bound=t_bound,
            lower_margin=lower_margin,
        )
    if upper_margin > 0.0:
        return Verdict(VerdictKind.GLOBAL_SUFFICIENT, witness_alpha=a_max, margin=upper_margin, lower_margin=lower_margin)
    return Verdict(VerdictKind.INDETERMINATE, witness_alpha=a_max, margin=upper_margin, lower_margin=lower_margin)


# ---------------------------------------------------------------------------
# Finite-difference check of the beta equation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform cell-centred grid on a truncated interval."""

    x_min: float = -10.0
    x_max: float = 10.0
    n_cells: int = 400

    def __post_init__(self):
        if not self.x_max > self.x_min or self.n_cells < 3:
            raise ValueError("grid needs x_max > x_min and at least 3 cells")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True)
class FDCheckResult:
    """Diagnostics of :func:`fd_beta_check`.

    Attributes:
        max_oscillation: max over time of (max_x beta - min_x beta).
        max_deviation: max over time and space of |beta - (beta0 + k t)|.
        times: Output times.
        rho_implied: Density along the characteristic from alpha = 0 obtained
            from 1/rho = 1/rho0 + int beta, with beta read off the grid.
        rho_envelope: The envelope density bound at the same times.
        steps: Number of explicit steps taken.
        dt_max: Largest step used.
    """

    max_oscillation: float
    max_deviation: float
    times: np.ndarray
    rho_implied: np.ndarray
    rho_envelope: np.ndarray
    steps: int
    dt_max: float


def _lagrangian_tables(data: InitialData, k: float, grid: SpatialGrid, n_fine: int):
    pad = 0.25 * (grid.x_max - grid.x_min)
    alpha = np.linspace(grid.x_min - pad, grid.x_max + pad, n_fine)
    rho0 = np.array([data.rho0(a) for a in alpha])
    u0 = np.array([data.u0(a) for a in alpha])
    du0 = np.array([data.u0.derivative(a) for a in alpha])
    # field E0 = (mass to the left - mass to the right)/2 on the truncated line
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rho0[1:] + rho0[:-1]) * np.diff(alpha))])
    E0 = cum - 0.5 * cum[-1]
    return alpha, rho0, u0, du0, E0


def fd_beta_check(
    data: InitialData,
    k: float,
    grid: SpatialGrid = SpatialGrid(),
    t_end: float = 0.5,
    dt: Optional[float] = None,
    n_out: int = 51,
    safety: float = 0.9,
) -> FDCheckResult:
    """Evolve beta_t + u beta_x = k + beta_xx/rho explicitly from constant beta0.

    Velocity and density are taken from the exact zero-background
    characteristics x = alpha + u0 t + k E0 t^2/2, Gamma = 1 + u0' t + k rho0 t^2/2,
    inverted at the grid nodes by interpolation. Advection is first-order
    upwind, diffusion is central, boundaries carry the exact value
    beta0 + k t.

    Raises:
        ValueError: beta0 is not spatially constant on the grid.
        CflError: ``dt`` exceeds the explicit stability limit.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    x = grid.centers
    beta_init = np.array([data.u0.derivative(a) / data.rho0(a) for a in x])
    beta0 = float(beta_init[0])
    if np.max(np.abs(beta_init - beta0)) > 1e-12 * max(1.0, abs(beta0)):
        raise ValueError("fd_beta_check needs spatially constant beta0 = u0'/rho0")

    alpha, rho0_f, u0_f, du0_f, E0_f = _lagrangian_tables(data, k, grid, 16 * grid.n_cells + 1)
    dx = grid.dx

    def fields(t: float) -> tuple[np.ndarray, np.ndarray]:
        xa = alpha + u0_f * t + 0.5 * k * E0_f * t * t
        gam = 1.0 + du0_f * t + 0.5 * k * rho0_f * t * t
        if np.any(gam <= 0.0) or np.any(np.diff(xa) <= 0.0):
            raise ArithmeticError(f"characteristics cross before t={t}")
        u = np.interp(x, xa, u0_f + k * E0_f * t)
        rho = np.interp(x, xa, rho0_f / gam)
        return u, rho

    def stable_dt(u: np.ndarray, rho: np.ndarray) -> float:
        diff_lim = 0.5 * float(np.min(rho)) * dx * dx
        umax = float(np.max(np.abs(u)))
        adv_lim = dx / umax if umax > 0 else math.inf
        # combined explicit limit for upwind advection plus central diffusion
        return 1.0 / (1.0 / diff_lim + 1.0 / adv_lim)

    beta = beta_init.copy()
    t = 0.0
    out_t = np.linspace(0.0, t_end, n_out)
    rho_implied = [data.rho0(0.0)]
    int_beta = 0.0
    prev_b0 = float(np.interp(0.0, x, beta))
    next_out = 1
    max_osc = float(np.ptp(beta))
    max_dev = float(np.max(np.abs(beta - beta0)))
    steps = 0
    dt_max = 0.0
    rho00 = data.rho0(0.0)
    u00, E00 = float(np.interp(0.0, alpha, u0_f)), float(np.interp(0.0, alpha, E0_f))
    while next_out < n_out:
        u, rho = fields(t)
        lim = stable_dt(u, rho)
        if dt is not None:
            if dt > lim:
                raise CflError(f"dt={dt:.3e} exceeds the stability limit {lim:.3e}; use a smaller step")
            h = dt
        else:
            h = safety * lim
        h = min(h, out_t[next_out] - t)
        bx_up = np.zeros_like(beta)
        bx_up[1:-1] = np.where(
            u[1:-1] > 0.0, (beta[1:-1] - beta[:-2]) / dx, (beta[2:] - beta[1:-1]) / dx
        )
        bxx = np.zeros_like(beta)
        bxx[1:-1] = (beta[2:] - 2.0 * beta[1:-1] + beta[:-2]) / (dx * dx)
        beta = beta + h * (k - u * bx_up + bxx / rho)
        t += h
        beta[0] = beta[-1] = beta0 + k * t
        steps += 1
        dt_max = max(dt_max, h)
        max_osc = max(max_osc, float(np.ptp(beta)))
        max_dev = max(max_dev, float(np.max(np.abs(beta - (beta0 + k * t)))))
        # beta along the particle from alpha = 0, integrated by trapezoid
        x0 = 0.0 + u00 * t + 0.5 * k * E00 * t * t
        b_now = float(np.interp(x0, x, beta))
        int_beta += 0.5 * h * (prev_b0 + b_now)
        prev_b0 = b_now
        if t >= out_t[next_out] - 1e-15:
            rho_implied.append(1.0 / (1.0 / rho00 + int_beta))
            next_out += 1
    env = BetaEnvelope(beta0, beta0, k)
    rho_env = np.array([0.5 * sum(rho_bounds_viscous(env, rho00, s)) for s in out_t])
    return FDCheckResult(max_osc, max_dev, out_t, np.array(rho_implied), rho_env, steps, dt_max)

"""Explicit solution of the scalar Riccati equation w' = a(t) w + b(t) w^2.

With F(t) = exp(int_0^t a) and B = b F the solution is

    w(t) = w0 F(t) / (1 - w0 int_0^t B),

which exists exactly as long as the denominator stays positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .numerics import find_root, quad

__all__ = [
    "RiccatiProblem",
    "BlowupReachedError",
    "riccati_solution",
    "riccati_global",
    "riccati_first_violation",
    "riccati_denominator",
    "zero_background_problem",
]

GRID_POINTS = 1024


class BlowupReachedError(ArithmeticError):
    """The Riccati denominator vanished before the requested time.

    Attributes:
        bracket: ``(t_lo, t_hi)`` with the denominator positive at ``t_lo``,
            nonpositive at ``t_hi`` and ``t_hi - t_lo < 1e-9 * t_hi``.
    """

    def __init__(self, bracket: tuple[float, float]):
        super().__init__(f"Riccati solution blows up in [{bracket[0]:.17g}, {bracket[1]:.17g}]")
        self.bracket = bracket

    @property
    def t_c(self) -> float:
        return 0.5 * (self.bracket[0] + self.bracket[1])


@dataclass(frozen=True)
class RiccatiProblem:
    """w' = a(t) w + b(t) w^2 with w(0) = w0.

    Attributes:
        a, b: Coefficient functions.
        w0: Initial value.
        integrating_factor: Optional closed form of exp(int_0^t a). Supply it
            when ``a`` has an integrable pole whose exponential is regular,
            e.g. a = k/beta with beta linear in t.
    """

    a: Callable[[float], float]
    b: Callable[[float], float]
    w0: float
    integrating_factor: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def factor(self, t: float) -> float:
        """exp(int_0^t a)."""
        if self.integrating_factor is not None:
            return self.integrating_factor(t)
        if t == 0.0:
            return 1.0
        return math.exp(quad(self.a, 0.0, t))

    def B(self, t: float) -> float:
        return self.b(t) * self.factor(t)

    def int_B(self, t0: float, t1: float) -> float:
        if t0 == t1:
            return 0.0
        return quad(self.B, t0, t1)


def riccati_denominator(p: RiccatiProblem, t: float) -> float:
    """1 - w0 int_0^t B."""
    if p.w0 == 0.0:
        return 1.0
    return 1.0 - p.w0 * p.int_B(0.0, t)


def _narrow(D: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    """Shrink a (positive, nonpositive) bracket of ``D`` below 1e-9 relative width."""
    root = find_root(D, lo, hi, xtol=1e-16, rtol=1e-14)
    width = 2.5e-10 * max(abs(root), 1e-300)
    a, b = max(lo, root - width), min(hi, root + width)
    if D(a) <= 0.0:
        a = lo
    if D(b) > 0.0:
        b = hi
    while b - a >= 1e-9 * b:
        m = 0.5 * (a + b)
        if D(m) > 0.0:
            a = m
        else:
            b = m
    return float(a), float(b)


def riccati_first_violation(p: RiccatiProblem, horizon: float) -> Optional[tuple[float, float]]:
    """Earliest time in ``(0, horizon]`` at which the denominator is nonpositive.

    Returns a tight bracket ``(t_lo, t_hi)`` around it, or ``None`` when the
    solution exists on the whole interval. The running integral is tabulated
    on a 1024-point grid and every interior maximum of w0 * int B (a sign
    change of B) is polished with Brent's method, so tangencies between grid
    points are not missed.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if p.w0 == 0.0:
        return None
    ts = np.linspace(0.0, horizon, GRID_POINTS + 1)
    Bs = np.array([p.B(t) for t in ts])
    w0 = p.w0
    cum = 0.0

    def D_from(t0: float, base: float) -> Callable[[float], float]:
        return lambda s: 1.0 - w0 * (base + p.int_B(t0, s))

    for i in range(GRID_POINTS):
        t0, t1 = ts[i], ts[i + 1]
        D = D_from(t0, cum)
        nxt = cum + p.int_B(t0, t1)
        # candidate interior maximum of w0 * int B where w0 * B goes + to -
        g0, g1 = w0 * Bs[i], w0 * Bs[i + 1]
        if g0 > 0.0 and g1 < 0.0:
            tm = find_root(lambda s: w0 * p.B(s), t0, t1)
            if D(tm) <= 0.0:
                return _narrow(D, t0, tm)
        if 1.0 - w0 * nxt <= 0.0:
            return _narrow(D, t0, t1)
        cum = nxt
    return None


def riccati_global(p: RiccatiProblem, horizon: float) -> bool:
    """True iff w0 * int_0^t B < 1 for every t in ``[0, horizon]``."""
    return riccati_first_violation(p, horizon) is None


def riccati_solution(p: RiccatiProblem, t: float) -> float:
    """w(t) from the explicit formula.

    Raises:
        BlowupReachedError: the denominator vanishes somewhere in ``(0, t]``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0 or p.w0 == 0.0:
        return p.w0 * p.factor(t) if t else p.w0
    hit = riccati_first_violation(p, t)
    if hit is not None:
        raise BlowupReachedError(hit)
    return p.w0 * p.factor(t) / riccati_denominator(p, t)


def zero_background_problem(k: float, rho0: float, du0: float) -> RiccatiProblem:
    """Velocity-gradient Riccati problem along a zero-background characteristic.

    Here d = u_x obeys d' + d^2 = (k / beta) d with beta = d / rho = kt + du0/rho0,
    so exp(int a) = beta(t) / beta(0) and the denominator reduces to
    1 + du0 t + k rho0 t^2 / 2.
    """
    if du0 == 0.0:
        return RiccatiProblem(lambda t: 0.0, lambda t: -1.0, 0.0)
    beta0 = du0 / rho0

    def beta(t: float) -> float:
        return k * t + beta0

    def a(t: float) -> float:
        return k / beta(t)

    return RiccatiProblem(a, lambda t: -1.0, du0, integrating_factor=lambda t: beta(t) / beta0)

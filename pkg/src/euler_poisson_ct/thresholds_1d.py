"""One-dimensional indicator functions, thresholds and blow-up times.

Along the characteristic from alpha the density and velocity gradient are
rho = rho0/Gamma and u_x = Gamma_t/Gamma, where Gamma = dx/dalpha solves a
linear ODE with constant coefficients:

    zero background          Gamma'' = k rho0
    constant background      Gamma'' + c k Gamma = k rho0
    with relaxation          Gamma'' + Gamma'/eps + c k Gamma = k rho0

with Gamma(0) = 1 and Gamma'(0) = u0'(alpha). Every function here works from
the explicit solutions of these equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .numerics import find_root
from .profiles import InitialData
from .verdicts import ModelConstraintError, Verdict, VerdictKind, sweep_min

__all__ = [
    "ZeroBackground",
    "ConstantBackground",
    "RelaxationWeak",
    "RelaxationStrong",
    "Model1D",
    "RegimeClassification",
    "CriticalTimeWeak",
    "PastBlowupError",
    "NoBlowupError",
    "DegenerateCaseError",
    "indicator_1d",
    "gamma_1d",
    "solution_along_characteristic",
    "threshold_margin",
    "verdict_1d",
    "classify_regime",
    "critical_time_weak",
    "table_quadrant",
    "blowup_time_1d",
    "blowup_time_local",
    "relaxation_printed_margin",
    "relaxation_limit_margin",
    "oscillator_energy",
]


class PastBlowupError(ArithmeticError):
    """Gamma is nonpositive: the requested time is at or past breakdown."""


class NoBlowupError(ValueError):
    """The characteristic never reaches Gamma = 0."""


class DegenerateCaseError(ValueError):
    """The requested quantity is not defined for these data."""


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroBackground:
    """Euler-Poisson with no background charge; repulsive ``k > 0``."""

    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise ModelConstraintError(f"zero-background model needs k > 0, got k={self.k}")


@dataclass(frozen=True)
class ConstantBackground:
    """Constant background charge ``c > 0``; ``k`` of either sign, nonzero."""

    k: float
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ModelConstraintError(f"background charge must satisfy c > 0, got c={self.c}")
        if self.k == 0:
            raise ModelConstraintError("k = 0 decouples the system; no threshold to compute")

    @property
    def omega(self) -> float:
        """Oscillation frequency sqrt(c k) (k > 0)."""
        return math.sqrt(self.c * self.k)

    @property
    def growth(self) -> float:
        """Exponential rate sqrt(-c k) (k < 0)."""
        return math.sqrt(-self.c * self.k)


def _relaxation_split(k: float, c: float) -> float:
    return 1.0 / (2.0 * math.sqrt(c * k))


@dataclass(frozen=True)
class RelaxationWeak:
    """Background charge with weak friction, eps > 1/(2 sqrt(c k))."""

    k: float
    c: float
    eps: float

    def __post_init__(self):
        if not (self.k > 0 and self.c > 0 and self.eps > 0):
            raise ModelConstraintError("relaxation model needs k > 0, c > 0, eps > 0")
        if not self.eps > _relaxation_split(self.k, self.c):
            raise ModelConstraintError(
                f"weak relaxation needs eps > {_relaxation_split(self.k, self.c):.6g}, got {self.eps}"
            )

    @property
    def lam(self) -> float:
        return 0.5 / self.eps

    @property
    def mu(self) -> float:
        return math.sqrt(self.c * self.k - self.lam**2)


@dataclass(frozen=True)
class RelaxationStrong:
    """Background charge with strong friction, eps < 1/(2 sqrt(c k))."""

    k: float
    c: float
    eps: float

    def __post_init__(self):
        if not (self.k > 0 and self.c > 0 and self.eps > 0):
            raise ModelConstraintError("relaxation model needs k > 0, c > 0, eps > 0")
        if not self.eps < _relaxation_split(self.k, self.c):
            raise ModelConstraintError(
                f"strong relaxation needs eps < {_relaxation_split(self.k, self.c):.6g}, got {self.eps}"
            )

    @property
    def lam(self) -> float:
        return 0.5 / self.eps

    @property
    def kappa(self) -> float:
        return math.sqrt(self.lam**2 - self.c * self.k)


Model1D = Union[ZeroBackground, ConstantBackground, RelaxationWeak, RelaxationStrong]


# ---------------------------------------------------------------------------
# Indicator
# ---------------------------------------------------------------------------


def _strong_coeffs(model: RelaxationStrong, rho0: float, du0: float) -> tuple[float, float]:
    a = 0.5 * (1.0 - rho0 / model.c)
    b = a * model.lam / model.kappa + du0 / (2.0 * model.kappa)
    return a, b


def indicator_1d(model: Model1D, rho0: float, du0: float, t: float) -> tuple[float, float]:
    """Closed-form ``(Gamma, Gamma_t)`` for a characteristic with data ``(rho0, du0)``."""
    k = model.k
    if isinstance(model, ZeroBackground):
        return 1.0 + du0 * t + 0.5 * k * rho0 * t * t, du0 + k * rho0 * t
    if isinstance(model, ConstantBackground):
        P = rho0 / model.c
        if k > 0:
            w = model.omega
            s, co = math.sin(w * t), math.cos(w * t)
            g = P + (du0 / w) * s + (1.0 - P) * co
            gt = du0 * co - (1.0 - P) * w * s
            return g, gt
        s = model.growth
        em, ep = math.exp(-s * t), math.exp(s * t)
        A = 0.5 * (1.0 - P - du0 / s)
        B = 0.5 * (1.0 - P + du0 / s)
        return P + A * em + B * ep, -s * A * em + s * B * ep
    if isinstance(model, RelaxationWeak):
        c, lam, mu = model.c, model.lam, model.mu
        A = (c - rho0) / c
        Bs = (2.0 * model.eps * c * du0 + (c - rho0)) / (2.0 * model.eps * mu * c)
        e = math.exp(-lam * t)
        s, co = math.sin(mu * t), math.cos(mu * t)
        g = rho0 / c + e * (A * co + Bs * s)
        gt = e * ((mu * Bs - lam * A) * co - (mu * A + lam * Bs) * s)
        return g, gt
    if isinstance(model, RelaxationStrong):
        a, b = _strong_coeffs(model, rho0, du0)
        lam, kap = model.lam, model.kappa
        e1, e2 = math.exp(-(kap + lam) * t), math.exp((kap - lam) * t)
        g = 1.0 - 2.0 * a + (a - b) * e1 + (a + b) * e2
        gt = -(kap + lam) * (a - b) * e1 + (kap - lam) * (a + b) * e2
        return g, gt
    raise TypeError(f"unknown model {model!r}")


def _local(data: InitialData, alpha: float) -> tuple[float, float]:
    return data.rho0(alpha), data.u0.derivative(alpha)


def gamma_1d(model: Model1D, data: InitialData, alpha: float, t: float) -> tuple[float, float]:
    """``(Gamma, Gamma_t)`` at ``(alpha, t)``."""
    rho0, du0 = _local(data, alpha)
    return indicator_1d(model, rho0, du0, t)


def solution_along_characteristic(
    model: Model1D, data: InitialData, alpha: float, t: float
) -> tuple[float, float]:
    """``(rho, u_x)`` at the point reached from ``alpha`` at time ``t``.

    Raises:
        PastBlowupError: Gamma <= 0 at ``t``.
    """
    rho0, du0 = _local(data, alpha)
    g, gt = indicator_1d(model, rho0, du0, t)
    if not g > 0.0:
        raise PastBlowupError(f"Gamma(alpha={alpha}, t={t}) = {g:.6g} <= 0")
    return rho0 / g, gt / g


def oscillator_energy(model: ConstantBackground, rho0: float, g: float, gt: float) -> float:
    """Conserved energy of the undamped indicator oscillator.

    For Gamma'' + c k Gamma = k rho0 the combination
    Gamma_t^2/2 + c k Gamma^2/2 - k rho0 Gamma is constant, so the phase
    portrait (Gamma, Gamma_t) is an ellipse centred at (rho0/c, 0).
    """
    k, c = model.k, model.c
    return 0.5 * gt * gt + 0.5 * c * k * g * g - k * rho0 * g


# ---------------------------------------------------------------------------
# Critical time for weak relaxation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CriticalTimeWeak:
    """First local minimum of Gamma for the weakly damped indicator.

    Attributes:
        t_star: Time of the first minimum (0 when Gamma starts at a minimum).
        quadrant: 1..4, the quarter period of [0, 2 pi/mu) containing
            mu * t_star.
        mu: Damped frequency sqrt(c k - 1/(4 eps^2)).
    """

    t_star: float
    quadrant: int
    mu: float


def table_quadrant(model: RelaxationWeak, rho0: float, du0: float) -> Optional[int]:
    """Quarter period predicted from the signs of u0' and u0' - 2 eps k (rho0 - c).

    Returns ``None`` on the boundaries between cases.
    """
    s = 2.0 * model.eps * model.k * (rho0 - model.c)
    if du0 < min(0.0, s):
        return 1
    if s < du0 < 0.0:
        return 2
    if du0 > max(0.0, s):
        return 3
    if 0.0 < du0 < s:
        return 4
    return None


def _weak_critical(model: RelaxationWeak, rho0: float, du0: float) -> CriticalTimeWeak:
    mu, c, k = model.mu, model.c, model.k
    if du0 == 0.0 and rho0 == c:
        raise DegenerateCaseError("u0' = 0 with rho0 = c: Gamma is identically 1, no interior minimum")
    num = 2.0 * model.eps * mu * du0
    den = du0 + 2.0 * model.eps * k * (c - rho0)
    # stationary points satisfy mu t = theta0 + n pi, theta0 in [0, pi); atan of
    # the ratio keeps tiny angles that atan2 would round onto pi
    if den == 0.0:
        theta0, upper_half = 0.5 * math.pi, 1
    else:
        theta0 = math.atan(num / den)
        # which half of [0, pi) theta0 lies in, decided before rounding
        upper_half = int(theta0 < 0.0)
        if theta0 < 0.0:
            theta0 += math.pi
    A = (c - rho0) / c
    Bs = (2.0 * model.eps * c * du0 + (c - rho0)) / (2.0 * model.eps * mu * c)
    for n in range(4):
        th = theta0 + n * math.pi
        t = th / mu
        if t == 0.0 and du0 != 0.0:
            continue
        # Gamma_tt = -c k (Gamma - rho0/c) at a stationary point, from the
        # oscillating part alone so that it keeps its sign when tiny
        dev = math.exp(-model.lam * t) * (A * math.cos(th) + Bs * math.sin(th))
        if -c * k * dev > 0.0:
            return CriticalTimeWeak(t, min(2 * n + upper_half + 1, 4), mu)
    raise DegenerateCaseError("no local minimum of Gamma found in the first period")  # pragma: no cover


def critical_time_weak(model: RelaxationWeak, data: InitialData, alpha: float) -> CriticalTimeWeak:
    """First time ``t*`` at which Gamma(alpha, .) attains a local minimum.

    Raises:
        DegenerateCaseError: u0'(alpha) = 0 and rho0(alpha) = c.
    """
    rho0, du0 = _local(data, alpha)
    return _weak_critical(model, rho0, du0)


def relaxation_printed_margin(model: RelaxationWeak, rho0: float, du0: float) -> float:
    """Amplitude form of the weak-relaxation condition (RHS - LHS).

    Positive values certify global existence but the condition is only
    sufficient: it bounds the damped oscillation by its full amplitude at
    ``t*`` instead of its value there.
    """
    c, k, eps = model.c, model.k, model.eps
    t_star = _weak_critical(model, rho0, du0).t_star if not (du0 == 0.0 and rho0 == c) else 0.0
    lhs = abs(du0 + (c - rho0) / (2.0 * eps * c))
    inner = rho0 * rho0 / c * math.expm1(t_star / eps) + 2.0 * rho0 - c
    rhs = math.sqrt(k - 1.0 / (4.0 * c * eps * eps)) * _ssqrt(inner)
    return rhs - lhs


def relaxation_limit_margin(k: float, c: float, rho0: float, du0: float) -> float:
    """Large-eps limit of :func:`relaxation_printed_margin`; equals the
    undamped constant-background margin."""
    return _ssqrt(k * (2.0 * rho0 - c)) - abs(du0)


# ---------------------------------------------------------------------------
# Margins and verdicts
# ---------------------------------------------------------------------------


def _ssqrt(v: float) -> float:
    return math.copysign(math.sqrt(abs(v)), v)


def threshold_margin(model: Model1D, rho0: float, du0: float) -> float:
    """Signed distance to the model's threshold at one point; positive = global side.

    - zero background: u0' + sqrt(2 k rho0)  (strict)
    - constant background, k > 0: sqrt(k(2 rho0 - c)) - |u0'|  (strict;
      negative when 2 rho0 < c, where no u0' qualifies)
    - constant background, k < 0: u0' + (1 - rho0/c) sqrt(-c k)  (non-strict)
    - weak relaxation: min Gamma at the first minimum t*  (strict)
    - strong relaxation: u0' - min{0, -(1 - rho0/c)(kappa + lambda)}
      (sufficient only)
    """
    k = model.k
    if isinstance(model, ZeroBackground):
        return du0 + math.sqrt(2.0 * k * rho0)
    if isinstance(model, ConstantBackground):
        if k > 0:
            return _ssqrt(k * (2.0 * rho0 - model.c)) - abs(du0)
        return du0 + (1.0 - rho0 / model.c) * model.growth
    if isinstance(model, RelaxationWeak):
        if du0 == 0.0 and rho0 == model.c:
            return 1.0
        t_star = _weak_critical(model, rho0, du0).t_star
        return indicator_1d(model, rho0, du0, t_star)[0]
    if isinstance(model, RelaxationStrong):
        rhs = min(0.0, -(1.0 - rho0 / model.c) * (model.kappa + model.lam))
        return du0 - rhs
    raise TypeError(f"unknown model {model!r}")


def _is_global_point(model: Model1D, margin: float) -> bool:
    if isinstance(model, ConstantBackground) and model.k < 0:
        return margin >= 0.0
    return margin > 0.0


def verdict_1d(model: Model1D, data: InitialData, alphas: Sequence[float]) -> Verdict:
    """Threshold verdict over an alpha grid.

    The worst margin on the grid is polished between neighbouring grid
    points. For the exact (iff) models the verdict is Global or Breakdown and
    a Breakdown carries the earliest blow-up time over the grid and the
    polished witness. Strong relaxation only has a sufficient condition and
    returns GlobalSufficient or Indeterminate.
    """
    xs = np.asarray(alphas, dtype=float)
    if xs.size == 0:
        raise ValueError("alpha grid is empty")
    for x in xs:
        if data.rho0(x) < 0.0:
            raise ModelConstraintError(f"rho0({x}) is negative")

    def m(a: float) -> float:
        return threshold_margin(model, *_local(data, a))

    res = sweep_min(m, xs)
    if _is_global_point(model, res.minimum):
        kind = VerdictKind.GLOBAL_SUFFICIENT if isinstance(model, RelaxationStrong) else VerdictKind.GLOBAL
        return Verdict(kind, witness_alpha=res.argmin, margin=res.minimum)
    if isinstance(model, RelaxationStrong):
        return Verdict(VerdictKind.INDETERMINATE, witness_alpha=res.argmin, margin=res.minimum)
    bad = [float(a) for a, v in zip(res.alphas, res.values) if not _is_global_point(model, v)]
    bad.append(res.argmin)
    times = []
    for a in bad:
        try:
            times.append(blowup_time_local(model, *_local(data, a)))
        except NoBlowupError:
            pass
    t_c = min(times) if times else None
    return Verdict(VerdictKind.BREAKDOWN, t_c=t_c, witness_alpha=res.argmin, margin=res.minimum)


# ---------------------------------------------------------------------------
# Blow-up times
# ---------------------------------------------------------------------------


def _polish(model: Model1D, rho0: float, du0: float, t: float) -> float:
    """Refine a closed-form root with Brent on a small bracket when it is a crossing."""
    g = lambda s: indicator_1d(model, rho0, du0, s)[0]  # noqa: E731
    h = 1e-7 * max(t, 1e-12)
    lo, hi = max(t - h, 0.0), t + h
    try:
        glo, ghi = g(lo), g(hi)
    except OverflowError:
        return t
    if glo > 0.0 and ghi < 0.0:
        return find_root(g, lo, hi, xtol=1e-16, rtol=1e-15)
    return t


def blowup_time_local(model: Model1D, rho0: float, du0: float) -> float:
    """Earliest positive root of Gamma for point data ``(rho0, du0)``.

    Raises:
        NoBlowupError: Gamma stays positive for all t > 0.
    """
    k = model.k
    if isinstance(model, ZeroBackground):
        disc = du0 * du0 - 2.0 * k * rho0
        if du0 >= 0.0 or disc < 0.0:
            raise NoBlowupError("Gamma stays positive: u0' > -sqrt(2 k rho0)")
        # smaller root of 1 + du0 t + k rho0 t^2/2 in a cancellation-free form
        return 2.0 / (-du0 + math.sqrt(disc))
    if isinstance(model, ConstantBackground):
        P = rho0 / model.c
        if k > 0:
            w = model.omega
            R = math.hypot(1.0 - P, du0 / w)
            if R < P or R == 0.0:
                raise NoBlowupError("oscillation amplitude below the equilibrium level")
            phi = math.atan2(du0 / w, 1.0 - P)
            psi = math.acos(max(-1.0, min(1.0, -P / R)))
            cands = []
            for base in (phi - psi, phi + psi):
                th = base % (2.0 * math.pi)
                if th <= 0.0:
                    th += 2.0 * math.pi
                cands.append(th)
            return _polish(model, rho0, du0, min(cands) / w)
        s = model.growth
        A = 0.5 * (1.0 - P - du0 / s)
        B = 0.5 * (1.0 - P + du0 / s)
        # Gamma e^{st} = B X^2 + P X + A with X = e^{st} > 1
        roots = []
        if B == 0.0:
            if P != 0.0:
                roots.append(-A / P)
        else:
            disc = P * P - 4.0 * A * B
            if disc >= 0.0:
                sq = math.sqrt(disc)
                q = -0.5 * (P + math.copysign(sq, P))
                if q != 0.0:
                    roots.extend([q / B, A / q])
                else:
                    roots.append(-P / (2.0 * B))
        xs = [x for x in roots if x > 1.0]
        if not xs:
            raise NoBlowupError("Gamma stays positive for all t > 0")
        return _polish(model, rho0, du0, math.log(min(xs)) / s)
    if isinstance(model, RelaxationWeak):
        if du0 == 0.0 and rho0 == model.c:
            raise NoBlowupError("Gamma is identically 1")
        t_star = _weak_critical(model, rho0, du0).t_star
        g = lambda s: indicator_1d(model, rho0, du0, s)[0]  # noqa: E731
        g_star = g(t_star)
        if g_star > 0.0:
            raise NoBlowupError("Gamma stays positive at its first (lowest) minimum")
        if g_star == 0.0:
            return t_star
        return find_root(g, 0.0, t_star, xtol=1e-16, rtol=1e-15)
    if isinstance(model, RelaxationStrong):
        a, b = _strong_coeffs(model, rho0, du0)
        lam, kap = model.lam, model.kappa
        num = (kap + lam) * (a - b)
        den = (kap - lam) * (a + b)
        if den == 0.0 or num / den <= 1.0:
            raise NoBlowupError("Gamma is monotone on t > 0 and tends to rho0/c > 0")
        ts = math.log(num / den) / (2.0 * kap)
        g = lambda s: indicator_1d(model, rho0, du0, s)[0]  # noqa: E731
        gs = g(ts)
        if gs > 0.0:
            raise NoBlowupError("Gamma stays positive at its only stationary point")
        if gs == 0.0:
            return ts
        return find_root(g, 0.0, ts, xtol=1e-16, rtol=1e-15)
    raise TypeError(f"unknown model {model!r}")


def blowup_time_1d(model: Model1D, data: InitialData, alpha: float) -> float:
    """Earliest positive root of Gamma(alpha, .).

    Raises:
        NoBlowupError: the characteristic from ``alpha`` never breaks down.
    """
    return blowup_time_local(model, *_local(data, alpha))


# ---------------------------------------------------------------------------
# Regime taxonomy for the zero-background velocity gradient
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegimeClassification:
    """Qualitative behaviour of d = u_x along one zero-background characteristic.

    ``case_id`` is one of ``"1i"``, ``"1ii"``, ``"2i"``, ``"2ii"``, ``"3"``;
    only the quantities defined for that case are set.
    """

    case_id: str
    d_max: Optional[float] = None
    d_min: Optional[float] = None
    t_e_plus: Optional[float] = None
    t_e_minus: Optional[float] = None
    t_zero: Optional[float] = None
    t_c_minus: Optional[float] = None

    @property
    def description(self) -> str:
        return {
            "1i": "d decreasing, 0 < d <= d0, d ~ 2/t",
            "1ii": "0 < d <= d_max, maximum at t_e+",
            "2i": "d rises through zero at t_zero to d_max at t_e+",
            "2ii": "d_min at t_e- then d_max at t_e+",
            "3": "d decreases without bound; breakdown at t_c-",
        }[self.case_id]


def extremum_time_residual(k: float, rho0: float, d0: float, t: float) -> float:
    """Left side of the extremum-time quadrant equation for d' = 0:
    (k rho0)^2 t^2/2 + k rho0 d0 t + d0^2 - k rho0."""
    kr = k * rho0
    return 0.5 * kr * kr * t * t + kr * d0 * t + d0 * d0 - kr


def classify_regime(d0: float, rho0: float, k: float) -> RegimeClassification:
    """Case of the zero-background taxonomy for initial gradient ``d0``.

    Raises:
        ModelConstraintError: ``k <= 0`` (no threshold) or ``rho0 <= 0``.
    """
    if not k > 0:
        raise ModelConstraintError("classification needs a repulsive force k > 0")
    if not rho0 > 0:
        raise ModelConstraintError("classification needs rho0 > 0")
    kr = k * rho0
    root1, root2 = math.sqrt(kr), math.sqrt(2.0 * kr)
    if d0 <= -root2:
        disc = max(d0 * d0 - 2.0 * kr, 0.0)
        return RegimeClassification("3", t_c_minus=2.0 / (-d0 + math.sqrt(disc)))
    if d0 >= root1:
        return RegimeClassification("1i")
    sq = math.sqrt(2.0 * kr - d0 * d0)
    d_ext = kr / sq
    t_plus = (sq - d0) / kr
    if d0 >= 0.0:
        return RegimeClassification("1ii", d_max=d_ext, t_e_plus=t_plus)
    if d0 >= -root1:
        return RegimeClassification("2i", d_max=d_ext, t_e_plus=t_plus, t_zero=-d0 / kr)
    return RegimeClassification(
        "2ii", d_max=d_ext, d_min=-d_ext, t_e_plus=t_plus, t_e_minus=(-sq - d0) / kr
    )


def gradient_zero_background(k: float, rho0: float, d0: float, t: float) -> tuple[float, float]:
    """``(d, rho)`` at time ``t`` along a zero-background characteristic."""
    g, gt = indicator_1d(ZeroBackground(k), rho0, d0, t)
    if not g > 0.0:
        raise PastBlowupError(f"Gamma = {g:.6g} <= 0 at t={t}")
    return gt / g, rho0 / g


__all__ += ["extremum_time_residual", "gradient_zero_background"]

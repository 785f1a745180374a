"""Threshold verdicts for the isotropic model with geometric factor nu.

The planar (nu = 0) and nu = 3 cases have exact criteria. For nu = 1 and
nu >= 2 there is an upper threshold on u0' (above it the solution is global)
and a lower threshold (below it the solution breaks down). The upper
thresholds involve the implicit root functions h(alpha) and h_nu(alpha).

Margins are reported in units of u0' and are positive on the global side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .flowmap import IsotropicConfig, ParticleData, cylindrical_time
from .numerics import expand_bracket, find_root, quad, quad_singular_end
from .profiles import DomainError
from .verdicts import ModelConstraintError, Verdict, VerdictKind, sweep_min

__all__ = [
    "ThresholdBand",
    "NoFiniteRootError",
    "band",
    "h_cylindrical",
    "h_cylindrical_lhs",
    "h_general",
    "h_general_lhs",
    "nu3_coefficients",
    "nu3_threshold",
    "nu3_blowup_time",
    "verdict_planar_halfline",
    "verdict_cylindrical",
    "verdict_spherical_lower",
    "verdict_general_nu",
    "verdict_nu3",
    "verdict_multid",
]

# closest approach of a root bracket to the singular end of the h_nu weight
ENDPOINT_GAP = 1e-8


class NoFiniteRootError(ArithmeticError):
    """The h_nu equation has no root inside ``(0, alpha^(1-nu))``.

    The left-hand side stays below 1 up to the endpoint, which happens for
    nu >= 3 when the weight is integrable there. Every M_nu below the
    endpoint then passes the global test, so callers use ``saturated``
    (the endpoint) in place of the root.
    """

    def __init__(self, message: str, saturated: float):
        super().__init__(message)
        self.saturated = saturated


@dataclass(frozen=True)
class ThresholdBand:
    """Thresholds on u0' at one alpha.

    Attributes:
        lower: Below this value the solution breaks down.
        upper: Above this value the solution is global.
        exact: The critical value when lower and upper coincide.
    """

    lower: float
    upper: float
    exact: Optional[float] = None


def _grid(alphas: Sequence[float]) -> np.ndarray:
    xs = np.sort(np.asarray(alphas, dtype=float))
    if xs.size == 0:
        raise ValueError("alpha grid is empty")
    if np.any(xs <= 0):
        raise ModelConstraintError("alpha grid must be positive on the half line")
    return xs


def _check_nu(cfg: IsotropicConfig, ok: bool, what: str) -> None:
    if not ok:
        raise ModelConstraintError(f"{what} does not apply to nu={cfg.nu}")


# ---------------------------------------------------------------------------
# Planar half line
# ---------------------------------------------------------------------------


def _planar_local(cfg: IsotropicConfig, a: float) -> tuple[float, float]:
    n0 = cfg.data.rho0(a)
    if n0 < 0:
        raise ModelConstraintError(f"n0({a}) = {n0} is negative")
    return n0, cfg.data.u0.derivative(a)


def _planar_blowup(k: float, n0: float, du0: float) -> float:
    return 2.0 / (-du0 + math.sqrt(max(du0 * du0 - 2.0 * k * n0, 0.0)))


def verdict_planar_halfline(cfg: IsotropicConfig, alphas: Sequence[float]) -> Verdict:
    """Exact verdict for nu = 0: global iff u0' > -sqrt(2 k n0) at every alpha.

    A Breakdown carries t_c = 2 / sup(-u0' + sqrt(u0'^2 - 2 k n0)) over the
    violating grid points and the polished witness.
    """
    _check_nu(cfg, cfg.nu == 0, "the planar verdict")
    xs = _grid(alphas)
    k = cfg.k

    def margin(a: float) -> float:
        n0, du0 = _planar_local(cfg, a)
        return du0 + math.sqrt(2.0 * k * n0)

    res = sweep_min(margin, xs)
    if res.minimum > 0.0:
        return Verdict(VerdictKind.GLOBAL, witness_alpha=res.argmin, margin=res.minimum)
    bad = [float(a) for a, v in zip(res.alphas, res.values) if v <= 0.0] + [res.argmin]
    t_c = min(_planar_blowup(k, *_planar_local(cfg, a)) for a in bad)
    return Verdict(VerdictKind.BREAKDOWN, t_c=t_c, witness_alpha=res.argmin, margin=res.minimum)


# ---------------------------------------------------------------------------
# Cylindrical, nu = 1
# ---------------------------------------------------------------------------


def h_cylindrical_lhs(p: ParticleData, k: float, h: float) -> float:
    """k alpha^2 n0 u0 * int_0^h (h - eta) e^eta / (u0^2 + 2 k E0 alpha eta)^(3/2) deta."""
    if h <= 0.0:
        return 0.0
    c2 = 2.0 * k * p.E0 * p.alpha
    u2 = p.u0 * p.u0
    pref = k * p.alpha**2 * p.n0 * p.u0

    def g(eta: float) -> float:
        return (h - eta) * math.exp(eta) / (u2 + c2 * eta) ** 1.5

    return pref * quad(g, 0.0, h, rel_tol=1e-13, abs_tol=0.0)


def h_cylindrical(cfg: IsotropicConfig, alpha: float) -> float:
    """Root h > 0 of ``h_cylindrical_lhs = 1``; ``inf`` when n0(alpha) = 0.

    The left-hand side vanishes at h = 0 and increases without bound, so
    the root is unique.
    """
    _check_nu(cfg, cfg.nu == 1, "h_cylindrical")
    p = cfg.particle(alpha)
    if p.n0 == 0.0:
        return math.inf
    f = lambda h: h_cylindrical_lhs(p, cfg.k, h) - 1.0  # noqa: E731
    lo, hi = expand_bracket(f, 0.0, 1.0)
    return find_root(f, lo, hi, xtol=1e-15, rtol=1e-14)


def _upper_cylindrical(cfg: IsotropicConfig, p: ParticleData) -> float:
    if p.n0 == 0.0:
        # the integral term drops out and the condition is M <= 0
        return cfg.k * p.E0 / p.u0
    h = h_cylindrical(cfg, p.alpha)
    return -cfg.k / p.u0 * (p.alpha * p.n0 * h - p.E0)


def _cylindrical_breakdown_time(cfg: IsotropicConfig, p: ParticleData) -> Optional[float]:
    """t(tau*) at the first zero tau* of b(tau) = 1 + alpha u0' tau + (k/2) alpha rho0 tau^2."""
    a, x, k = p.alpha, p.du0, cfg.k
    disc = x * x - 2.0 * k * p.n0
    if x >= 0.0 or disc < 0.0:
        return None
    tau = 2.0 / (a * (-x + math.sqrt(disc)))
    return cylindrical_time(a, p.u0, p.e0, k, tau)


def _cylindrical_fires(cfg: IsotropicConfig, p: ParticleData) -> bool:
    lower = -math.sqrt(2.0 * cfg.k * p.n0)
    if p.n0 == 0.0:
        # b(tau) = 1 + alpha u0' tau needs u0' < 0 to vanish
        return p.du0 < 0.0
    return p.du0 <= lower


def verdict_cylindrical(cfg: IsotropicConfig, alphas: Sequence[float]) -> Verdict:
    """Two-threshold verdict for nu = 1.

    BreakdownSufficient when u0' <= -sqrt(2 k n0) at some grid alpha; the
    bound ``t_bound`` is the earliest t(tau*) over the firing points, where
    tau* is the first zero of b. GlobalSufficient when
    u0' > -(k/u0)[alpha n0 h - E0] at every alpha. Indeterminate otherwise.
    """
    _check_nu(cfg, cfg.nu == 1, "the cylindrical verdict")
    xs = _grid(alphas)
    k = cfg.k

    def lower_margin(a: float) -> float:
        p = cfg.particle(a)
        return p.du0 + math.sqrt(2.0 * k * p.n0)

    def upper_margin(a: float) -> float:
        p = cfg.particle(a)
        return p.du0 - _upper_cylindrical(cfg, p)

    low = sweep_min(lower_margin, xs)
    fired = [float(a) for a in list(xs) + [low.argmin] if _cylindrical_fires(cfg, cfg.particle(float(a)))]
    if fired:
        bounds = [(t, a) for a in fired if (t := _cylindrical_breakdown_time(cfg, cfg.particle(a))) is not None]
        t_bound, witness = min(bounds) if bounds else (None, fired[0])
        return Verdict(
            VerdictKind.BREAKDOWN_SUFFICIENT,
            witness_alpha=witness,
            margin=low.minimum,
            t_bound=t_bound,
            lower_margin=low.minimum,
        )
    up = sweep_min(upper_margin, xs)
    kind = VerdictKind.GLOBAL_SUFFICIENT if up.minimum > 0.0 else VerdictKind.INDETERMINATE
    return Verdict(kind, witness_alpha=up.argmin, margin=up.minimum, lower_margin=low.minimum)


# ---------------------------------------------------------------------------
# General nu >= 2
# ---------------------------------------------------------------------------


def _lhs_gap(p: ParticleData, nu: int, k: float, d: float) -> float:
    """Left-hand side of the h_nu equation at h = L - d, L = alpha^(1-nu).

    In sigma = h - eta the weight (L - eta)^(nu/(1-nu)) becomes
    (d + sigma)^(-nu/(nu-1)), steep on the scale d near sigma = 0, so the
    mesh is graded towards that end.
    """
    L = p.alpha ** (1 - nu)
    h = L - d
    if h <= 0.0:
        return 0.0
    c2 = 2.0 * k * p.e0 / (nu - 1)
    u2 = p.u0 * p.u0
    expo = -nu / (nu - 1)
    pref = k * p.u0 * p.n0 * p.alpha**nu / (nu - 1) ** 2

    def g(s: float) -> float:
        return s * (d + s) ** expo / (u2 + c2 * (h - s)) ** 1.5

    return pref * quad_singular_end(g, h, rel_tol=1e-13, abs_tol=0.0)


def h_general_lhs(p: ParticleData, nu: int, k: float, h: float) -> float:
    """(k u0 n0 alpha^nu/(nu-1)^2) * int_0^h (h - eta) (u0^2 + 2 k e0 eta/(nu-1))^(-3/2)
    (alpha^(1-nu) - eta)^(nu/(1-nu)) deta, for 0 <= h < alpha^(1-nu)."""
    L = p.alpha ** (1 - nu)
    if not 0.0 <= h < L:
        raise ValueError(f"h must lie in [0, {L}), got {h}")
    return _lhs_gap(p, nu, k, L - h)


def h_general(cfg: IsotropicConfig, alpha: float) -> float:
    """Root h_nu in ``(0, alpha^(1-nu))`` of ``h_general_lhs = 1``.

    The search runs over the distance d = alpha^(1-nu) - h and never comes
    closer than ``ENDPOINT_GAP * alpha^(1-nu)`` to the singular end.
    Returns ``inf`` when n0(alpha) = 0.

    Raises:
        NoFiniteRootError: the left-hand side is still below 1 at the
            closest admissible point.
    """
    nu = cfg.nu
    _check_nu(cfg, nu >= 2, "h_general")
    p = cfg.particle(alpha)
    if p.n0 == 0.0:
        return math.inf
    L = alpha ** (1 - nu)
    d_min = ENDPOINT_GAP * L
    f = lambda d: _lhs_gap(p, nu, cfg.k, d) - 1.0  # noqa: E731
    if f(d_min) < 0.0:
        raise NoFiniteRootError(f"no root of the h_nu equation below alpha^(1-nu) = {L:.6g}", L)
    d = find_root(f, d_min, L, xtol=1e-300, rtol=1e-14)
    return L - d


def _lower_general(cfg: IsotropicConfig, p: ParticleData) -> float:
    return -cfg.k / p.u0 * (p.n0 * p.alpha / (cfg.nu - 1) - p.E0)


def _upper_general(cfg: IsotropicConfig, p: ParticleData) -> tuple[float, bool]:
    """Upper threshold and whether h_nu saturated at alpha^(1-nu).

    At saturation the upper threshold equals the lower one, which is
    returned verbatim so the two compare equal.
    """
    if p.n0 == 0.0:
        return cfg.k * p.E0 / p.u0, False
    try:
        h = h_general(cfg, p.alpha)
    except NoFiniteRootError:
        return _lower_general(cfg, p), True
    return -cfg.k / p.u0 * (p.n0 * p.alpha**cfg.nu * h / (cfg.nu - 1) - p.E0), False


def verdict_spherical_lower(cfg: IsotropicConfig, alphas: Sequence[float]) -> Verdict:
    """Breakdown test for nu >= 2: fires when u0' < -(k/u0)[n0 alpha/(nu-1) - E0]
    at some alpha, i.e. when dQ/dalpha < 0 and two particle paths cross at
    large time. Returns BreakdownSufficient or Indeterminate.
    """
    _check_nu(cfg, cfg.nu >= 2, "the lower threshold")
    xs = _grid(alphas)

    def lower_margin(a: float) -> float:
        p = cfg.particle(a)
        return p.du0 - _lower_general(cfg, p)

    res = sweep_min(lower_margin, xs)
    kind = VerdictKind.BREAKDOWN_SUFFICIENT if res.minimum < 0.0 else VerdictKind.INDETERMINATE
    return Verdict(kind, witness_alpha=res.argmin, margin=res.minimum, lower_margin=res.minimum)


def verdict_general_nu(cfg: IsotropicConfig, alphas: Sequence[float]) -> Verdict:
    """Two-threshold verdict for nu >= 2.

    The lower test is tried first; GlobalSufficient requires
    u0' > -(k/u0)[n0 alpha^nu h_nu/(nu-1) - E0] at every alpha. Since
    h_nu < alpha^(1-nu) the upper threshold lies above the lower one, so the
    two outcomes cannot both hold.
    """
    _check_nu(cfg, cfg.nu >= 2, "the general-nu verdict")
    low = verdict_spherical_lower(cfg, alphas)
    if low.kind is VerdictKind.BREAKDOWN_SUFFICIENT:
        return low

    def upper_margin(a: float) -> float:
        p = cfg.particle(a)
        return p.du0 - _upper_general(cfg, p)[0]

    up = sweep_min(upper_margin, _grid(alphas))
    kind = VerdictKind.GLOBAL_SUFFICIENT if up.minimum > 0.0 else VerdictKind.INDETERMINATE
    return Verdict(kind, witness_alpha=up.argmin, margin=up.minimum, lower_margin=low.lower_margin)


# ---------------------------------------------------------------------------
# nu = 3
# ---------------------------------------------------------------------------


def nu3_coefficients(p: ParticleData, k: float) -> tuple[float, float, float]:
    """(alpha, B, C) of the numerator q(t) = alpha + B t + C t^2 of Gamma."""
    B = p.u0 + p.alpha * p.du0
    C = p.u0 * p.du0 - k * p.E0 + 0.5 * k * p.n0 * p.alpha
    return p.alpha, B, C


def _nu3_positive(a: float, B: float, C: float) -> bool:
    """q(t) = a + B t + C t^2 > 0 for every t > 0 (a > 0)."""
    if C > 0.0:
        return B >= 0.0 or B * B < 4.0 * a * C
    if C == 0.0:
        return B >= 0.0
    return False


def nu3_threshold(p: ParticleData, k: float) -> tuple[float, bool]:
    """Critical u0' for nu = 3 and whether the boundary value itself is global.

    With K = k(n0 alpha/2 - E0) the numerator q stays positive iff
    u0' >= -K/u0 when alpha K <= u0^2, and iff u0' > (u0 - 2 sqrt(alpha K))/alpha
    otherwise.
    """
    a, u0 = p.alpha, p.u0
    K = k * (0.5 * p.n0 * a - p.E0)
    if a * K > u0 * u0:
        return (u0 - 2.0 * math.sqrt(a * K)) / a, False
    if u0 == 0.0:
        # K <= 0 here: K = 0 needs u0' >= 0, K < 0 fails for every slope
        return (0.0, True) if K == 0.0 else (math.inf, False)
    return -K / u0, True


def nu3_blowup_time(a: float, B: float, C: float) -> float:
    """Earliest positive root of a + B t + C t^2 (a > 0), assuming one exists."""
    if C == 0.0:
        return -a / B
    sq = math.sqrt(max(B * B - 4.0 * a * C, 0.0))
    if B < 0.0:
        return 2.0 * a / (-B + sq)
    # B >= 0 forces C < 0 and a single positive root
    return (-B - sq) / (2.0 * C)


def verdict_nu3(cfg: IsotropicConfig, alphas: Sequence[float]) -> Verdict:
    """Exact verdict for nu = 3 from positivity of q(t) on t > 0 together with
    the origin condition u0'(0) >= 0 (Gamma(0, t) = 1 + u0'(0) t).

    A Breakdown carries the earliest root of q over the violating grid points,
    the polished witness, and the origin time -1/u0'(0) when that fails.
    """
    _check_nu(cfg, cfg.nu == 3, "the nu=3 verdict")
    xs = _grid(alphas)
    k = cfg.k

    def local(a: float) -> ParticleData:
        return cfg.particle(a, require_positive_u0=False)

    def margin(a: float) -> float:
        p = local(a)
        thr, _ = nu3_threshold(p, k)
        return p.du0 - thr

    res = sweep_min(margin, xs)
    try:
        du_origin = cfg.data.u0.derivative(0.0)
    except DomainError:
        du_origin = None
    points = list(map(float, res.alphas)) + [res.argmin]
    bad = [a for a in points if not _nu3_positive(*nu3_coefficients(local(a), k))]
    origin_bad = du_origin is not None and du_origin < 0.0
    if not bad and not origin_bad:
        return Verdict(VerdictKind.GLOBAL, witness_alpha=res.argmin, margin=res.minimum)
    times = [(nu3_blowup_time(*nu3_coefficients(local(a), k)), a) for a in bad]
    if origin_bad:
        times.append((-1.0 / du_origin, 0.0))
    t_c, witness = min(times)
    m = min(res.minimum, du_origin) if origin_bad else res.minimum
    return Verdict(VerdictKind.BREAKDOWN, t_c=t_c, witness_alpha=witness, margin=m)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def band(cfg: IsotropicConfig, alpha: float) -> ThresholdBand:
    """Lower, upper and (when known) exact thresholds on u0' at ``alpha``."""
    nu, k = cfg.nu, cfg.k
    if nu == 0:
        n0, _ = _planar_local(cfg, alpha)
        x = -math.sqrt(2.0 * k * n0)
        return ThresholdBand(x, x, x)
    if nu == 3:
        x, _ = nu3_threshold(cfg.particle(alpha, require_positive_u0=False), k)
        return ThresholdBand(x, x, x)
    p = cfg.particle(alpha)
    if nu == 1:
        return ThresholdBand(-math.sqrt(2.0 * k * p.n0), _upper_cylindrical(cfg, p))
    lower = _lower_general(cfg, p)
    upper, saturated = _upper_general(cfg, p)
    # saturation at nu >= 3 means every M_nu below the endpoint is global
    exact = lower if (saturated and nu >= 3) or p.n0 == 0.0 else None
    return ThresholdBand(lower, upper, exact)


def verdict_multid(cfg: IsotropicConfig, alphas: Sequence[float]) -> Verdict:
    """Route to the verdict for ``cfg.nu`` (exact ones for nu = 0 and 3)."""
    if cfg.nu == 0:
        return verdict_planar_halfline(cfg, alphas)
    if cfg.nu == 1:
        return verdict_cylindrical(cfg, alphas)
    if cfg.nu == 3:
        return verdict_nu3(cfg, alphas)
    return verdict_general_nu(cfg, alphas)

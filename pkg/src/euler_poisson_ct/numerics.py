"""Numerical primitives used by the closed-form modules.

Adaptive Gauss-Kronrod quadrature (with a graded mode for integrable endpoint
singularities), Brent root finding, golden-section minimisation and an
embedded Dormand-Prince 5(4) integrator with event location.

These are deliberately self-contained: the verification oracle in
:mod:`euler_poisson_ct.oracle` is backed by scipy, so the two routes share no
numerical code.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "QuadratureError",
    "RootBracketError",
    "quad",
    "quad_singular_end",
    "find_root",
    "expand_bracket",
    "golden_min",
    "OdeResult",
    "solve_ode",
]


class QuadratureError(ArithmeticError):
    """Adaptive quadrature exhausted its interval budget."""

    def __init__(self, message: str, worst: tuple[float, float] | None = None):
        super().__init__(message)
        self.worst = worst


class RootBracketError(ValueError):
    """The supplied interval does not bracket a root."""


# ---------------------------------------------------------------------------
# Gauss-Kronrod 7/15
# ---------------------------------------------------------------------------

_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
# Gauss weights for the nodes _XGK[1], _XGK[3], _XGK[5], _XGK[7]
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(center)
    kronrod = fc * _WGK[7]
    gauss = fc * _WG[3]
    for j in range(7):
        dx = half * _XGK[j]
        fsum = f(center - dx) + f(center + dx)
        kronrod += _WGK[j] * fsum
        if j % 2 == 1:
            gauss += _WG[j // 2] * fsum
    kronrod *= half
    gauss *= half
    return kronrod, abs(kronrod - gauss)


def _adaptive(f, a, b, rel_tol, abs_tol, max_intervals):
    value, err = _gk15(f, a, b)
    heap = [(-err, a, b, value, err)]
    total, total_err = value, err
    n = 1
    while total_err > max(abs_tol, rel_tol * abs(total)):
        if n >= max_intervals:
            worst = heap[0]
            raise QuadratureError(
                f"quadrature did not converge on [{a}, {b}] after {n} intervals "
                f"(estimated error {total_err:.3e})",
                worst=(worst[1], worst[2]),
            )
        _, lo, hi, v, e = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise QuadratureError(
                f"interval [{lo}, {hi}] cannot be subdivided further", worst=(lo, hi)
            )
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, hi, v2, e2))
        total += v1 + v2 - v
        total_err += e1 + e2 - e
        n += 1
    # re-sum to shed accumulated cancellation from the running updates
    return math.fsum(item[3] for item in heap)


def quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-14,
    max_intervals: int = 4000,
    graded: str | None = None,
) -> float:
    """Integrate ``f`` over ``[a, b]``.

    Args:
        f: Scalar integrand.
        a, b: Finite limits; ``b < a`` flips the sign as usual.
        rel_tol, abs_tol: Target accuracy of the Kronrod estimate.
        max_intervals: Subdivision budget per adaptive pass.
        graded: ``"a"`` or ``"b"`` to integrate over a mesh graded
            geometrically (ratio 1/2) towards that endpoint. Use for
            integrable endpoint singularities; the integrand is never
            evaluated at the singular endpoint itself.

    Raises:
        QuadratureError: if the budget is exhausted.
    """
    if a == b:
        return 0.0
    if b < a:
        flipped = {"a": "b", "b": "a"}.get(graded) if graded else None
        return -quad(f, b, a, rel_tol, abs_tol, max_intervals, flipped)
    if graded is None:
        return _adaptive(f, a, b, rel_tol, abs_tol, max_intervals)
    if graded not in ("a", "b"):
        raise ValueError(f"graded must be 'a', 'b' or None, got {graded!r}")
    return _graded(f, a, b, graded, rel_tol, abs_tol, max_intervals)


def _graded(f, a, b, side, rel_tol, abs_tol, max_intervals):
    if side == "b":
        return quad_singular_end(lambda s: f(b - s), b - a, rel_tol, abs_tol, max_intervals)
    return quad_singular_end(lambda s: f(a + s), b - a, rel_tol, abs_tol, max_intervals)


def quad_singular_end(
    g: Callable[[float], float],
    width: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-14,
    max_intervals: int = 4000,
) -> float:
    """Integrate ``g(s)`` over ``s in (0, width]`` with a singularity at ``s = 0``.

    The mesh is graded geometrically (ratio 1/2) towards ``s = 0``. Passing the
    distance to the singular point, rather than an absolute coordinate, keeps
    full relative precision in ``s`` however close the mesh gets. Once the
    per-piece ratio has settled the remaining geometric tail is summed in
    closed form.

    Raises:
        QuadratureError: if the pieces do not decay geometrically (the
            singularity is not integrable) or an inner pass fails.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    pieces: list[float] = []
    ratios: list[float] = []
    hi = width
    for _ in range(1000):
        lo = 0.5 * hi
        if lo == 0.0:
            break
        piece = _adaptive(g, lo, hi, rel_tol, abs_tol, max_intervals)
        pieces.append(piece)
        hi = lo
        total = math.fsum(pieces)
        if abs(piece) <= max(abs_tol, 1e-3 * rel_tol * abs(total)):
            return total
        if len(pieces) >= 2 and pieces[-2] != 0.0:
            ratios.append(piece / pieces[-2])
        if len(ratios) >= 3:
            r0, r1, r2 = ratios[-3:]
            if not 0.0 < r2 < 1.0:
                if r2 >= 1.0 and abs(r2 - r1) < 1e-3 and abs(r1 - r0) < 1e-3:
                    break
                continue
            # smooth corrections decay like the mesh width, so the ratio
            # converges at rate 1/2; one Richardson step removes the leading term
            limit = 2.0 * r2 - r1
            if not 0.0 < limit < 1.0:
                continue
            # the remaining ratios sit within |r2 - r1| of the limit
            tail = piece * limit / (1.0 - limit)
            tail_err = 2.0 * abs(tail) * (abs(r2 - r1) + 4.0 * rel_tol) / (1.0 - limit)
            if tail_err <= max(abs_tol, 0.1 * rel_tol * abs(total)):
                return total + tail
    raise QuadratureError(
        "graded quadrature did not settle; the endpoint singularity is probably "
        "not integrable",
        worst=(0.0, hi),
    )


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------


def find_root(
    f: Callable[[float], float],
    a: float,
    b: float,
    xtol: float = 1e-14,
    rtol: float = 1e-13,
    maxiter: int = 200,
) -> float:
    """Brent's method on a sign-changing bracket ``[a, b]``.

    Raises:
        RootBracketError: if ``f(a)`` and ``f(b)`` share a sign, or both vanish.
    """
    fa, fb = f(a), f(b)
    if fa == 0.0 and fb == 0.0:
        raise RootBracketError(f"f vanishes at both ends of [{a}, {b}]; root is not isolated")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise RootBracketError(f"no sign change on [{a}, {b}]: f(a)={fa:.6g}, f(b)={fb:.6g}")

    c, fc = a, fa
    d = e = b - a
    for _ in range(maxiter):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 2.0 * rtol * abs(b) + 0.5 * xtol
        m = 0.5 * (c - b)
        if abs(m) <= tol or fb == 0.0:
            return b
        if abs(e) >= tol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(tol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b += d if abs(d) > tol else math.copysign(tol, m)
        fb = f(b)
    return b


def expand_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    grow: float = 2.0,
    max_iter: int = 200,
) -> tuple[float, float]:
    """Move ``hi`` outward geometrically until ``f`` changes sign on ``[lo, hi]``.

    The step ``hi - lo`` is multiplied by ``grow`` each time and ``lo``
    advances to the previous ``hi``, so the returned bracket is tight.

    Raises:
        RootBracketError: no sign change within ``max_iter`` expansions.
    """
    if not hi > lo:
        raise ValueError("need hi > lo")
    flo = f(lo)
    if flo == 0.0:
        return lo, lo
    width = hi - lo
    for _ in range(max_iter):
        fhi = f(hi)
        if fhi == 0.0 or (fhi > 0) != (flo > 0):
            return lo, hi
        lo, flo = hi, fhi
        width *= grow
        hi = lo + width
    raise RootBracketError("bracket expansion failed to find a sign change")


def golden_min(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, maxiter: int = 200
) -> tuple[float, float]:
    """Golden-section search for a minimum of a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x))``.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4)
# ---------------------------------------------------------------------------

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _dp_step(rhs, t, y, f0, h):
    ks = [f0]
    for i in range(1, 7):
        yi = y.copy()
        for j, aij in enumerate(_A[i]):
            if aij:
                yi += h * aij * ks[j]
        ks.append(np.asarray(rhs(t + _C[i] * h, yi), dtype=float))
    y_new = y.copy()
    for j, bj in enumerate(_A[6]):
        if bj:
            y_new += h * bj * ks[j]
    # the 7th stage is evaluated at y_new (FSAL)
    ks[6] = np.asarray(rhs(t + h, y_new), dtype=float)
    err = np.zeros_like(y)
    for j, ej in enumerate(_E):
        if ej:
            err += h * ej * ks[j]
    return y_new, ks[6], err


@dataclass
class OdeResult:
    """Accepted steps of an integration plus event records.

    ``status`` is one of ``"finished"``, ``"event"`` (a terminal event fired),
    ``"overflow"`` (state magnitude exceeded ``max_state``) or
    ``"underflow"`` (step size collapsed, typically on approach to a
    singularity).
    """

    t: np.ndarray
    y: np.ndarray
    status: str
    message: str = ""
    event_t: list[float] = field(default_factory=list)
    event_y: list[np.ndarray] = field(default_factory=list)
    event_index: list[int] = field(default_factory=list)
    _rhs: Callable | None = field(default=None, repr=False)

    def __call__(self, t: float) -> np.ndarray:
        """State at ``t`` via one Dormand-Prince step from the preceding node."""
        ts = self.t
        if t < ts[0] or t > ts[-1]:
            raise ValueError(f"t={t} outside integrated span [{ts[0]}, {ts[-1]}]")
        i = int(np.searchsorted(ts, t, side="right")) - 1
        i = min(max(i, 0), len(ts) - 1)
        if ts[i] == t:
            return self.y[i].copy()
        f0 = np.asarray(self._rhs(ts[i], self.y[i]), dtype=float)
        y, _, _ = _dp_step(self._rhs, ts[i], self.y[i], f0, t - ts[i])
        return y


def _rms_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def solve_ode(
    rhs: Callable[[float, np.ndarray], Sequence[float]],
    t0: float,
    y0: Sequence[float],
    t_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    events: Sequence[Callable[[float, np.ndarray], float]] = (),
    terminal: bool = True,
    max_state: float = 1e12,
    first_step: float | None = None,
    max_steps: int = 2_000_000,
) -> OdeResult:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t_end``.

    Events are scalar functions of ``(t, y)``; a sign change inside an
    accepted step is located by Brent's method on states produced by a
    single Dormand-Prince step from the start of that step, so event times
    carry the integrator's local accuracy rather than an interpolant's.
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    span = t_end - t0
    if span <= 0:
        raise ValueError("t_end must exceed t0")
    f0 = np.asarray(rhs(t, y), dtype=float)
    if first_step is None:
        d0 = np.linalg.norm(y) / math.sqrt(y.size)
        d1 = np.linalg.norm(f0) / math.sqrt(y.size)
        h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
        h = min(h, span, 1e-2 * span)
    else:
        h = min(first_step, span)
    ts = [t]
    ys = [y.copy()]
    g_prev = [g(t, y) for g in events]
    ev_t: list[float] = []
    ev_y: list[np.ndarray] = []
    ev_i: list[int] = []
    status, message = "finished", ""
    for _ in range(max_steps):
        if t >= t_end:
            break
        h = min(h, t_end - t)
        if h <= 1e-15 * max(1.0, abs(t)):
            status, message = "underflow", f"step size underflow at t={t:.17g}"
            break
        y_new, f_new, err = _dp_step(rhs, t, y, f0, h)
        if not np.all(np.isfinite(y_new)):
            h *= 0.25
            continue
        en = _rms_norm(err, y, y_new, rtol, atol)
        if en > 1.0:
            h *= max(0.2, 0.9 * en ** -0.2)
            continue
        t_new = t + h if h < t_end - t else t_end
        # events inside the accepted step
        fired = None
        for idx, g in enumerate(events):
            g_new = g(t_new, y_new)
            if g_prev[idx] != 0.0 and (g_new == 0.0 or (g_new > 0) != (g_prev[idx] > 0)):
                t_base, y_base, f_base = t, y, f0

                def g_local(s, g=g, t_base=t_base, y_base=y_base, f_base=f_base):
                    if s == t_base:
                        return g(t_base, y_base)
                    ys_, _, _ = _dp_step(rhs, t_base, y_base, f_base, s - t_base)
                    return g(s, ys_)

                te = find_root(g_local, t, t_new, xtol=1e-15, rtol=2e-16)
                ye, _, _ = _dp_step(rhs, t, y, f0, te - t) if te > t else (y.copy(), None, None)
                if fired is None or te < fired[0]:
                    fired = (te, ye, idx)
            g_prev[idx] = g_new
        if fired is not None:
            ev_t.append(fired[0])
            ev_y.append(fired[1])
            ev_i.append(fired[2])
            if terminal:
                ts.append(fired[0])
                ys.append(fired[1])
                status, message = "event", f"event {fired[2]} at t={fired[0]:.17g}"
                break
        t, y, f0 = t_new, y_new, f_new
        ts.append(t)
        ys.append(y.copy())
        if np.max(np.abs(y)) > max_state:
            status, message = "overflow", f"|state| exceeded {max_state:g} at t={t:.17g}"
            break
        h *= min(5.0, max(0.2, 0.9 * en ** -0.2)) if en > 0 else 5.0
    else:
        status, message = "underflow", "step budget exhausted"
    return OdeResult(
        t=np.asarray(ts),
        y=np.asarray(ys),
        status=status,
        message=message,
        event_t=ev_t,
        event_y=ev_y,
        event_index=ev_i,
        _rhs=rhs,
    )

"""Verdict type and the alpha-sweep used by every threshold module."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .numerics import golden_min

__all__ = ["VerdictKind", "Verdict", "SweepResult", "sweep_min", "ModelConstraintError"]


class ModelConstraintError(ValueError):
    """Model parameters or initial data violate the model's hypotheses."""


class VerdictKind(enum.Enum):
    GLOBAL = "Global"
    BREAKDOWN = "Breakdown"
    GLOBAL_SUFFICIENT = "GlobalSufficient"
    BREAKDOWN_SUFFICIENT = "BreakdownSufficient"
    INDETERMINATE = "Indeterminate"

    @property
    def is_global(self) -> bool:
        return self in (VerdictKind.GLOBAL, VerdictKind.GLOBAL_SUFFICIENT)

    @property
    def is_breakdown(self) -> bool:
        return self in (VerdictKind.BREAKDOWN, VerdictKind.BREAKDOWN_SUFFICIENT)

    @property
    def exit_code(self) -> int:
        if self.is_global:
            return 0
        if self.is_breakdown:
            return 2
        return 3


@dataclass(frozen=True)
class Verdict:
    """Outcome of a threshold test over an alpha grid.

    Attributes:
        kind: The classification.
        t_c: Exact breakdown time, when the model provides one.
        witness_alpha: The alpha with the worst margin (or the firing alpha
            for sufficient breakdown tests).
        margin: Signed distance to the threshold at ``witness_alpha``;
            positive on the global side.
        t_bound: Upper bound on the breakdown time for sufficient tests.
        lower_margin: For two-threshold models, the margin against the
            breakdown (lower) threshold; negative means it fired.
    """

    kind: VerdictKind
    t_c: Optional[float] = None
    witness_alpha: Optional[float] = None
    margin: float = math.nan
    t_bound: Optional[float] = None
    lower_margin: Optional[float] = None

    def summary(self) -> str:
        parts = [self.kind.value]
        if self.t_c is not None:
            parts.append(f"t_c={self.t_c:.12g}")
        if self.t_bound is not None:
            parts.append(f"t_bound={self.t_bound:.12g}")
        if self.witness_alpha is not None:
            parts.append(f"alpha*={self.witness_alpha:.12g}")
        parts.append(f"margin={self.margin:.6g}")
        return " ".join(parts)


@dataclass(frozen=True)
class SweepResult:
    alphas: np.ndarray
    values: np.ndarray
    argmin: float
    minimum: float


def sweep_min(
    f: Callable[[float], float], alphas: Sequence[float], polish: bool = True
) -> SweepResult:
    """Minimise ``f`` over a grid, then polish between the neighbours of the
    grid minimiser with golden-section search.

    The polished value is used only when it improves on the grid value, so
    the result never exceeds the grid minimum.
    """
    xs = np.sort(np.asarray(alphas, dtype=float))
    if xs.size == 0:
        raise ValueError("alpha grid is empty")
    vals = np.array([f(x) for x in xs])
    i = int(np.argmin(vals))
    best_x, best_v = float(xs[i]), float(vals[i])
    if polish and xs.size >= 3:
        lo = float(xs[max(i - 1, 0)])
        hi = float(xs[min(i + 1, xs.size - 1)])
        if hi > lo:
            x, v = golden_min(f, lo, hi, tol=1e-12)
            if v < best_v:
                best_x, best_v = float(x), float(v)
    return SweepResult(xs, vals, best_x, best_v)

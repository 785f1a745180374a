"""Critical thresholds in Euler-Poisson equations.

Closed-form indicator functions, threshold verdicts and flow maps for the
one-dimensional models (zero or constant background, relaxation,
viscosity) and the isotropic multi-dimensional model, with an independent
scipy-backed oracle for verification.
"""

from .profiles import InitialData, parse_profile
from .verdicts import ModelConstraintError, Verdict, VerdictKind
from .thresholds_1d import (
    ConstantBackground,
    RelaxationStrong,
    RelaxationWeak,
    ZeroBackground,
    classify_regime,
    verdict_1d,
)
from .viscous import verdict_viscous
from .flowmap import IsotropicConfig, flow_point, indicator_multid
from .thresholds_multid import band, verdict_multid

__version__ = "0.1.0"

__all__ = [
    "InitialData",
    "parse_profile",
    "ModelConstraintError",
    "Verdict",
    "VerdictKind",
    "ZeroBackground",
    "ConstantBackground",
    "RelaxationWeak",
    "RelaxationStrong",
    "classify_regime",
    "verdict_1d",
    "verdict_viscous",
    "IsotropicConfig",
    "flow_point",
    "indicator_multid",
    "band",
    "verdict_multid",
]

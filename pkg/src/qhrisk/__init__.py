"""Coherent risk functionals on distribution functions: evaluation,
quasi-Hadamard derivatives, integrability diagnostics and Monte Carlo
checks of the plug-in limit theorems."""

from __future__ import annotations

__version__ = "0.1.0"

from .distortion import DistortionFn, make_builtin, tabulated  # noqa: E402
from .distributions import (Dist, contaminate, make_empirical, make_parametric,  # noqa: E402
                            make_two_point, point_mass)
from .errors import (DomainError, IntegrabilityError, NumericError,  # noqa: E402
                     PreconditionError, ReportSchemaError, SpecError)
from .risk import (DistortionRisk, ExpectileRisk, HaezendonckRisk, KusuokaRisk,  # noqa: E402
                   OneSidedMomentRisk, RiskEvaluator, eval_distortion_risk,
                   eval_empirical_L, g_rho_from_measure)
from .specs import parse_dist, parse_risk, parse_weight  # noqa: E402

__all__ = [
    "__version__",
    "DistortionFn", "make_builtin", "tabulated",
    "Dist", "contaminate", "make_empirical", "make_parametric", "make_two_point", "point_mass",
    "DomainError", "IntegrabilityError", "NumericError", "PreconditionError",
    "ReportSchemaError", "SpecError",
    "DistortionRisk", "ExpectileRisk", "HaezendonckRisk", "KusuokaRisk",
    "OneSidedMomentRisk", "RiskEvaluator", "eval_distortion_risk", "eval_empirical_L",
    "g_rho_from_measure",
    "parse_dist", "parse_risk", "parse_weight",
]

"""
Toeplitz matrix element <T_F s_p, s_p> on a circle.
"""

from ...bargmann import DOMAIN_SIGMAS, get_symbol, predict_curve_b0, toeplitz_inner
from ...config import ExperimentSpec
from ...curves import StateEvaluator
from .curve_norm import CurveNormScenario

# degree of each symbol as a homogeneous polynomial in (u, v)
SYMBOL_DEGREE = {"one": 0, "u2": 2, "v2": 2, "r2": 2}


class ToeplitzNormScenario(CurveNormScenario):
    """
    Tests the Toeplitz leading term: b0 = sqrt(2) x integral of F over the curve.

    With F = 1 this reproduces the norm scenario.
    """

    name = "toeplitz-norm"
    description = "Toeplitz matrix element on a circle: b0 = sqrt(2) x curve integral of F"

    def _measure(self, state: StateEvaluator, spec: ExperimentSpec, oversampling: float, workers: int) -> complex:
        F = get_symbol(spec.symbol)
        sigmas = float(self.config.get("domain_sigmas", DOMAIN_SIGMAS))
        return toeplitz_inner(F, state, state, oversampling=oversampling, sigmas=sigmas, workers=workers)

    def _predict(self, state: StateEvaluator, spec: ExperimentSpec) -> float:
        return predict_curve_b0(state, get_symbol(spec.symbol))

    def _scale_power(self, spec: ExperimentSpec) -> int:
        # homogeneity only holds about the origin
        return 1 + SYMBOL_DEGREE[spec.symbol] if spec.center == 0 else 1

    def _compute_aggregate(self, spec, rows):
        predicted = self.details.pop("b0")
        self.details["symbol"] = spec.symbol
        return self._fit_report(spec, rows, predicted, b0_tol=float(self.config.get("b0_tol", 0.02)))

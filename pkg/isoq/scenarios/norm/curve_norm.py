"""
Norm expansion of a Bohr-Sommerfeld circle state in the flat model.

||s_p||^2 = p^{1/2} (b0 + b1/p + ...) with b0 = sqrt(2) x length for f = 1.
"""

import logging

from ...bargmann import make_bs_circle, norm_sq, predict_curve_b0, snap_radius
from ...config import ExperimentSpec
from ...curves import StateEvaluator
from ...models import ComparisonReport, PointRecord
from ..base import BaseScenario, certificate_delta

logger = logging.getLogger(__name__)


def circle_radius(spec: ExperimentSpec, radius: float, p: int) -> float:
    """Radius used at level p under the experiment's radius policy"""
    return snap_radius(radius, p) if spec.radius_policy == "snap" else radius


class CurveNormScenario(BaseScenario):
    """
    Tests the norm expansion on a circle.

    Under the snap policy each p uses the nearest admissible radius and the
    value is rescaled by (r / r_p)^scale_power back to the nominal circle.
    """

    name = "norm"
    description = "Norm of a circle state: exponent 1/2, b0 = sqrt(2) x length"
    family = "norm"
    geometries = ["bargmann"]
    expected_exponent = 0.5

    def _measure(self, state: StateEvaluator, spec: ExperimentSpec, oversampling: float, workers: int) -> complex:
        return complex(norm_sq(state, workers))

    def _predict(self, state: StateEvaluator, spec: ExperimentSpec) -> float:
        return predict_curve_b0(state)

    def _scale_power(self, spec: ExperimentSpec) -> int:
        return 1

    def _run_point(self, spec: ExperimentSpec, p: int, workers: int) -> PointRecord:
        r = circle_radius(spec, spec.radius, p)
        _, state = make_bs_circle(r, p, center=spec.center, oversampling=spec.oversampling, **self.node_rule)
        value = self._measure(state, spec, spec.oversampling, workers)

        delta = None
        if spec.certify:
            _, fine = make_bs_circle(r, p, center=spec.center, oversampling=2 * spec.oversampling, **self.node_rule)
            delta = certificate_delta(value, self._measure(fine, spec, 2 * spec.oversampling, workers))

        scale = (spec.radius / r) ** self._scale_power(spec)
        if "b0" not in self.details:
            self.details["b0"] = self._predict(state, spec) * scale
        return PointRecord(
            p=p,
            value=value,
            corrected=value * scale,
            nodes_used=len(state.nodes),
            certificate_delta=delta,
            extra={"radius": r},
        )

    def _compute_aggregate(self, spec: ExperimentSpec, rows: list[PointRecord]) -> ComparisonReport:
        predicted = self.details.pop("b0")
        self.details["radius_policy"] = spec.radius_policy
        return self._fit_report(spec, rows, predicted, b0_tol=float(self.config.get("b0_tol", 0.01)))

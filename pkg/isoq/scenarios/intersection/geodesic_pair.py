"""
Pairing of two modular geodesic series.
"""

import logging

from ...config import ExperimentSpec
from ...hyperbolic.cosets import coset_reps
from ...hyperbolic.geodesics import geodesic_from_hyperbolic
from ...hyperbolic.intersections import predict_geodesic_pairing, quotient_geodesic_intersections
from ...hyperbolic.moebius import MoebiusElement
from ...hyperbolic.series import SHELL_RATIO_WARN, SHELL_TOL, geodesic_pairing, geodesic_series
from ...models import ComparisonReport, PointRecord
from ..base import BaseScenario
from .circle_pair import check_phase_separation, decay_checks

logger = logging.getLogger(__name__)


class GeodesicIntersectScenario(BaseScenario):
    """
    Tests <s1, s2> ~ m sum_q lambda_q^p b_q for two closed modular geodesics.

    Crossings in the quotient are enumerated once from the coset table of g1;
    each p pairs the series of g0 along one period of geo2. Without crossings
    the pairing must decay like the disjoint-circle case.
    """

    name = "geodesic-intersect"
    description = "Two modular geodesics: <s1, s2> ~ m sum_q lambda_q^p b_q"
    family = "intersection"
    geometries = ["modular"]
    expected_exponent = 0.0

    def _prepare(self, spec: ExperimentSpec, workers: int) -> None:
        self.g0 = MoebiusElement.integral(spec.g0)
        self.g1 = MoebiusElement.integral(spec.g1)
        self.geo1 = geodesic_from_hyperbolic(self.g0)
        self.geo2 = geodesic_from_hyperbolic(self.g1)
        table = coset_reps(self.g1, spec.word_length, spec.convention)
        self.crossings = quotient_geodesic_intersections(self.geo1, self.geo2, table)
        self.details["crossings"] = [x.to_dict() for x in self.crossings]
        logger.info(f"{self.name}: {len(self.crossings)} quotient crossings")

    def _run_point(self, spec: ExperimentSpec, p: int, workers: int) -> PointRecord:
        ev = geodesic_series(
            self.g0,
            p,
            word_length=spec.word_length,
            convention=spec.convention,
            saturation=self.config.get("saturation"),
            shell_tol=float(self.config.get("shell_tol", SHELL_TOL)),
            shell_ratio_warn=float(self.config.get("shell_ratio_warn", SHELL_RATIO_WARN)),
        )
        pairing = geodesic_pairing(
            ev, self.geo2, oversampling=spec.oversampling, certify=spec.certify, workers=workers
        )

        extra = {
            "truncation_error": pairing.error,
            "relative_last_shell": pairing.relative_last_shell,
            "shell_ratio": pairing.shell_ratio,
            "cosets": len(ev.table),
        }
        corrected = pairing.value
        if self.crossings:
            check_phase_separation([x.lam for x in self.crossings], p)
            predicted = predict_geodesic_pairing(self.crossings, p, ev.table.multiplicity)
            corrected = pairing.value / predicted
            extra["predicted"] = [predicted.real, predicted.imag]

        return PointRecord(
            p=p,
            value=pairing.value,
            corrected=corrected,
            nodes_used=pairing.nodes_used,
            certificate_delta=pairing.certificate_delta,
            extra=extra,
        )

    def _compute_aggregate(self, spec: ExperimentSpec, rows: list[PointRecord]) -> ComparisonReport:
        self.details["translation_lengths"] = [self.geo1.translation_length, self.geo2.translation_length]
        if self.crossings:
            return self._fit_report(
                spec,
                rows,
                1.0,
                b0_tol=float(self.config.get("b0_tol", 0.1)),
                exponent_tol=float(self.config.get("exponent_tol", 0.1)),
            )

        checks, details = decay_checks(rows)
        self.details.update(details)
        return ComparisonReport(
            scenario=self.name,
            geometry=spec.geometry,
            fitted=None,
            predicted_b0=0j,
            relative_error_b0=max(abs(r.value) for r in rows),
            expected_exponent=0.0,
            exponent_estimate=0.0,
            rows=rows,
            checks={"weighted_slope_negative": checks["weighted_slope_negative"]},
            details=dict(self.details),
        )

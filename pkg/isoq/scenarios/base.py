"""
Base scenario protocol and utilities.
"""

import logging
import math
from abc import abstractmethod
from typing import Callable, Optional, Protocol, runtime_checkable

import numpy as np

from ..config import ExperimentSpec
from ..errors import CertificateFailure, InsufficientSamples, NotBohrSommerfeldAtLevelP, ValidationError
from ..models import ComparisonReport, PointRecord
from ..numerics import MAX_CONDITION, estimate_exponent, fit_power_series, relative_error

logger = logging.getLogger(__name__)

CERTIFICATE_TOL = 1e-7


@runtime_checkable
class Scenario(Protocol):
    """
    Protocol for experiment scenarios.

    Each scenario sweeps p for one asymptotic statement and compares the
    fitted expansion against its leading-term predictor. Scenarios are
    deterministic given the same ExperimentSpec.
    """

    # Class attributes
    name: str
    description: str
    family: str  # "norm" | "intersection"
    geometries: list[str]  # ["bargmann", "modular"] or subset

    @abstractmethod
    def configure(self, config: dict) -> None:
        """
        Apply scenario-specific configuration.

        Args:
            config: Numerical settings (tolerances, certificate threshold)
        """
        ...

    @abstractmethod
    def run(
        self,
        spec: ExperimentSpec,
        workers: int = 1,
        progress_callback: Optional[Callable[[], None]] = None,
    ) -> ComparisonReport:
        """
        Execute the sweep.

        Args:
            spec: Experiment specification
            workers: Parallelism budget handed to the quadrature layer
            progress_callback: Called after each p completes

        Returns:
            ComparisonReport with per-p rows, fit and checks
        """
        ...

    def supports_geometry(self, geometry: str) -> bool:
        """Check if this scenario runs on the given geometry"""
        return geometry in self.geometries


class BaseScenario:
    """
    Base class for scenarios with common functionality.

    Subclasses should:
    1. Set class attributes (name, description, family, geometries)
    2. Override _run_point() to compute one p of the sweep
    3. Override _compute_aggregate() to fit and compare
    """

    name: str = "base"
    description: str = "Base scenario"
    family: str = "unknown"
    geometries: list[str] = ["bargmann"]
    expected_exponent: float = 0.0

    def __init__(self):
        self.config: dict = {}
        self.details: dict = {}

    def configure(self, config: dict) -> None:
        """Apply configuration"""
        self.config = config

    @property
    def certificate_tol(self) -> float:
        return float(self.config.get("certificate_tol", CERTIFICATE_TOL))

    @property
    def node_rule(self) -> dict:
        """Curve node density overrides for make_bs_circle"""
        return {k: self.config[k] for k in ("min_nodes", "nodes_per_unit") if self.config.get(k) is not None}

    def run(
        self,
        spec: ExperimentSpec,
        workers: int = 1,
        progress_callback: Optional[Callable[[], None]] = None,
    ) -> ComparisonReport:
        """Run every p of the schedule and aggregate"""

        if not self.supports_geometry(spec.geometry):
            raise ValidationError(f"scenario {self.name} does not run on geometry {spec.geometry}")

        self.details = {}
        self._prepare(spec, workers)
        rows: list[PointRecord] = []

        for p in spec.p_schedule:
            try:
                row = self._run_point(spec, p, workers)
            except NotBohrSommerfeldAtLevelP as e:
                # strict radius policy: this p is not admissible
                logger.warning(f"{self.name}: skipping p={p}: {e}")
                continue

            if row.certificate_delta is not None and row.certificate_delta > self.certificate_tol:
                raise CertificateFailure(
                    f"{self.name} p={p}: doubling the nodes moved the value by {row.certificate_delta:.3e}"
                )
            rows.append(row)
            logger.info(
                f"{self.name} p={p}: value={row.value:.10g}, nodes={row.nodes_used}, "
                f"certificate={row.certificate_delta}"
            )

            if progress_callback:
                progress_callback()

        if not rows:
            raise InsufficientSamples(f"{self.name}: no admissible p in {spec.p_schedule}")

        return self._compute_aggregate(spec, rows)

    def _prepare(self, spec: ExperimentSpec, workers: int) -> None:
        """Per-sweep setup; subclasses may override"""

    def _run_point(self, spec: ExperimentSpec, p: int, workers: int) -> PointRecord:
        """
        Compute one p of the sweep.

        Subclasses must override this method.

        Args:
            spec: Experiment specification
            p: Tensor power
            workers: Parallelism budget

        Returns:
            PointRecord with raw and corrected values
        """
        raise NotImplementedError("Subclasses must implement _run_point")

    def _compute_aggregate(self, spec: ExperimentSpec, rows: list[PointRecord]) -> ComparisonReport:
        """Fit and compare; subclasses must override"""
        raise NotImplementedError("Subclasses must implement _compute_aggregate")

    def supports_geometry(self, geometry: str) -> bool:
        """Check if this scenario runs on the given geometry"""
        return geometry in self.geometries

    # =====================================================================
    # Shared fitting
    # =====================================================================

    def _fit_report(
        self,
        spec: ExperimentSpec,
        rows: list[PointRecord],
        predicted_b0: complex,
        b0_tol: float,
        exponent_tol: float = 0.02,
    ) -> ComparisonReport:
        """
        Fit corrected values at the expected exponent with orders k and k-1.

        Checks: exponent within exponent_tol, b0 within b0_tol, b1 finite,
        and the two fit orders agreeing on b0 within b0_tol.
        """

        ps = [r.p for r in rows]
        values = [r.corrected for r in rows]
        k = spec.fit_order
        max_condition = float(self.config.get("max_condition", MAX_CONDITION))
        fitted = fit_power_series(ps, values, self.expected_exponent, k, max_condition)
        exponent = estimate_exponent(ps, values)
        err = relative_error(fitted.b0, predicted_b0)

        checks = {
            "exponent": abs(exponent - self.expected_exponent) <= exponent_tol,
            "b0": err <= b0_tol,
            "b1_finite": len(fitted.coefficients) < 2 or bool(np.isfinite(fitted.coefficients[1])),
        }
        if k >= 2:
            lower = fit_power_series(ps, values, self.expected_exponent, k - 1, max_condition)
            spread = relative_error(lower.b0, fitted.b0)
            checks["order_robust"] = spread <= b0_tol
            self.details["order_spread_b0"] = spread
            self.details["lower_order_fit"] = lower.to_dict()

        logger.info(
            f"{self.name} fit: exponent {exponent:.4f} (expected {self.expected_exponent}), "
            f"b0={fitted.b0:.8g} vs {predicted_b0:.8g} (rel {err:.3e})"
        )
        return ComparisonReport(
            scenario=self.name,
            geometry=spec.geometry,
            fitted=fitted,
            predicted_b0=complex(predicted_b0),
            relative_error_b0=err,
            expected_exponent=self.expected_exponent,
            exponent_estimate=exponent,
            rows=rows,
            checks=checks,
            details=dict(self.details),
        )


def certificate_delta(coarse: complex, fine: complex, scale: Optional[float] = None) -> float:
    """|fine - coarse| relative to |fine|, or to `scale` when given"""

    denom = scale if scale is not None else abs(fine)
    if denom == 0:
        return 0.0 if fine == coarse else math.inf
    return abs(fine - coarse) / denom

"""
Markdown table generation for experiment records.
"""

import math
from typing import Optional

from ..models import ComparisonReport, ExperimentRecord


def _fmt(z: complex, digits: int = 8) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.{digits}g}"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.{digits}g}{sign}{abs(z.imag):.{digits}g}i"


def _delta(value: Optional[float]) -> str:
    return "N/A" if value is None else f"{value:.1e}"


class TableGenerator:
    """
    Generates Markdown tables from experiment records.
    """

    def generate_table(self, record: ExperimentRecord) -> Optional[str]:
        """
        Generate the per-p table for one record.

        Returns:
            Markdown table string, or None if the record has no report
        """

        report = record.report
        if report is None:
            return None

        lines = [
            f"## {report.scenario} ({report.geometry})",
            "",
            "| p | value | abs | corrected | nodes | certificate |",
            "|---|-------|-----|-----------|-------|-------------|",
        ]
        for row in report.rows:
            lines.append(
                f"| {row.p} "
                f"| {_fmt(row.value)} "
                f"| {abs(row.value):.6e} "
                f"| {_fmt(row.corrected)} "
                f"| {row.nodes_used:,} "
                f"| {_delta(row.certificate_delta)} |"
            )

        lines.extend(["", *self._fit_lines(report)])
        return "\n".join(lines)

    def _fit_lines(self, report: ComparisonReport) -> list[str]:
        if report.fitted is None:
            return [f"- decay checks: {report.checks}"]

        coeffs = ", ".join(_fmt(b, 6) for b in report.fitted.coefficients)
        return [
            f"- exponent: {report.exponent_estimate:.4f} (expected {report.expected_exponent})",
            f"- coefficients b_r: {coeffs}",
            f"- b0 predicted: {_fmt(report.predicted_b0)}, relative error {report.relative_error_b0:.2e}",
        ]

    def generate_overview(self, records: list[ExperimentRecord]) -> str:
        """One row per record: exponent, b0 comparison, certificate and verdict"""

        lines = [
            "| Scenario | Geometry | Exponent | Expected | b0 rel. error | Max certificate | Wall clock | Passed |",
            "|----------|----------|----------|----------|---------------|-----------------|------------|--------|",
        ]
        for record in records:
            report = record.report
            if report is None:
                lines.append(f"| {record.name} | N/A | N/A | N/A | N/A | N/A | N/A | N/A |")
                continue

            exponent = "N/A" if report.fitted is None else f"{report.exponent_estimate:.4f}"
            rel = report.relative_error_b0
            lines.append(
                f"| {report.scenario} "
                f"| {report.geometry} "
                f"| {exponent} "
                f"| {report.expected_exponent:g} "
                f"| {'N/A' if math.isnan(rel) else f'{rel:.2e}'} "
                f"| {_delta(report.max_certificate_delta)} "
                f"| {record.wall_clock_s:.1f}s "
                f"| {'yes' if report.passed else '**no**'} |"
            )

        return "\n".join(lines)

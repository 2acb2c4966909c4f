"""
Summary report generation.
"""

from datetime import datetime
from pathlib import Path
from typing import Optional

from ..models import ExperimentRecord
from ..scenarios import SCENARIOS
from .tables import TableGenerator


class SummaryGenerator:
    """
    Generates a summary Markdown report from a suite run.
    """

    def __init__(self):
        self.tables = TableGenerator()

    def generate(
        self,
        records: dict[str, ExperimentRecord],
        run_dir: Path,
        failures: Optional[dict[str, str]] = None,
    ) -> str:
        """
        Generate a summary report.

        Args:
            records: Scenario name -> record
            run_dir: Path to the run directory
            failures: Scenario name -> error line for runs that raised

        Returns:
            Markdown summary string
        """

        failures = failures or {}
        passed = sum(1 for r in records.values() if r.report and r.report.passed)

        lines = [
            "# isoq Results",
            "",
            f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}",
            f"Run directory: `{run_dir}`",
            "",
            "## Overview",
            "",
            f"**{passed}/{len(records) + len(failures)}** experiments passed every check.",
            "",
            self.tables.generate_overview(list(records.values())),
            "",
        ]

        for family, classes in SCENARIOS.items():
            present = [c.name for c in classes if c.name in records]
            if not present:
                continue
            lines.extend([f"## {family.capitalize()} experiments", ""])
            for name in present:
                table = self.tables.generate_table(records[name])
                if table:
                    lines.extend([table, ""])

        lines.extend(["## Findings", ""])
        for finding in self._extract_findings(records, failures):
            lines.append(f"- {finding}")
        lines.append("")

        lines.extend(
            [
                "## Methodology",
                "",
                "Each experiment was run with its preset in `config/scenarios.yaml`.",
                "Every value carries a node-doubling certificate; fits use the expected exponent",
                "and are repeated at order k-1 to check model-order robustness.",
                "",
            ]
        )
        return "\n".join(lines)

    def _extract_findings(self, records: dict[str, ExperimentRecord], failures: dict[str, str]) -> list[str]:
        findings = []

        for name, record in records.items():
            report = record.report
            if report is None:
                continue
            failed = [k for k, ok in report.checks.items() if not ok]
            if failed:
                findings.append(f"{name}: failed checks {', '.join(failed)}")
            elif report.fitted is not None:
                findings.append(
                    f"{name}: exponent {report.exponent_estimate:.3f}, "
                    f"b0 within {report.relative_error_b0:.1e} of the predictor"
                )

            ratios = record.conventions.get("length_ratios")
            if ratios:
                last = {c: v[-1] for c, v in ratios.items() if v}
                findings.append(
                    f"{name}: final length ratio per convention " + ", ".join(f"{c} {x:.3f}" for c, x in last.items())
                )

        for name, error in failures.items():
            findings.append(f"{name}: did not complete ({error})")

        if not findings:
            findings.append("See detailed results above for complete analysis")
        return findings

"""
Full experiment suite runner.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Optional

from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

from ..config import build_run_config, get_scenario_config, preset_spec
from ..errors import IsoqError
from ..models import ExperimentRecord, SuiteResult
from ..reporting.records import load_record, write_record
from ..scenarios import ALL_SCENARIOS
from .experiment import ExperimentRunner

logger = logging.getLogger(__name__)
console = Console()


class SuiteRunner:
    """
    Runs every scenario that has a preset in config/scenarios.yaml.
    """

    def __init__(self, config: dict, verbose: bool = False):
        self.config = config
        self.verbose = verbose
        self.runner = ExperimentRunner(config, verbose)

    def run(
        self,
        output_dir: Path,
        workers: int = 1,
        scenario_filter: Optional[list[str]] = None,
        skip_modular: bool = False,
    ) -> SuiteResult:
        """
        Run the suite.

        Args:
            output_dir: Directory to save results
            workers: Parallelism budget per experiment
            scenario_filter: Only run these scenarios
            skip_modular: Skip the slow modular-quotient presets

        Returns:
            SuiteResult with every record and the failures by name
        """

        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)

        started_at = datetime.now().isoformat()
        records: list[ExperimentRecord] = []
        failures: dict[str, str] = {}

        # Determine scenarios to run
        scenarios = [s for s in ALL_SCENARIOS if get_scenario_config(self.config, s.name)]
        if skip_modular:
            scenarios = [s for s in scenarios if "bargmann" in s.geometries]
        if scenario_filter:
            scenarios = [s for s in scenarios if s.name in scenario_filter]

        console.print(f"Running {len(scenarios)} experiments...")

        # Write manifest
        manifest = {
            "started_at": started_at,
            "config": self.config,
            "scenarios": [s.name for s in scenarios],
            "workers": workers,
        }
        with open(output_dir / "manifest.json", "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2)

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            console=console,
        ) as progress:
            main_task = progress.add_task("Suite progress", total=len(scenarios))

            for scenario_cls in scenarios:
                name = scenario_cls.name
                progress.update(main_task, description=name)

                try:
                    run_config = build_run_config(self.config, preset=preset_spec(self.config, name))
                    record = self.runner.run(run_config, workers=workers)
                    records.append(record)
                    write_record(record, output_dir / "raw", name)

                    mark = "[green]✓[/green]" if record.report.passed else "[yellow]~[/yellow]"
                    progress.update(main_task, description=f"{mark} {name}")

                except IsoqError as e:
                    failures[name] = f"{type(e).__name__}: {e}"
                    logger.error(f"Failed: {name}: {failures[name]}")
                    progress.update(main_task, description=f"[red]✗[/red] {name}")

                    if self.verbose:
                        console.print_exception()

                progress.advance(main_task)

        suite_result = SuiteResult(
            records=records,
            started_at=started_at,
            completed_at=datetime.now().isoformat(),
            config=self.config,
            failures=failures,
        )

        with open(output_dir / "suite_result.json", "w", encoding="utf-8") as f:
            json.dump(suite_result.to_dict(), f, indent=2)

        return suite_result


def load_results(run_dir: Path) -> dict[str, ExperimentRecord]:
    """
    Load records from a run directory.

    Args:
        run_dir: Path to the run output directory

    Returns:
        Dict mapping scenario name to its record
    """

    raw_dir = Path(run_dir) / "raw"
    if not raw_dir.exists():
        return {}

    results: dict[str, ExperimentRecord] = {}
    for json_file in sorted(raw_dir.glob("*.json")):
        try:
            record = load_record(json_file)
            results[record.name] = record
        except IsoqError as e:
            logger.warning(f"Failed to load {json_file}: {e}")

    return results


def load_failures(run_dir: Path) -> dict[str, str]:
    """Failures recorded in suite_result.json, if present"""

    path = Path(run_dir) / "suite_result.json"
    if not path.exists():
        return {}
    with open(path, encoding="utf-8") as f:
        return json.load(f).get("failures", {})

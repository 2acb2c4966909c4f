"""
Single experiment runner.
"""

import logging
import time
from datetime import datetime
from typing import Callable, Optional

from .. import __version__
from ..config import (
    DEFAULT_CONFIG,
    INTERSECTION_KINDS,
    NORM_KINDS,
    ExperimentSpec,
    RunConfig,
    scenario_settings,
)
from ..errors import ValidationError
from ..models import ComparisonReport, ExperimentRecord
from ..scenarios import get_scenario

logger = logging.getLogger(__name__)


def _run_scenario(
    spec: ExperimentSpec,
    config: Optional[dict],
    workers: int,
    progress_callback: Optional[Callable[[], None]] = None,
) -> ComparisonReport:
    scenario = get_scenario(spec.scenario)()
    scenario.configure(scenario_settings(config or DEFAULT_CONFIG, spec.scenario))
    logger.info(f"Running {spec.scenario} on {spec.geometry} for p in {spec.p_schedule}")
    return scenario.run(spec, workers=workers, progress_callback=progress_callback)


def run_norm_experiment(
    spec: ExperimentSpec,
    config: Optional[dict] = None,
    workers: int = 1,
    progress_callback: Optional[Callable[[], None]] = None,
) -> ComparisonReport:
    """
    Sweep p for a norm statement and compare the fit against its predictor.

    Raises:
        ValidationError: scenario is not a norm scenario
    """

    if spec.scenario not in NORM_KINDS:
        raise ValidationError(f"{spec.scenario} is not a norm scenario; expected one of {list(NORM_KINDS)}")
    return _run_scenario(spec, config, workers, progress_callback)


def run_intersection_experiment(
    spec: ExperimentSpec,
    config: Optional[dict] = None,
    workers: int = 1,
    progress_callback: Optional[Callable[[], None]] = None,
) -> ComparisonReport:
    """
    Sweep p for a pairing of two states; oscillating phases are divided out
    before fitting.

    Raises:
        ValidationError: scenario is not an intersection scenario
        PhaseAmbiguity: two crossing phases cannot be separated
    """

    if spec.scenario not in INTERSECTION_KINDS:
        raise ValidationError(
            f"{spec.scenario} is not an intersection scenario; expected one of {list(INTERSECTION_KINDS)}"
        )
    return _run_scenario(spec, config, workers, progress_callback)


class ExperimentRunner:
    """
    Runs one experiment and wraps the report in a versioned record.
    """

    def __init__(self, config: dict, verbose: bool = False):
        self.config = config
        self.verbose = verbose

        # Set up logging
        level = logging.DEBUG if verbose else logging.INFO
        logging.basicConfig(level=level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    def run(
        self,
        run_config: RunConfig,
        workers: int = 1,
        progress_callback: Optional[Callable[[], None]] = None,
    ) -> ExperimentRecord:
        """
        Run the experiment named by run_config.scenario.

        Args:
            run_config: Validated run configuration
            workers: Parallelism budget
            progress_callback: Called after each p

        Returns:
            ExperimentRecord with config echo, report, certificates and timing
        """

        spec = run_config.spec
        run = run_norm_experiment if spec.scenario in NORM_KINDS else run_intersection_experiment

        started_at = datetime.now().isoformat()
        start = time.perf_counter()
        report = run(spec, self.config, workers, progress_callback)
        elapsed = time.perf_counter() - start

        record = ExperimentRecord(
            name=spec.scenario,
            config=run_config.echo(),
            report=report,
            conventions=self._conventions(spec, report),
            certificates=self._certificates(report),
            wall_clock_s=elapsed,
            started_at=started_at,
            completed_at=datetime.now().isoformat(),
            version=__version__,
        )
        status = "passed" if report.passed else "failed"
        logger.info(f"{spec.scenario} {status} in {elapsed:.2f}s: {report.checks}")
        return record

    def _conventions(self, spec: ExperimentSpec, report: ComparisonReport) -> dict:
        conventions = {"radius_policy": spec.radius_policy}
        if spec.geometry == "modular":
            conventions["convention"] = spec.convention
            conventions["word_length"] = spec.word_length
            if "length_ratios" in report.details:
                conventions["length_ratios"] = report.details["length_ratios"]
        return conventions

    def _certificates(self, report: ComparisonReport) -> dict:
        tol = scenario_settings(self.config, report.scenario)["certificate_tol"]
        return {
            "tolerance": tol,
            "max_delta": report.max_certificate_delta,
            "per_p": {str(r.p): r.certificate_delta for r in report.rows},
        }

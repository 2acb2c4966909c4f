import cmath
import math

import pytest

from isoq.bargmann import norm_sq
from isoq.config import ExperimentSpec, build_run_config, preset_spec, scenario_settings
from isoq.errors import (
    CertificateFailure,
    IllConditioned,
    InsufficientSamples,
    PhaseAmbiguity,
    UnknownScenario,
    ValidationError,
)
from isoq.models import PointRecord
from isoq.runners import ExperimentRunner, run_intersection_experiment, run_norm_experiment
from isoq.scenarios import (
    ALL_SCENARIOS,
    CurveNormScenario,
    EmptyIntersectScenario,
    OverlapScenario,
    Scenario,
    ToeplitzNormScenario,
    get_scenario,
    list_scenarios,
)
from isoq.scenarios.base import certificate_delta
from isoq.scenarios.intersection.circle_pair import check_phase_separation, decay_checks

SHORT = [20, 40, 60, 80, 100]


def _scenario(cls, config, name=None):
    scenario = cls()
    scenario.configure(scenario_settings(config, name or cls.name))
    return scenario


# =========================================================================
# Registry
# =========================================================================


def test_registry():
    assert list_scenarios() == [
        "norm",
        "toeplitz-norm",
        "poincare-norm",
        "intersect",
        "overlap",
        "empty-intersect",
        "geodesic-intersect",
    ]
    assert get_scenario("overlap") is OverlapScenario
    for cls in ALL_SCENARIOS:
        assert isinstance(cls(), Scenario)


def test_unknown_scenario():
    with pytest.raises(UnknownScenario):
        get_scenario("tunnel")


def test_every_scenario_has_a_preset(config):
    for cls in ALL_SCENARIOS:
        run = build_run_config(config, preset=preset_spec(config, cls.name))
        assert run.scenario == cls.name
        assert cls().supports_geometry(run.geometry)


# =========================================================================
# Helpers
# =========================================================================


def test_certificate_delta():
    assert certificate_delta(1.0, 1.0 + 1e-9) == pytest.approx(1e-9)
    assert certificate_delta(1e-20, 2e-20, scale=1.0) == pytest.approx(1e-20)
    assert certificate_delta(0j, 0j) == 0.0
    assert certificate_delta(1e-3, 0j) == math.inf


def test_phase_separation():
    check_phase_separation([1.0, -1.0, 1j], 10)
    with pytest.raises(PhaseAmbiguity):
        check_phase_separation([1.0, cmath.exp(1e-4j)], 10)


def _rows(values):
    return [PointRecord(p=p, value=v, corrected=v) for p, v in values]


def test_decay_checks_accept_exponential_decay():
    checks, details = decay_checks(_rows([(p, math.exp(-p / 5)) for p in range(50, 301, 50)]))
    assert all(checks.values())
    assert details["weighted_log_slope"] < 0


def test_decay_checks_reject_polynomial_decay():
    checks, _ = decay_checks(_rows([(p, p**-2.0) for p in range(50, 301, 50)]))
    assert not checks["weighted_decreasing"]
    assert not checks["weighted_slope_negative"]
    assert not checks["small_by_p100"]


# =========================================================================
# Flat-model sweeps
# =========================================================================


def test_circle_norm_sweep(config):
    spec = ExperimentSpec(p_schedule=SHORT)
    report = _scenario(CurveNormScenario, config).run(spec)
    assert report.passed, report.checks
    assert report.fitted.b0.real == pytest.approx(2 * math.sqrt(2) * math.pi, rel=0.01)
    assert report.max_certificate_delta < 1e-7
    assert [r.p for r in report.rows] == SHORT
    assert all(abs(r.extra["radius"] - 1.0) < 1.0 / r.p for r in report.rows)


def test_progress_callback_runs_per_p(config):
    calls = []
    _scenario(CurveNormScenario, config).run(
        ExperimentSpec(p_schedule=SHORT, certify=False), progress_callback=lambda: calls.append(1)
    )
    assert len(calls) == len(SHORT)


def test_strict_policy_skips_every_inadmissible_p(config):
    spec = ExperimentSpec(p_schedule=SHORT, radius_policy="strict")
    with pytest.raises(InsufficientSamples):
        _scenario(CurveNormScenario, config).run(spec)


def test_certificate_failure(config):
    scenario = CurveNormScenario()
    scenario.configure({"certificate_tol": -1.0})
    with pytest.raises(CertificateFailure):
        scenario.run(ExperimentSpec(p_schedule=SHORT))


def test_node_settings_reach_the_sweep(config):
    settings = dict(scenario_settings(config, "norm"), min_nodes=2000)
    scenario = CurveNormScenario()
    scenario.configure(settings)
    report = scenario.run(ExperimentSpec(p_schedule=SHORT, certify=False))
    assert {r.nodes_used for r in report.rows} == {2000}


def test_toeplitz_domain_width_setting(config, monkeypatch):
    seen = []

    def inner(F, s1, s2, oversampling, sigmas, workers):
        seen.append(sigmas)
        return norm_sq(s1)

    monkeypatch.setattr("isoq.scenarios.norm.toeplitz_norm.toeplitz_inner", inner)
    settings = dict(scenario_settings(config, "toeplitz-norm"), domain_sigmas=9.0)
    scenario = ToeplitzNormScenario()
    scenario.configure(settings)
    scenario.run(ExperimentSpec(scenario="toeplitz-norm", symbol="one", p_schedule=SHORT, certify=False))
    assert seen == [9.0] * len(SHORT)


def test_fit_condition_setting(config):
    scenario = _scenario(CurveNormScenario, config)
    scenario.config["max_condition"] = 1.0
    with pytest.raises(IllConditioned):
        scenario.run(ExperimentSpec(p_schedule=SHORT, certify=False))


def test_wrong_geometry(config):
    spec = ExperimentSpec(geometry="modular", scenario="poincare-norm", p_schedule=[8, 12])
    with pytest.raises(ValidationError):
        _scenario(CurveNormScenario, config).run(spec)


def test_overlap_sweep(config):
    spec = ExperimentSpec(scenario="overlap", p_schedule=SHORT, phase_shift=0.5)
    report = _scenario(OverlapScenario, config).run(spec)
    assert report.checks["phase_exact"]
    assert report.checks["b0"]
    assert report.details["lambda"] == pytest.approx([math.cos(0.5), -math.sin(0.5)])


def test_empty_intersection_decays(config):
    spec = ExperimentSpec(
        scenario="empty-intersect",
        p_schedule=[50, 100, 150, 200],
        radius=0.5,
        radius2=1.0,
        center2=0j,
    )
    report = _scenario(EmptyIntersectScenario, config).run(spec)
    assert report.passed, report.checks
    assert report.fitted is None
    assert abs(report.rows[1].value) < 1e-6


# =========================================================================
# Runners
# =========================================================================


def test_runner_family_guards(config):
    with pytest.raises(ValidationError):
        run_norm_experiment(ExperimentSpec(scenario="overlap", p_schedule=SHORT), config)
    with pytest.raises(ValidationError):
        run_intersection_experiment(ExperimentSpec(p_schedule=SHORT), config)


def test_experiment_runner_builds_record(config, tmp_path):
    run = build_run_config(config, overrides={"p_schedule": SHORT, "output_dir": tmp_path})
    record = ExperimentRunner(config).run(run, workers=2)
    assert record.name == "norm"
    assert record.report.passed
    assert record.conventions == {"radius_policy": "snap"}
    assert record.certificates["tolerance"] == config["quadrature"]["certificate_tol"]
    assert set(record.certificates["per_p"]) == {str(p) for p in SHORT}
    assert record.config["output_dir"] == str(tmp_path)


# =========================================================================
# Acceptance presets
# =========================================================================


def _preset_record(config, name):
    run = build_run_config(config, preset=preset_spec(config, name))
    return ExperimentRunner(config).run(run)


@pytest.mark.slow
def test_toeplitz_preset(config):
    record = _preset_record(config, "toeplitz-norm")
    assert record.report.passed, record.report.checks
    assert record.report.predicted_b0.real == pytest.approx(math.sqrt(2) * math.pi, rel=0.02)


@pytest.mark.slow
def test_intersect_preset(config):
    report = _preset_record(config, "intersect").report
    assert report.checks["modulus_at_max_p"]
    assert report.checks["phase_at_max_p"]


@pytest.mark.slow
def test_empty_intersect_preset(config):
    assert _preset_record(config, "empty-intersect").report.passed


@pytest.mark.slow
def test_poincare_norm_preset(config):
    record = _preset_record(config, "poincare-norm")
    report = record.report
    assert set(record.conventions["length_ratios"]) == {"psl2-distinct", "sl2-with-minus-identity"}
    assert report.max_certificate_delta < config["quadrature"]["certificate_tol"]
    assert "length_ratio_any_convention" in report.checks


@pytest.mark.slow
def test_geodesic_intersect_preset(config):
    record = _preset_record(config, "geodesic-intersect")
    report = record.report
    assert report.details["crossings"]
    assert all(abs(abs(complex(*c["lambda"])) - 1.0) < 1e-9 for c in report.details["crossings"])
    assert report.fitted is not None

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from cli import app, main
from isoq.config import load_config
from isoq.hyperbolic.petersson import PeterssonNorm, RouteComparison
from isoq.hyperbolic.series import GeodesicPairing, ModularityCheck, NonVanishing, PoincareValue

REPO_ROOT = Path(__file__).resolve().parent.parent

runner = CliRunner()


@pytest.fixture(autouse=True)
def _repo_cwd(monkeypatch):
    monkeypatch.chdir(REPO_ROOT)


@pytest.fixture
def norm_run(tmp_path):
    out = tmp_path / "raw"
    result = runner.invoke(app, ["norm", "--p", "20:100:20", "--output", str(out), "--stem", "norm", "-w", "1"])
    assert result.exit_code == 0, result.output
    return out


# =========================================================================
# Oracles
# =========================================================================


def test_scenarios():
    result = runner.invoke(app, ["scenarios"])
    assert result.exit_code == 0
    assert "empty-intersect" in result.output
    assert "geodesic-intersect" in result.output


def test_kernel_diagonal(tmp_path):
    result = runner.invoke(app, ["kernel", "--model", "bargmann", "--p", "20", "--output", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "20.0+0.0i" in result.output
    payload = json.loads((tmp_path / "kernel.json").read_text())["payload"]
    assert payload["model"] == "bargmann"
    assert payload["value"] == "20.0+0.0i"


def test_kernel_from_run_file(tmp_path):
    run_file = tmp_path / "kernel.cfg"
    run_file.write_text("model = hyperbolic\np = 2\nz = 0.5+i\n")
    result = runner.invoke(app, ["kernel", "--config", str(run_file)])
    assert result.exit_code == 0, result.output


@pytest.mark.parametrize(
    "args",
    [
        ["kernel", "--model", "sphere"],
        ["kernel", "--z", "one"],
        ["holonomy", "--radius", "1.0"],
        ["norm", "--p", "10:30:10"],
        ["norm", "--scenario", "overlap"],
        ["intersect", "--scenario", "norm"],
        ["poincare", "--weight", "7"],
    ],
)
def test_validation_errors_exit_2(args):
    result = runner.invoke(app, args)
    assert result.exit_code == 2
    assert "Error:" in result.output


def test_unknown_flag():
    assert runner.invoke(app, ["norm", "--frobnicate"]).exit_code == 2


def test_bad_environment(monkeypatch):
    monkeypatch.setenv("ISOQ_WORKERS", "many")
    result = runner.invoke(app, ["norm", "--p", "20:100:20"])
    assert result.exit_code == 2
    assert "ConfigError" in result.output


def test_holonomy():
    result = runner.invoke(app, ["holonomy", "--radius", "1.0", "--p", "20"])
    assert result.exit_code == 0
    assert "admissible" in result.output


# =========================================================================
# Experiments and stored results
# =========================================================================


def test_norm_writes_json_and_csv(norm_run):
    record = json.loads((norm_run / "norm.json").read_text())
    assert record["schema_version"] == "isoq-result-v1"
    assert record["config"]["p_schedule"] == [20, 40, 60, 80, 100]
    assert (norm_run / "norm.csv").read_text().startswith("p,value_re,value_im")


def test_norm_from_run_file(tmp_path):
    run_file = tmp_path / "run.cfg"
    run_file.write_text("p-schedule = 20:100:20\ncertify = false\n")
    result = runner.invoke(app, ["norm", "--config", str(run_file), "--output", str(tmp_path), "--stem", "r"])
    assert result.exit_code == 0, result.output
    record = json.loads((tmp_path / "r.json").read_text())
    assert record["config"]["certify"] is False
    assert all(row["certificate_delta"] is None for row in record["report"]["rows"])


def test_fit(norm_run):
    result = runner.invoke(app, ["fit", "--csv", str(norm_run / "norm.csv"), "--exponent", "0.5"])
    assert result.exit_code == 0, result.output
    assert "Measured exponent" in result.output


def test_fit_rejects_foreign_table(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("p,value_abs\n10,1.0\n")
    assert runner.invoke(app, ["fit", "--csv", str(path), "--exponent", "0.5"]).exit_code == 2


def test_golden(norm_run, tmp_path):
    result_path = norm_run / "norm.json"
    golden_path = tmp_path / "golden.json"
    golden_path.write_text(result_path.read_text())

    assert runner.invoke(app, ["golden", str(result_path), str(golden_path)]).exit_code == 0

    data = json.loads(golden_path.read_text())
    data["report"]["exponent_estimate"] *= 1 + 1e-6
    golden_path.write_text(json.dumps(data))
    failed = runner.invoke(app, ["golden", str(result_path), str(golden_path)])
    assert failed.exit_code == 1
    assert "exponent_estimate" in failed.output

    passed = runner.invoke(app, ["golden", str(result_path), str(golden_path), "--tol", "exponent_estimate=1e-5"])
    assert passed.exit_code == 0

    assert runner.invoke(app, ["golden", str(result_path), str(golden_path), "--tol", "b0"]).exit_code == 2


def test_golden_schema_mismatch(norm_run, tmp_path):
    golden_path = tmp_path / "golden.json"
    data = json.loads((norm_run / "norm.json").read_text())
    data["schema_version"] = "isoq-result-v0"
    golden_path.write_text(json.dumps(data))
    assert runner.invoke(app, ["golden", str(norm_run / "norm.json"), str(golden_path)]).exit_code == 2


def test_report(norm_run, tmp_path):
    out = tmp_path / "report"
    result = runner.invoke(app, ["report", str(norm_run.parent), "--output", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "tables" / "norm.md").read_text().startswith("## norm (bargmann)")
    assert (out / "summary.md").read_text().startswith("# isoq Results")


def test_report_missing_dir(tmp_path):
    assert runner.invoke(app, ["report", str(tmp_path / "nowhere")]).exit_code == 2


def test_hyperbolic_kernel_at_i():
    result = runner.invoke(app, ["kernel", "--model", "hyperbolic", "--p", "1", "--z", "i", "--w", "i"])
    assert result.exit_code == 0
    assert "|value| = 0.0795775" in result.output


def test_main_returns_exit_codes(tmp_path):
    assert main(["scenarios"]) == 0
    assert main(["holonomy", "--radius", "1.0"]) == 2
    assert main(["norm", "--frobnicate", "--output", str(tmp_path / "out")]) == 2
    assert not (tmp_path / "out").exists()


# =========================================================================
# Modular certificates
# =========================================================================


@pytest.fixture
def modular_checks(monkeypatch):
    """Cheap stand-ins for the series evaluations; each test flips one outcome"""

    state = {"residual": 1e-14, "bound": 1e-10, "magnitude": 1.0, "gap": 1e-6}

    def series(p, g0, z, table, quadrature, workers):
        return PoincareValue(complex(z), 1.0 + 0j, 1e-12, None, None, 1.0, 0.1, 1e-12)

    def check(ev, g, z, workers=1):
        return ModularityCheck(g.as_tuple(), complex(z), state["residual"], state["bound"])

    def witness(ev, points, workers=1):
        return NonVanishing(ev.p, complex(points[0]), state["magnitude"], 1e-12)

    def routes(ev, y_max, grid, doubling_tol, workers):
        pairing = GeodesicPairing(ev.p, 0.45 + 0j, 1e-12, 1e-12, 256, 1e-12)
        domain = PeterssonNorm(ev.p, 0.45, 2 * grid, 10.0, 1e-9, 1)
        return RouteComparison(pairing, domain, state["gap"], 0.01)

    monkeypatch.setattr("cli.relative_poincare_series", series)
    monkeypatch.setattr("cli.modularity_check", check)
    monkeypatch.setattr("cli.nonvanishing_witness", witness)
    monkeypatch.setattr("cli.compare_routes", routes)
    return state


def test_poincare_writes_record(modular_checks, tmp_path):
    result = runner.invoke(app, ["poincare", "--points", "2", "-w", "1", "--output", str(tmp_path)])
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "poincare.json").read_text())["payload"]
    assert payload["weight"] == 12
    assert all(c["passed"] for c in payload["modularity"])


def test_poincare_modularity_failure_exits_3(modular_checks, tmp_path):
    modular_checks["residual"] = 1e-3
    result = runner.invoke(app, ["poincare", "--points", "2", "-w", "1", "--output", str(tmp_path)])
    assert result.exit_code == 3
    assert "CertificateFailure" in result.output
    assert (tmp_path / "poincare.json").exists()


def test_poincare_without_witness_exits_3(modular_checks):
    modular_checks["magnitude"] = 1e-12
    result = runner.invoke(app, ["poincare", "--points", "2", "-w", "1"])
    assert result.exit_code == 3
    assert "no sample point" in result.output


def test_petersson_routes(modular_checks, tmp_path):
    result = runner.invoke(app, ["petersson", "-w", "1", "--output", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert json.loads((tmp_path / "petersson.json").read_text())["payload"]["agree"] is True


def test_petersson_disagreement_exits_3(modular_checks, tmp_path):
    modular_checks["gap"] = 0.5
    result = runner.invoke(app, ["petersson", "-w", "1", "--output", str(tmp_path)])
    assert result.exit_code == 3
    assert "norm routes differ" in result.output
    assert json.loads((tmp_path / "petersson.json").read_text())["payload"]["agree"] is False


@pytest.mark.slow
def test_petersson_routes_agree_end_to_end():
    result = runner.invoke(app, ["petersson", "--p", "10", "--word-length", "12"])
    assert result.exit_code == 0, result.output


def test_poincare_uses_configured_saturation(modular_checks, monkeypatch, tmp_path):
    config = load_config()
    config["hyperbolic"]["saturation"] = 3
    monkeypatch.setattr("cli.load_config", lambda: config)
    result = runner.invoke(app, ["poincare", "--points", "2", "-w", "1", "--output", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert json.loads((tmp_path / "poincare.json").read_text())["payload"]["table"]["saturation"] == 3

#!/usr/bin/env python3
"""
isoq CLI

Usage:
    isoq kernel --model hyperbolic --p 1 --z i --w i
    isoq holonomy --radius 1.0 --p 20
    isoq norm --geometry bargmann --radius 1.0 --p 20:400:20
    isoq intersect --scenario intersect --p 100:300:20
    isoq poincare --g0 2,1,1,1 --weight 12 --word-length 12
    isoq petersson --g0 2,1,1,1 --p 6
    isoq fit --csv result.csv --exponent 0.5 --order 2
    isoq golden result.json golden.json --tol b0=1e-10
    isoq suite [--output=<dir>]
    isoq report <run_dir>
    isoq scenarios
"""

from dotenv import load_dotenv
load_dotenv()  # Load .env file before anything else

from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Optional

import typer
from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn
from rich.table import Table

from isoq import __version__
from isoq.bargmann import FLAT, bargmann_kernel, holonomy_report, to_point
from isoq.config import (
    INTERSECTION_KINDS,
    NORM_KINDS,
    build_run_config,
    load_config,
    load_run_file,
    parse_matrix,
    resolve_workers,
)
from isoq.curves import ParametrizedCurve
from isoq.errors import CertificateFailure, ConfigError, IsoqError, ValidationError
from isoq.hyperbolic import (
    S,
    T,
    MoebiusElement,
    compare_routes,
    coset_reps,
    geodesic_series,
    hyperbolic_kernel,
    measure_katok_constant,
    modularity_check,
    nonvanishing_witness,
    relative_poincare_series,
    sample_points,
    saturation_width,
)
from isoq.localmodel import model_kernel
from isoq.models import ComparisonReport, ExperimentRecord, format_complex, parse_complex
from isoq.numerics import estimate_exponent, fit_power_series
from isoq.reporting import SummaryGenerator, TableGenerator, golden_check, read_csv, write_json, write_record
from isoq.runners import ExperimentRunner, SuiteRunner, load_failures, load_results
from isoq.scenarios import SCENARIOS

app = typer.Typer(
    name="isoq",
    help="Numerical laboratory for Berezin-Toeplitz isotropic states",
    add_completion=False,
)
console = Console()

# T-saturated tables leave only rounding in the T residual
T_RESIDUAL_FLOOR = 1e-12


def _fail(e: IsoqError) -> None:
    """Single-line diagnostic, exit with the error family code"""
    console.print(f"Error: {type(e).__name__}: {e}", style="red", markup=False, highlight=False)
    raise typer.Exit(e.exit_code)


def _point(text: str) -> complex:
    try:
        return parse_complex(text)
    except ValueError as e:
        raise ConfigError(f"bad complex number '{text}'") from e


def _config() -> dict:
    try:
        return load_config()
    except IsoqError as e:
        _fail(e)


def _file_values(config_file: Optional[Path]) -> dict[str, str]:
    return load_run_file(config_file) if config_file else {}


def _pick(cli_value: Any, values: dict[str, str], key: str, default: Any, cast: Callable = str) -> Any:
    """Command-line value, else run-file value, else default"""

    if cli_value is not None:
        return cli_value
    if key in values:
        try:
            return cast(values[key])
        except ValueError as e:
            raise ConfigError(f"bad value for {key}: {values[key]}") from e
    return default


def _workers(config: dict, workers: Optional[int]) -> int:
    if workers is not None:
        config["parallel"]["workers"] = workers
    return resolve_workers(config)


def _element(g0: Optional[str], values: dict[str, str]) -> MoebiusElement:
    return MoebiusElement.integral(parse_matrix(_pick(g0, values, "g0", "2,1,1,1")))


def _save_payload(name: str, payload: dict, output: Optional[Path], stem: Optional[str]) -> None:
    if output is None:
        return
    record = ExperimentRecord(name=name, config={}, payload=payload, version=__version__)
    path = write_json(record, output, stem or name)
    console.print(f"[green]✓[/green] Saved [dim]{path}[/dim]")


# =========================================================================
# Oracles
# =========================================================================


@app.command()
def kernel(
    model: Optional[str] = typer.Option(None, "--model", "-m", help="bargmann, local or hyperbolic"),
    p: Optional[int] = typer.Option(None, "--p", help="Tensor power"),
    z: Optional[str] = typer.Option(None, "--z", help="First point; x+yi is (u, v) in the flat models"),
    w: Optional[str] = typer.Option(None, "--w", help="Second point"),
    config_file: Optional[Path] = typer.Option(None, "--config", "-c", help="key = value run file"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Output directory"),
):
    """Print a kernel value"""

    try:
        values = _file_values(config_file)
        model = _pick(model, values, "model", "bargmann")
        p = _pick(p, values, "p", 1, int)
        z = _pick(z, values, "z", "i" if model == "hyperbolic" else "0")
        w = _pick(w, values, "w", z)
        if model == "hyperbolic":
            value = complex(hyperbolic_kernel(p, _point(z), _point(w)))
        elif model == "bargmann":
            value = complex(bargmann_kernel(p, to_point(_point(z)), to_point(_point(w))))
        elif model == "local":
            value = complex(model_kernel(FLAT, to_point(_point(z)), to_point(_point(w))))
        else:
            raise ValidationError(f"Unknown model: {model}. Available: ['bargmann', 'local', 'hyperbolic']")
    except IsoqError as e:
        _fail(e)

    console.print(format_complex(value))
    console.print(f"|value| = {abs(value):.7f}")
    _save_payload("kernel", {"model": model, "p": p, "z": z, "w": w, "value": format_complex(value)}, output, None)


@app.command()
def holonomy(
    radius: Optional[float] = typer.Option(None, "--radius", "-r", help="Circle radius"),
    p: Optional[int] = typer.Option(None, "--p", help="Tensor power"),
    center: Optional[str] = typer.Option(None, "--center", help="Circle center u+vi"),
    max_order: int = typer.Option(64, "--max-order", help="Largest k tried for holonomy^k = 1"),
    config_file: Optional[Path] = typer.Option(None, "--config", "-c", help="key = value run file"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Output directory"),
):
    """Admissibility report for a circle: shoelace and ODE holonomy"""

    try:
        values = _file_values(config_file)
        radius = _pick(radius, values, "radius", 1.0, float)
        p = _pick(p, values, "p", None, int)
        if p is None:
            raise ConfigError("holonomy needs --p")
        curve = ParametrizedCurve.circle(_point(_pick(center, values, "center", "0")), radius)
        report = holonomy_report(curve, p, max_order)
    except IsoqError as e:
        _fail(e)

    table = Table(title=f"Holonomy of L^{p} around r={radius}", show_header=True)
    table.add_column("Quantity", style="cyan")
    table.add_column("Value")
    table.add_row("signed area", f"{report.area:.12f}")
    table.add_row("shoelace", format_complex(report.shoelace))
    table.add_row("ODE transport", format_complex(report.ode))
    table.add_row("|holonomy - 1|", f"{report.residual:.3e}")
    table.add_row("order k", str(report.order) if report.order else "none")
    table.add_row("admissible", "[green]yes[/green]" if report.admissible else "[red]no[/red]")
    console.print(table)
    _save_payload("holonomy", report.to_dict(), output, None)


# =========================================================================
# Experiments
# =========================================================================


def _run_experiment(
    family: tuple[str, ...],
    default_scenario: str,
    overrides: dict,
    config_file: Optional[Path],
    output: Optional[Path],
    stem: Optional[str],
    workers: Optional[int],
    verbose: bool,
) -> None:
    config = _config()
    try:
        run_file = _file_values(config_file)
        scenario = overrides.get("scenario") or run_file.get("scenario") or default_scenario
        if scenario not in family:
            raise ValidationError(f"{scenario} does not belong here; expected one of {list(family)}")
        overrides = {**overrides, "scenario": scenario, "output_dir": output, "output_stem": stem or scenario}
        run_config = build_run_config(config, run_file=run_file, overrides=overrides)
        budget = _workers(config, workers if workers is not None else run_config.workers)
    except IsoqError as e:
        _fail(e)

    console.print(
        Panel(
            f"[bold]isoq[/bold] {__version__}\n\n"
            f"Scenario: [cyan]{run_config.scenario}[/cyan] on [cyan]{run_config.geometry}[/cyan]\n"
            f"p: [cyan]{run_config.p_schedule[0]}..{run_config.p_schedule[-1]}[/cyan] "
            f"({len(run_config.p_schedule)} values)\n"
            f"Workers: [cyan]{budget}[/cyan]\n"
            f"Output: [dim]{run_config.output_dir}[/dim]",
            title="Configuration",
        )
    )

    runner = ExperimentRunner(config, verbose=verbose)
    try:
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            console=console,
        ) as progress:
            task = progress.add_task(f"Running [cyan]{run_config.scenario}[/cyan]...", total=len(run_config.p_schedule))
            record = runner.run(run_config, workers=budget, progress_callback=lambda: progress.advance(task))
        json_path, csv_path = write_record(record, run_config.output_dir, run_config.output_stem)
    except IsoqError as e:
        _fail(e)

    console.print()
    _print_report(record.report)
    console.print(f"\n[green]✓[/green] Results saved to [dim]{json_path}[/dim] and [dim]{csv_path}[/dim]")


@app.command()
def norm(
    geometry: Optional[str] = typer.Option(None, "--geometry", "-g", help="bargmann or modular"),
    scenario: Optional[str] = typer.Option(None, "--scenario", "-s", help="norm, toeplitz-norm or poincare-norm"),
    p: Optional[str] = typer.Option(None, "--p", help="p-schedule: start:stop:step or a comma list"),
    radius: Optional[float] = typer.Option(None, "--radius", "-r", help="Circle radius"),
    center: Optional[str] = typer.Option(None, "--center", help="Circle center u+vi"),
    symbol: Optional[str] = typer.Option(None, "--symbol", help="Toeplitz symbol: one, u2, v2, r2"),
    radius_policy: Optional[str] = typer.Option(None, "--radius-policy", help="snap or strict"),
    g0: Optional[str] = typer.Option(None, "--g0", help="Hyperbolic generator a,b,c,d"),
    word_length: Optional[int] = typer.Option(None, "--word-length", "-L", help="Coset BFS depth"),
    convention: Optional[str] = typer.Option(None, "--convention", help="psl2-distinct or sl2-with-minus-identity"),
    oversampling: Optional[float] = typer.Option(None, "--oversampling", help="Quadrature node multiplier"),
    fit_order: Optional[int] = typer.Option(None, "--fit-order", "-k", help="Fit order k"),
    no_certify: bool = typer.Option(False, "--no-certify", help="Skip node-doubling certificates"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker count"),
    config_file: Optional[Path] = typer.Option(None, "--config", "-c", help="key = value run file"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Output directory"),
    stem: Optional[str] = typer.Option(None, "--stem", help="Output file stem"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
):
    """Norm experiments: norm, toeplitz-norm, poincare-norm"""

    default = "poincare-norm" if geometry == "modular" else "norm"
    overrides = {
        "geometry": geometry,
        "scenario": scenario,
        "p_schedule": p,
        "radius": radius,
        "center": center,
        "symbol": symbol,
        "radius_policy": radius_policy,
        "g0": g0,
        "word_length": word_length,
        "convention": convention,
        "oversampling": oversampling,
        "fit_order": fit_order,
        "certify": False if no_certify else None,
    }
    _run_experiment(NORM_KINDS, default, overrides, config_file, output, stem, workers, verbose)


@app.command()
def intersect(
    scenario: Optional[str] = typer.Option(
        None, "--scenario", "-s", help="intersect, overlap, empty-intersect or geodesic-intersect"
    ),
    geometry: Optional[str] = typer.Option(None, "--geometry", "-g", help="bargmann or modular"),
    p: Optional[str] = typer.Option(None, "--p", help="p-schedule: start:stop:step or a comma list"),
    radius: Optional[float] = typer.Option(None, "--radius", help="First circle radius"),
    center: Optional[str] = typer.Option(None, "--center", help="First circle center"),
    radius2: Optional[float] = typer.Option(None, "--radius2", help="Second circle radius"),
    center2: Optional[str] = typer.Option(None, "--center2", help="Second circle center"),
    phase_shift: Optional[float] = typer.Option(None, "--phase-shift", help="Section phase for overlap"),
    radius_policy: Optional[str] = typer.Option(None, "--radius-policy", help="snap or strict"),
    g0: Optional[str] = typer.Option(None, "--g0", help="First hyperbolic generator a,b,c,d"),
    g1: Optional[str] = typer.Option(None, "--g1", help="Second hyperbolic generator a,b,c,d"),
    word_length: Optional[int] = typer.Option(None, "--word-length", "-L", help="Coset BFS depth"),
    convention: Optional[str] = typer.Option(None, "--convention", help="psl2-distinct or sl2-with-minus-identity"),
    oversampling: Optional[float] = typer.Option(None, "--oversampling", help="Quadrature node multiplier"),
    fit_order: Optional[int] = typer.Option(None, "--fit-order", "-k", help="Fit order k"),
    no_certify: bool = typer.Option(False, "--no-certify", help="Skip node-doubling certificates"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker count"),
    config_file: Optional[Path] = typer.Option(None, "--config", "-c", help="key = value run file"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Output directory"),
    stem: Optional[str] = typer.Option(None, "--stem", help="Output file stem"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
):
    """Intersection experiments: intersect, overlap, empty-intersect, geodesic-intersect"""

    if geometry is None and scenario == "geodesic-intersect":
        geometry = "modular"
    overrides = {
        "geometry": geometry,
        "scenario": scenario,
        "p_schedule": p,
        "radius": radius,
        "center": center,
        "radius2": radius2,
        "center2": center2,
        "phase_shift": phase_shift,
        "radius_policy": radius_policy,
        "g0": g0,
        "g1": g1,
        "word_length": word_length,
        "convention": convention,
        "oversampling": oversampling,
        "fit_order": fit_order,
        "certify": False if no_certify else None,
    }
    _run_experiment(INTERSECTION_KINDS, "intersect", overrides, config_file, output, stem, workers, verbose)


# =========================================================================
# Modular series
# =========================================================================


@app.command()
def poincare(
    g0: Optional[str] = typer.Option(None, "--g0", help="Hyperbolic generator a,b,c,d"),
    weight: Optional[int] = typer.Option(None, "--weight", help="Even weight 2p"),
    word_length: Optional[int] = typer.Option(None, "--word-length", "-L", help="Coset BFS depth"),
    convention: Optional[str] = typer.Option(None, "--convention", help="psl2-distinct or sl2-with-minus-identity"),
    points: int = typer.Option(5, "--points", help="Number of seeded test points"),
    seed: int = typer.Option(0, "--seed", help="Test point seed"),
    quadrature: bool = typer.Option(False, "--quadrature", help="Also evaluate by unfolded quadrature"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker count"),
    config_file: Optional[Path] = typer.Option(None, "--config", "-c", help="key = value run file"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Output directory"),
):
    """Relative Poincare series: values, Katok constant, S/T residuals, non-vanishing"""

    config = _config()
    try:
        values = _file_values(config_file)
        g = _element(g0, values)
        w = _pick(weight, values, "weight", 12, int)
        if w % 2:
            raise ValidationError(f"weight must be even, got {w}")
        p = w // 2
        depth = _pick(word_length, values, "word_length", config["hyperbolic"]["word_length"], int)
        conv = _pick(convention, values, "convention", config["hyperbolic"]["convention"])
        budget = _workers(config, workers)

        width = config["hyperbolic"]["saturation"]
        table = coset_reps(g, depth, conv, saturation_width(p) if width is None else width)
        hyp = config["hyperbolic"]
        ev = geodesic_series(g, p, table, shell_tol=hyp["shell_tol"], shell_ratio_warn=hyp["shell_ratio_warn"])
        zs = sample_points(points, seed)
        series = [relative_poincare_series(p, g, z, table, quadrature, budget) for z in zs]
        checks = [modularity_check(ev, h, z, budget) for z in zs for h in (S, T)]
        katok = measure_katok_constant(p, g)
        witness = nonvanishing_witness(ev, zs, workers=budget)
    except IsoqError as e:
        _fail(e)

    table_out = Table(title=f"Relative Poincare series, weight {w}, {len(table)} cosets", show_header=True)
    table_out.add_column("z", style="cyan")
    table_out.add_column("value")
    table_out.add_column("truncation error")
    table_out.add_column("S residual / bound")
    table_out.add_column("T residual")
    for i, value in enumerate(series):
        s_check, t_check = checks[2 * i], checks[2 * i + 1]
        mark = "[green]✓[/green]" if s_check.passed else "[red]✗[/red]"
        table_out.add_row(
            format_complex(value.z),
            f"{value.katok:.6e}",
            f"{value.error:.2e}",
            f"{mark} {s_check.residual:.2e} / {s_check.bound:.2e}",
            f"{t_check.residual:.2e}",
        )
    console.print(table_out)
    console.print(
        f"Katok constant: closed form {katok.analytic:.10e}, measured rel. error {katok.relative_error:.2e}"
    )
    status = "[green]non-vanishing witnessed[/green]" if witness.witnessed else "[red]no witness[/red]"
    console.print(f"{status}: |s| = {witness.magnitude:.3e} vs error {witness.error:.3e} at {format_complex(witness.point)}")

    _save_payload(
        "poincare",
        {
            "g0": list(g.as_tuple()),
            "weight": w,
            "table": table.to_dict(),
            "values": [v.to_dict() for v in series],
            "modularity": [c.to_dict() for c in checks],
            "katok": katok.to_dict(),
            "nonvanishing": witness.to_dict(),
        },
        output,
        None,
    )

    failed = [c for c in checks if c.residual > max(c.bound, T_RESIDUAL_FLOOR)]
    if failed:
        worst = max(failed, key=lambda c: c.residual - c.bound)
        _fail(CertificateFailure(
            f"modularity under {worst.element} at {format_complex(worst.z)}: "
            f"residual {worst.residual:.3e} exceeds bound {worst.bound:.3e}"
        ))
    if not witness.witnessed:
        _fail(CertificateFailure(
            f"no sample point separates |s| = {witness.magnitude:.3e} from its error {witness.error:.3e}"
        ))


@app.command()
def petersson(
    g0: Optional[str] = typer.Option(None, "--g0", help="Hyperbolic generator a,b,c,d"),
    p: Optional[int] = typer.Option(None, "--p", help="Tensor power (weight 2p)"),
    word_length: Optional[int] = typer.Option(None, "--word-length", "-L", help="Coset BFS depth"),
    convention: Optional[str] = typer.Option(None, "--convention", help="psl2-distinct or sl2-with-minus-identity"),
    grid: Optional[int] = typer.Option(None, "--grid", help="Gauss-Legendre nodes per axis"),
    y_max: Optional[float] = typer.Option(None, "--y-max", help="Cusp cutoff height (>= 10)"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker count"),
    config_file: Optional[Path] = typer.Option(None, "--config", "-c", help="key = value run file"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Output directory"),
):
    """Norm of a geodesic series by the reproducing and fundamental-domain routes"""

    config = _config()
    try:
        values = _file_values(config_file)
        g = _element(g0, values)
        level = _pick(p, values, "p", 6, int)
        depth = _pick(word_length, values, "word_length", config["hyperbolic"]["word_length"], int)
        conv = _pick(convention, values, "convention", config["hyperbolic"]["convention"])
        nodes = _pick(grid, values, "grid", config["hyperbolic"]["petersson_grid"], int)
        height = _pick(y_max, values, "y_max", None, float)
        budget = _workers(config, workers)

        hyp = config["hyperbolic"]
        ev = geodesic_series(
            g,
            level,
            word_length=depth,
            convention=conv,
            saturation=hyp["saturation"],
            shell_tol=hyp["shell_tol"],
            shell_ratio_warn=hyp["shell_ratio_warn"],
        )
        comparison = compare_routes(ev, height, nodes, doubling_tol=hyp["petersson_tol"], workers=budget)
    except IsoqError as e:
        _fail(e)

    table = Table(title=f"Norm of the series of {g.as_tuple()} at p={level}", show_header=True)
    table.add_column("Route", style="cyan")
    table.add_column("Value")
    table.add_column("Certificate")
    table.add_row(
        "reproducing",
        f"{comparison.reproducing.value.real:.10e}",
        f"{comparison.reproducing.certificate_delta or 0.0:.1e}",
    )
    table.add_row(
        "fundamental domain",
        f"{comparison.domain.value:.10e}",
        f"{comparison.domain.certificate_delta:.1e}",
    )
    console.print(table)
    mark = "[green]✓[/green]" if comparison.agree else "[red]✗[/red]"
    console.print(f"{mark} relative gap {comparison.relative_gap:.2e} (tolerance {comparison.tolerance:.2e})")
    _save_payload("petersson", comparison.to_dict(), output, None)

    if not comparison.agree:
        _fail(CertificateFailure(
            f"norm routes differ by {comparison.relative_gap:.3e} (tolerance {comparison.tolerance:.3e})"
        ))


# =========================================================================
# Stored results
# =========================================================================


@app.command()
def fit(
    csv_file: Path = typer.Option(..., "--csv", help="Per-p table written by an experiment"),
    exponent: float = typer.Option(..., "--exponent", "-e", help="Expected exponent"),
    order: int = typer.Option(2, "--order", "-k", help="Fit order k"),
    config_file: Optional[Path] = typer.Option(None, "--config", "-c", help="key = value run file"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Output directory"),
):
    """Refit a stored per-p table"""

    config = _config()
    try:
        ps, values = read_csv(csv_file)
        fitted = fit_power_series(ps, values, exponent, order, config["numerics"]["max_condition"])
        measured = estimate_exponent(ps, values)
    except IsoqError as e:
        _fail(e)

    table = Table(title=f"Fit of {csv_file.name} at exponent {exponent}", show_header=True)
    table.add_column("r", style="cyan")
    table.add_column("b_r")
    for r, b in enumerate(fitted.coefficients):
        table.add_row(str(r), format_complex(b))
    console.print(table)
    console.print(f"Measured exponent: {measured:.6f}; residual norm {fitted.residual_norm:.3e}")
    _save_payload("fit", {"fit": fitted.to_dict(), "exponent_estimate": measured}, output, None)


def _parse_tolerances(items: list[str]) -> dict[str, float]:
    tolerances = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"bad tolerance '{item}': expected field=value")
        key, value = item.split("=", 1)
        try:
            tolerances[key.strip()] = float(value)
        except ValueError as e:
            raise ConfigError(f"bad tolerance '{item}'") from e
    return tolerances


@app.command()
def golden(
    result: Path = typer.Argument(..., help="Result record"),
    golden_path: Path = typer.Argument(..., help="Stored golden record"),
    tol: list[str] = typer.Option([], "--tol", help="Relative tolerance field=value; repeatable"),
):
    """Compare a result record against a stored golden"""

    try:
        outcome = golden_check(result, golden_path, _parse_tolerances(tol))
    except IsoqError as e:
        _fail(e)

    if outcome.passed:
        console.print(f"[green]✓[/green] {outcome.describe()}")
        return
    console.print(f"[red]✗[/red] {outcome.describe()}", markup=True)
    raise typer.Exit(1)


# =========================================================================
# Suite
# =========================================================================


@app.command()
def suite(
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Output directory"),
    only: Optional[str] = typer.Option(None, "--scenarios", help="Comma-separated scenario names"),
    skip_modular: bool = typer.Option(False, "--skip-modular", help="Skip the slow modular presets"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker count"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
):
    """Run every preset in config/scenarios.yaml"""

    config = _config()

    if output is None:
        timestamp = datetime.now().strftime("%Y-%m-%dT%H-%M-%S")
        output = Path(f"outputs/runs/{timestamp}")

    try:
        budget = _workers(config, workers)
    except IsoqError as e:
        _fail(e)

    console.print(
        Panel(
            f"[bold]isoq Suite[/bold]\n\n"
            f"Output: [dim]{output}[/dim]\n"
            f"Skip modular: [cyan]{skip_modular}[/cyan]",
            title="Configuration",
        )
    )

    runner = SuiteRunner(config, verbose=verbose)

    try:
        result = runner.run(
            output_dir=output,
            workers=budget,
            scenario_filter=only.split(",") if only else None,
            skip_modular=skip_modular,
        )
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted[/yellow]")
        raise typer.Exit(1)

    console.print(f"\n[green]✓[/green] Suite complete: {len(result.records)} experiments, {len(result.failures)} failed")
    console.print(f"[green]✓[/green] Results saved to [dim]{output}[/dim]")

    console.print("\nGenerating report...")
    _generate_report(output)


@app.command()
def report(
    run_dir: Path = typer.Argument(..., help="Path to run output directory"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report output directory"),
):
    """Generate markdown tables and a summary from a suite run"""

    if not run_dir.exists():
        _fail(ValidationError(f"Run directory not found: {run_dir}"))

    _generate_report(run_dir, output)


def _generate_report(run_dir: Path, output: Optional[Path] = None):
    """Generate report from run directory"""

    if output is None:
        output = run_dir.parent.parent / "reports" / run_dir.name

    output.mkdir(parents=True, exist_ok=True)

    records = load_results(run_dir)
    if not records:
        console.print("[yellow]Warning:[/yellow] No results found in run directory")
        return

    table_gen = TableGenerator()
    tables_dir = output / "tables"
    tables_dir.mkdir(exist_ok=True)

    console.print("Generating tables...")
    for name, record in records.items():
        table = table_gen.generate_table(record)
        if table:
            table_path = tables_dir / f"{name}.md"
            table_path.write_text(table, encoding="utf-8")
            console.print(f"  [green]✓[/green] {table_path.name}")

    summary = SummaryGenerator().generate(records, run_dir, load_failures(run_dir))
    (output / "summary.md").write_text(summary, encoding="utf-8")
    console.print("  [green]✓[/green] summary.md")

    console.print(f"\n[green]✓[/green] Report generated: [dim]{output}[/dim]")


@app.command()
def scenarios():
    """List available scenarios"""

    console.print(Panel("[bold]Available Scenarios[/bold]", expand=False))

    for family, scenario_list in SCENARIOS.items():
        table = Table(title=f"[cyan]{family.upper()}[/cyan]", show_header=True)
        table.add_column("Name", style="green")
        table.add_column("Description")
        table.add_column("Geometries", style="dim")

        for s in scenario_list:
            table.add_row(s.name, s.description, ", ".join(s.geometries))

        console.print(table)
        console.print()


def _print_report(report: ComparisonReport) -> None:
    """Print the per-p table and the fit verdict"""

    table = Table(title=f"{report.scenario} ({report.geometry})", show_header=True)
    table.add_column("p", style="cyan")
    table.add_column("value")
    table.add_column("corrected")
    table.add_column("nodes")
    table.add_column("certificate")

    for row in report.rows:
        table.add_row(
            str(row.p),
            f"{row.value:.8g}",
            f"{row.corrected:.8g}",
            f"{row.nodes_used:,}",
            "N/A" if row.certificate_delta is None else f"{row.certificate_delta:.1e}",
        )
    console.print(table)

    if report.fitted is not None:
        console.print(
            f"exponent {report.exponent_estimate:.4f} (expected {report.expected_exponent}), "
            f"b0 {report.fitted.b0:.8g} vs predicted {report.predicted_b0:.8g} "
            f"(rel. error {report.relative_error_b0:.2e})"
        )
    for name, ok in report.checks.items():
        mark = "[green]✓[/green]" if ok else "[red]✗[/red]"
        console.print(f"  {mark} {name}")


def main(argv: Optional[list[str]] = None) -> int:
    """Run the CLI on argv and return its exit code"""
    try:
        app(args=argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

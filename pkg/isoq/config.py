"""
Configuration loading and management.

Precedence, lowest first: DEFAULT_CONFIG, config/default.yaml,
config/scenarios.yaml presets, ISOQ_* environment variables, a flat
`key = value` run file, command-line overrides.
"""

import os
from pathlib import Path
from typing import Any, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .models import format_complex, parse_complex

DEFAULT_CONFIG = {
    "numerics": {
        "max_condition": 1e12,
        "fit_order": 2,
    },
    "quadrature": {
        "oversampling": 1.0,
        "min_nodes": 64,
        "nodes_per_unit": 16,
        "certificate_tol": 1e-7,
    },
    "bargmann": {
        "radius_policy": "snap",
        "domain_sigmas": 6.0,
    },
    "hyperbolic": {
        "convention": "psl2-distinct",
        "word_length": 8,
        "shell_tol": 1e-8,
        "shell_ratio_warn": 0.8,
        "saturation": None,
        "petersson_grid": 48,
        "petersson_tol": 1e-4,
    },
    "parallel": {
        "workers": None,
    },
    "output": {
        "base_dir": "outputs",
        "runs_dir": "runs",
        "reports_dir": "reports",
    },
}


def load_config(config_dir: Optional[Path] = None) -> dict:
    """
    Load configuration from YAML files.

    Searches in order:
    1. Provided config_dir
    2. ./config/
    3. Falls back to defaults
    """

    if config_dir is None:
        config_dir = Path("config")

    config = _deep_merge(DEFAULT_CONFIG, {})

    default_yaml = config_dir / "default.yaml"
    if default_yaml.exists():
        with open(default_yaml) as f:
            user_config = yaml.safe_load(f) or {}
            config = _deep_merge(config, user_config)

    scenarios_yaml = config_dir / "scenarios.yaml"
    if scenarios_yaml.exists():
        with open(scenarios_yaml) as f:
            config["scenarios"] = yaml.safe_load(f) or {}

    return _apply_env_overrides(config)


def _deep_merge(base: dict, override: dict) -> dict:
    """Recursively merge override into base"""

    result = {k: (_deep_merge(v, {}) if isinstance(v, dict) else v) for k, v in base.items()}

    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _deep_merge(result[key], value)
        else:
            result[key] = value

    return result


def _apply_env_overrides(config: dict) -> dict:
    """Apply environment variable overrides"""

    try:
        if os.getenv("ISOQ_WORKERS"):
            config["parallel"]["workers"] = int(os.getenv("ISOQ_WORKERS"))

        if os.getenv("ISOQ_OVERSAMPLING"):
            config["quadrature"]["oversampling"] = float(os.getenv("ISOQ_OVERSAMPLING"))

        if os.getenv("ISOQ_FIT_ORDER"):
            config["numerics"]["fit_order"] = int(os.getenv("ISOQ_FIT_ORDER"))
    except ValueError as e:
        raise ConfigError(f"bad ISOQ_* environment value: {e}") from e

    return config


def get_scenario_config(config: dict, scenario_name: str) -> dict:
    """Get the preset for a named scenario from the family-grouped presets"""

    scenarios = config.get("scenarios", {})

    for family, scenario_configs in scenarios.items():
        if isinstance(scenario_configs, dict) and scenario_name in scenario_configs:
            return dict(scenario_configs[scenario_name] or {})

    return {}


def preset_spec(config: dict, scenario_name: str) -> dict:
    """Experiment fields of a preset; the scenario name itself is implied"""

    preset = get_scenario_config(config, scenario_name)
    preset.pop("tolerances", None)
    preset.setdefault("scenario", scenario_name)
    return preset


def scenario_settings(config: dict, scenario_name: str) -> dict:
    """Numerical settings handed to Scenario.configure: global thresholds, then preset tolerances"""

    settings = {
        "certificate_tol": config["quadrature"]["certificate_tol"],
        "shell_tol": config["hyperbolic"]["shell_tol"],
        "shell_ratio_warn": config["hyperbolic"]["shell_ratio_warn"],
        "saturation": config["hyperbolic"]["saturation"],
        "max_condition": config["numerics"]["max_condition"],
        "min_nodes": config["quadrature"]["min_nodes"],
        "nodes_per_unit": config["quadrature"]["nodes_per_unit"],
        "domain_sigmas": config["bargmann"]["domain_sigmas"],
    }
    settings.update(get_scenario_config(config, scenario_name).get("tolerances") or {})
    return settings


def resolve_workers(config: dict) -> int:
    """Worker count from config, defaulting to hardware parallelism"""

    workers = config.get("parallel", {}).get("workers")
    if workers is None:
        return os.cpu_count() or 1
    if int(workers) < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    return int(workers)


# =========================================================================
# Flat run files
# =========================================================================


def parse_schedule(text: str) -> list[int]:
    """
    Parse a p-schedule.

    Accepts "start:stop:step" (stop inclusive), "start:stop" (step 1) or a
    comma-separated list.
    """

    text = text.strip()
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError(text)
            start, stop, step = parts
            return list(range(start, stop + 1, step))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ConfigError(f"bad p-schedule '{text}'") from e


def parse_matrix(text: str) -> tuple[int, int, int, int]:
    """Parse 'a,b,c,d' into an integer 2x2 matrix tuple"""

    try:
        entries = tuple(int(x) for x in text.replace(" ", "").split(","))
    except ValueError as e:
        raise ConfigError(f"bad matrix '{text}': entries must be integers") from e
    if len(entries) != 4:
        raise ConfigError(f"bad matrix '{text}': expected 4 entries")
    return entries


def load_run_file(path: Path) -> dict[str, str]:
    """
    Read a flat `key = value` run file.

    Blank lines are skipped and `#` starts a comment. Keys use either
    dashes or underscores.
    """

    values: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read run file {path}: {e}") from e

    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got '{raw.strip()}'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value

    return values


# =========================================================================
# Validated models
# =========================================================================

Geometry = Literal["bargmann", "modular"]
ScenarioKind = Literal[
    "norm",
    "toeplitz-norm",
    "intersect",
    "overlap",
    "empty-intersect",
    "poincare-norm",
    "geodesic-intersect",
]
Convention = Literal["psl2-distinct", "sl2-with-minus-identity"]

NORM_KINDS = ("norm", "toeplitz-norm", "poincare-norm")
INTERSECTION_KINDS = ("intersect", "overlap", "empty-intersect", "geodesic-intersect")


class ExperimentSpec(BaseModel):
    """One p-sweep: geometry, scenario kind, schedule and scenario parameters"""

    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True, frozen=True)

    geometry: Geometry = "bargmann"
    scenario: ScenarioKind = "norm"
    p_schedule: list[int] = list(range(20, 401, 20))

    # flat model
    radius: float = 1.0
    center: complex = 0j
    radius2: float = 1.0
    center2: complex = 1 + 0j
    phase_shift: float = 0.5
    symbol: Literal["one", "u2", "v2", "r2"] = "one"
    radius_policy: Literal["snap", "strict"] = "snap"

    # modular quotient
    g0: tuple[int, int, int, int] = (2, 1, 1, 1)
    g1: tuple[int, int, int, int] = (2, 3, 1, 2)
    word_length: int = 8
    convention: Convention = "psl2-distinct"

    oversampling: float = 1.0
    fit_order: int = 2
    certify: bool = True

    @field_validator("p_schedule", mode="before")
    @classmethod
    def _parse_schedule(cls, v: Any) -> Any:
        return parse_schedule(v) if isinstance(v, str) else v

    @field_validator("center", "center2", mode="before")
    @classmethod
    def _parse_center(cls, v: Any) -> complex:
        if isinstance(v, str):
            return parse_complex(v)
        if isinstance(v, (list, tuple)) and len(v) == 2:
            return complex(v[0], v[1])
        return complex(v)

    @field_validator("g0", "g1", mode="before")
    @classmethod
    def _parse_matrix(cls, v: Any) -> Any:
        return parse_matrix(v) if isinstance(v, str) else tuple(v)

    @model_validator(mode="after")
    def _check(self) -> "ExperimentSpec":
        ps = self.p_schedule
        if any(p < 1 for p in ps):
            raise ValueError("p_schedule entries must be positive")
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise ValueError("p_schedule must be strictly increasing")
        if self.scenario in ("norm", "toeplitz-norm", "intersect", "overlap"):
            if len(ps) < self.fit_order + 3:
                raise ValueError(
                    f"p_schedule has {len(ps)} entries, fit order {self.fit_order} needs {self.fit_order + 3}"
                )
        if self.geometry == "bargmann" and self.scenario in ("poincare-norm", "geodesic-intersect"):
            raise ValueError(f"scenario {self.scenario} needs geometry=modular")
        if self.geometry == "modular" and self.scenario not in ("poincare-norm", "geodesic-intersect"):
            raise ValueError(f"scenario {self.scenario} needs geometry=bargmann")
        if self.radius <= 0 or self.radius2 <= 0:
            raise ValueError("radii must be positive")
        if self.oversampling < 1:
            raise ValueError("oversampling must be >= 1")
        return self

    def echo(self) -> dict:
        """JSON-safe dump with complex numbers as 're+imi' strings"""

        data = self.model_dump()
        for key, value in data.items():
            if isinstance(value, complex):
                data[key] = format_complex(value)
            elif isinstance(value, tuple):
                data[key] = list(value)
        return data


class RunConfig(ExperimentSpec):
    """ExperimentSpec plus output paths and execution settings"""

    output_dir: Path = Path("outputs/runs")
    output_stem: str = "result"
    workers: Optional[int] = None

    @property
    def spec(self) -> ExperimentSpec:
        fields = set(ExperimentSpec.model_fields)
        return ExperimentSpec(**{k: getattr(self, k) for k in fields})

    def echo(self) -> dict:
        data = super().echo()
        data["output_dir"] = str(self.output_dir)
        return data


def experiment_defaults(config: dict) -> dict:
    """Experiment-level defaults drawn from the numerical config sections"""

    return {
        "oversampling": config["quadrature"]["oversampling"],
        "fit_order": config["numerics"]["fit_order"],
        "radius_policy": config["bargmann"]["radius_policy"],
        "word_length": config["hyperbolic"]["word_length"],
        "convention": config["hyperbolic"]["convention"],
        "workers": config["parallel"]["workers"],
    }


def build_run_config(
    config: dict,
    preset: Optional[dict] = None,
    run_file: Optional[dict] = None,
    overrides: Optional[dict] = None,
) -> RunConfig:
    """
    Merge the configuration layers into a validated RunConfig.

    Args:
        config: Loaded configuration (defaults, yaml, env)
        preset: Named scenario preset from scenarios.yaml
        run_file: Values from a `key = value` run file
        overrides: Command-line values; None entries are ignored

    Returns:
        RunConfig

    Raises:
        ConfigError: on unknown keys or invalid values
    """

    merged: dict[str, Any] = experiment_defaults(config)
    for layer in (preset, run_file, overrides):
        if layer:
            merged.update({k: v for k, v in layer.items() if v is not None})

    try:
        return RunConfig(**merged)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(x) for x in first.get("loc", ()))
        raise ConfigError(f"{where}: {first.get('msg')}") from e
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e

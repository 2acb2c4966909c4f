"""
Result persistence: JSON records, per-p CSV tables and golden comparison.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from ..errors import ConfigError, SchemaMismatch, ValidationError
from ..models import SCHEMA_VERSION, ExperimentRecord, PointRecord, parse_complex

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["p", "value_re", "value_im", "value_abs", "phase", "nodes_used", "certificate_delta"]

# fields that differ between otherwise identical runs
VOLATILE_FIELDS = {"wall_clock_s", "started_at", "completed_at", "output_dir", "output_stem", "workers", "version"}

FIELD_ALIASES = {"b0": "report.fitted.coefficients[0]"}

DEFAULT_GOLDEN_TOL = 0.0


def write_csv(rows: list[PointRecord], path: Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.csv_row())
    return path


def read_csv(path: Path) -> tuple[list[int], list[complex]]:
    """
    Read p and complex values back from a per-p table.

    Raises:
        ValidationError: missing columns or unreadable rows
    """

    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            missing = {"p", "value_re", "value_im"} - set(reader.fieldnames or [])
            if missing:
                raise ValidationError(f"{path}: missing columns {sorted(missing)}")
            rows = list(reader)
        ps = [int(r["p"]) for r in rows]
        values = [complex(float(r["value_re"]), float(r["value_im"])) for r in rows]
    except (OSError, ValueError) as e:
        raise ValidationError(f"cannot read table {path}: {e}") from e
    return ps, values


def write_json(record: ExperimentRecord, output_dir: Path, stem: str) -> Path:
    """Write `<stem>.json` under output_dir, creating it if needed"""

    output_dir = Path(output_dir)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"output directory {output_dir} is not writable: {e}") from e

    json_path = output_dir / f"{stem}.json"
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(record.to_dict(), f, indent=2)
    return json_path


def write_record(record: ExperimentRecord, output_dir: Path, stem: str) -> tuple[Path, Path]:
    """
    Write `<stem>.json` and `<stem>.csv` under output_dir.

    Returns:
        (json_path, csv_path)
    """

    json_path = write_json(record, output_dir, stem)
    csv_path = write_csv(record.rows, Path(output_dir) / f"{stem}.csv")

    logger.info(f"Saved {json_path} and {csv_path}")
    return json_path, csv_path


def _read_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"cannot read record {path}: {e}") from e


def load_record(path: Path) -> ExperimentRecord:
    """
    Raises:
        SchemaMismatch: the file is not an isoq-result-v1 record
    """

    data = _read_json(path)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(f"{path}: schema {data.get('schema_version')!r}, expected {SCHEMA_VERSION!r}")
    return ExperimentRecord.from_dict(data)


# =========================================================================
# Golden comparison
# =========================================================================


@dataclass
class GoldenResult:
    """Outcome of comparing a record against a stored golden"""

    passed: bool
    compared: int
    divergent_field: Optional[str] = None
    result_value: Any = None
    golden_value: Any = None
    tolerance: Optional[float] = None
    divergences: list[str] = field(default_factory=list)

    def describe(self) -> str:
        if self.passed:
            return f"match ({self.compared} fields compared)"
        return (
            f"first divergence at {self.divergent_field}: {self.result_value!r} vs golden "
            f"{self.golden_value!r} (tol {self.tolerance})"
        )


def _leaf(path: str) -> str:
    return path.rsplit(".", 1)[-1].split("[", 1)[0]


def _tolerance(path: str, tolerances: dict[str, float]) -> float:
    if path in tolerances:
        return tolerances[path]
    leaf = _leaf(path)
    return tolerances.get(leaf, tolerances.get("*", DEFAULT_GOLDEN_TOL))


def _as_number(value: Any) -> Optional[complex]:
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str) and value.endswith("i"):
        try:
            return parse_complex(value)
        except ValueError:
            return None
    return None


def _close(a: complex, b: complex, tol: float) -> bool:
    if a == b:
        return True
    if any(math.isnan(x) for x in (a.real, a.imag, b.real, b.imag)):
        return all(math.isnan(x) == math.isnan(y) for x, y in ((a.real, b.real), (a.imag, b.imag)))
    return abs(a - b) <= tol * max(abs(a), abs(b))


def _walk(result: Any, golden: Any, path: str, tolerances: dict, out: list, counter: list) -> None:
    if _leaf(path) in VOLATILE_FIELDS:
        return

    if isinstance(golden, dict) and isinstance(result, dict):
        for key in sorted(set(golden) | set(result)):
            sub = f"{path}.{key}" if path else str(key)
            if key not in golden or key not in result:
                if _leaf(sub) not in VOLATILE_FIELDS:
                    out.append((sub, result.get(key), golden.get(key), None))
                continue
            _walk(result[key], golden[key], sub, tolerances, out, counter)
        return

    if isinstance(golden, list) and isinstance(result, list):
        if len(golden) != len(result):
            out.append((f"{path}.length", len(result), len(golden), None))
            return
        for i, (r, g) in enumerate(zip(result, golden)):
            _walk(r, g, f"{path}[{i}]", tolerances, out, counter)
        return

    counter[0] += 1
    a, b = _as_number(result), _as_number(golden)
    if a is not None and b is not None:
        tol = _tolerance(path, tolerances)
        if not _close(a, b, tol):
            out.append((path, result, golden, tol))
    elif result != golden:
        out.append((path, result, golden, None))


def golden_check(
    result_path: Path,
    golden_path: Path,
    tolerances: Optional[dict[str, float]] = None,
) -> GoldenResult:
    """
    Field-wise comparison of two result records.

    Tolerances are relative and keyed by dotted path
    ("report.fitted.coefficients[0]"), by leaf name ("relative_error_b0"),
    by "b0" for the fitted leading coefficient, or by "*". Unlisted
    numeric fields must match exactly. Timing and output paths are ignored.

    Raises:
        SchemaMismatch: the two files carry different schema versions
    """

    result = _read_json(result_path)
    golden = _read_json(golden_path)
    if result.get("schema_version") != golden.get("schema_version"):
        raise SchemaMismatch(
            f"result schema {result.get('schema_version')!r} vs golden {golden.get('schema_version')!r}"
        )

    resolved = {FIELD_ALIASES.get(k, k): v for k, v in (tolerances or {}).items()}
    divergences: list[tuple] = []
    counter = [0]
    _walk(result, golden, "", resolved, divergences, counter)

    if not divergences:
        return GoldenResult(passed=True, compared=counter[0])

    path, r, g, tol = divergences[0]
    logger.warning(f"golden divergence at {path}: {r!r} vs {g!r} ({len(divergences)} fields differ)")
    return GoldenResult(
        passed=False,
        compared=counter[0],
        divergent_field=path,
        result_value=r,
        golden_value=g,
        tolerance=tol,
        divergences=[d[0] for d in divergences],
    )

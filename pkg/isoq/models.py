"""
Shared data models for experiments and result records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

SCHEMA_VERSION = "isoq-result-v1"


def format_complex(z: complex) -> str:
    """Serialize a complex number as 're+imi' with round-trip precision"""

    z = complex(z)
    imag = repr(z.imag)
    sign = "" if imag.startswith("-") else "+"
    return f"{z.real!r}{sign}{imag}i"


def parse_complex(text: str) -> complex:
    """
    Parse 're+imi', a bare real, or a bare imaginary such as 'i', '-2i', '1+i'.

    Raises:
        ValueError: if the text is not a complex literal
    """

    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    if s[-1] not in "ij":
        return complex(float(s), 0.0)
    s = s[:-1] + "j"
    # bare unit imaginary: 'j', '+j', '1-j'
    if s == "j" or s[-2] in "+-":
        s = s[:-1] + "1j"
    return complex(s)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on a finite interval"""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    interval: tuple[float, float]

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]

    def integrate(self, values: np.ndarray) -> Any:
        """Apply the rule to sampled values (last axis indexes nodes)"""
        return np.asarray(values) @ self.weights


@dataclass
class AsymptoticFit:
    """Least-squares fit of values ~ p^exponent * sum_r b_r p^-r"""

    exponent: float
    coefficients: list[complex]
    residual_norm: float
    p_values: list[int]

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def b0(self) -> complex:
        return self.coefficients[0]

    def evaluate(self, p: float) -> complex:
        return p ** self.exponent * sum(b * p ** (-r) for r, b in enumerate(self.coefficients))

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "coefficients": [format_complex(b) for b in self.coefficients],
            "residual_norm": self.residual_norm,
            "p_values": list(self.p_values),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AsymptoticFit":
        return cls(
            exponent=data["exponent"],
            coefficients=[parse_complex(b) for b in data["coefficients"]],
            residual_norm=data["residual_norm"],
            p_values=list(data["p_values"]),
        )


@dataclass
class PointRecord:
    """One row of a p-sweep: raw value, corrected value and its certificate"""

    p: int
    value: complex
    corrected: complex
    nodes_used: int = 0
    certificate_delta: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def phase(self) -> float:
        return math.atan2(self.value.imag, self.value.real)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "value": format_complex(self.value),
            "corrected": format_complex(self.corrected),
            "nodes_used": self.nodes_used,
            "certificate_delta": self.certificate_delta,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PointRecord":
        return cls(
            p=data["p"],
            value=parse_complex(data["value"]),
            corrected=parse_complex(data["corrected"]),
            nodes_used=data.get("nodes_used", 0),
            certificate_delta=data.get("certificate_delta"),
            extra=data.get("extra", {}),
        )

    def csv_row(self) -> dict:
        return {
            "p": self.p,
            "value_re": repr(self.value.real),
            "value_im": repr(self.value.imag),
            "value_abs": repr(abs(self.value)),
            "phase": repr(self.phase),
            "nodes_used": self.nodes_used,
            "certificate_delta": "" if self.certificate_delta is None else repr(self.certificate_delta),
        }


@dataclass
class ComparisonReport:
    """Fitted expansion of a p-sweep compared against the leading-term predictor"""

    scenario: str
    geometry: str
    fitted: Optional[AsymptoticFit]
    predicted_b0: complex
    relative_error_b0: float
    expected_exponent: float
    exponent_estimate: float
    rows: list[PointRecord]
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def exponent_error(self) -> float:
        return abs(self.exponent_estimate - self.expected_exponent)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def max_certificate_delta(self) -> Optional[float]:
        deltas = [r.certificate_delta for r in self.rows if r.certificate_delta is not None]
        return max(deltas) if deltas else None

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "geometry": self.geometry,
            "fitted": self.fitted.to_dict() if self.fitted else None,
            "predicted_b0": format_complex(self.predicted_b0),
            "relative_error_b0": self.relative_error_b0,
            "expected_exponent": self.expected_exponent,
            "exponent_estimate": self.exponent_estimate,
            "exponent_error": self.exponent_error,
            "rows": [r.to_dict() for r in self.rows],
            "checks": self.checks,
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ComparisonReport":
        fitted = data.get("fitted")
        return cls(
            scenario=data["scenario"],
            geometry=data["geometry"],
            fitted=AsymptoticFit.from_dict(fitted) if fitted else None,
            predicted_b0=parse_complex(data["predicted_b0"]),
            relative_error_b0=data["relative_error_b0"],
            expected_exponent=data["expected_exponent"],
            exponent_estimate=data["exponent_estimate"],
            rows=[PointRecord.from_dict(r) for r in data.get("rows", [])],
            checks=data.get("checks", {}),
            details=data.get("details", {}),
        )


@dataclass
class ExperimentRecord:
    """Versioned JSON record of one experiment run"""

    name: str
    config: dict
    report: Optional[ComparisonReport] = None
    payload: dict = field(default_factory=dict)
    conventions: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    wall_clock_s: float = 0.0
    started_at: Optional[str] = None
    completed_at: Optional[str] = None
    version: str = ""
    schema_version: str = SCHEMA_VERSION

    @property
    def rows(self) -> list[PointRecord]:
        return self.report.rows if self.report else []

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "name": self.name,
            "config": self.config,
            "report": self.report.to_dict() if self.report else None,
            "payload": self.payload,
            "conventions": self.conventions,
            "certificates": self.certificates,
            "wall_clock_s": self.wall_clock_s,
            "started_at": self.started_at,
            "completed_at": self.completed_at,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentRecord":
        report = data.get("report")
        return cls(
            name=data["name"],
            config=data.get("config", {}),
            report=ComparisonReport.from_dict(report) if report else None,
            payload=data.get("payload", {}),
            conventions=data.get("conventions", {}),
            certificates=data.get("certificates", {}),
            wall_clock_s=data.get("wall_clock_s", 0.0),
            started_at=data.get("started_at"),
            completed_at=data.get("completed_at"),
            version=data.get("version", ""),
            schema_version=data.get("schema_version", ""),
        )


@dataclass
class SuiteResult:
    """Result of running every configured preset"""

    records: list[ExperimentRecord]
    started_at: str
    completed_at: str
    config: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "started_at": self.started_at,
            "completed_at": self.completed_at,
            "config": self.config,
            "failures": self.failures,
        }

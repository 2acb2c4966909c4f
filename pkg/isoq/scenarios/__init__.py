"""
Experiment scenarios.
"""

from ..errors import UnknownScenario
from .base import BaseScenario, Scenario
from .intersection.circle_pair import EmptyIntersectScenario, IntersectScenario, OverlapScenario
from .intersection.geodesic_pair import GeodesicIntersectScenario
from .norm.curve_norm import CurveNormScenario
from .norm.poincare_norm import PoincareNormScenario
from .norm.toeplitz_norm import ToeplitzNormScenario

# Organized by the quantity being expanded
SCENARIOS = {
    "norm": [
        CurveNormScenario,
        ToeplitzNormScenario,
        PoincareNormScenario,
    ],
    "intersection": [
        IntersectScenario,
        OverlapScenario,
        EmptyIntersectScenario,
        GeodesicIntersectScenario,
    ],
}

# Flat list of all scenarios
ALL_SCENARIOS = [s for family in SCENARIOS.values() for s in family]

# Name -> class mapping
SCENARIO_MAP = {s.name: s for s in ALL_SCENARIOS}


def get_scenario(name: str) -> type:
    """Get a scenario class by name"""
    if name not in SCENARIO_MAP:
        raise UnknownScenario(f"Unknown scenario: {name}. Available: {list(SCENARIO_MAP.keys())}")
    return SCENARIO_MAP[name]


def list_scenarios() -> list[str]:
    """List all available scenario names"""
    return list(SCENARIO_MAP.keys())


__all__ = [
    "Scenario",
    "BaseScenario",
    "SCENARIOS",
    "ALL_SCENARIOS",
    "SCENARIO_MAP",
    "get_scenario",
    "list_scenarios",
    "CurveNormScenario",
    "ToeplitzNormScenario",
    "PoincareNormScenario",
    "IntersectScenario",
    "OverlapScenario",
    "EmptyIntersectScenario",
    "GeodesicIntersectScenario",
]

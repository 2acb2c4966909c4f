"""
Intersection scenarios.
"""

from .circle_pair import EmptyIntersectScenario, IntersectScenario, OverlapScenario
from .geodesic_pair import GeodesicIntersectScenario

__all__ = ["IntersectScenario", "OverlapScenario", "EmptyIntersectScenario", "GeodesicIntersectScenario"]

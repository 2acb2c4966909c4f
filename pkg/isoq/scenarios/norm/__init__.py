"""
Norm scenarios.
"""

from .curve_norm import CurveNormScenario
from .poincare_norm import PoincareNormScenario
from .toeplitz_norm import ToeplitzNormScenario

__all__ = ["CurveNormScenario", "ToeplitzNormScenario", "PoincareNormScenario"]

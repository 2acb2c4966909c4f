"""
Exception hierarchy.

Two families: ValidationError (bad input, exit code 2) and ConvergenceError
(a numerical certificate failed, exit code 3).
"""


class IsoqError(Exception):
    """Base class for all isoq errors"""

    exit_code: int = 1


class ValidationError(IsoqError):
    """Raised when an input violates a precondition"""

    exit_code = 2


class ConvergenceError(IsoqError):
    """Raised when a numerical certificate fails"""

    exit_code = 3


# =========================================================================
# Validation
# =========================================================================


class NonSymmetric(ValidationError):
    """Matrix is not symmetric within tolerance"""
    pass


class RealPartNotPositiveDefinite(ValidationError):
    """Real part of a Gaussian matrix is not positive definite"""
    pass


class ANotPositiveDefinite(ValidationError):
    """Starting point of a branch path is not positive definite"""
    pass


class BadNodeCount(ValidationError):
    """Quadrature rule requested with too few nodes or a bad interval"""
    pass


class InsufficientSamples(ValidationError):
    """Not enough p values for the requested fit"""
    pass


class ZeroValue(ValidationError):
    """A value that must be nonzero vanished"""
    pass


class DimensionMismatch(ValidationError):
    """Vector or frame dimensions disagree"""
    pass


class NotIsotropic(ValidationError):
    """Frame vectors are not orthonormal and Omega-isotropic"""
    pass


class NotLagrangian(ValidationError):
    """Frame is isotropic but not of half the ambient dimension"""
    pass


class OverlappingSubspaces(ValidationError):
    """Two subspaces meet in a nonzero vector"""
    pass


class TangentialIntersection(ValidationError):
    """Intersection angle is too close to 0 or pi"""
    pass


class OpenCurve(ValidationError):
    """Curve does not close up over its period"""
    pass


class NotBohrSommerfeldAtLevelP(ValidationError):
    """Holonomy of the curve at level p is not trivial"""
    pass


class TangentCircles(ValidationError):
    """Circles touch tangentially"""
    pass


class GeometryMismatch(ValidationError):
    """States live on different geometries"""
    pass


class PowerMismatch(ValidationError):
    """States have different tensor powers"""
    pass


class NotInUpperHalfPlane(ValidationError):
    """Point has non-positive imaginary part"""
    pass


class NotHyperbolic(ValidationError):
    """Element has |trace| <= 2"""
    pass


class NotElliptic(ValidationError):
    """Element has |trace| >= 2"""
    pass


class NotInteger(ValidationError):
    """Matrix entries are not integers"""
    pass


class WordLengthTooSmall(ValidationError):
    """Coset enumeration depth is negative or too small for the request"""
    pass


class WeightTooSmall(ValidationError):
    """Weight 2p below 4; the series does not converge"""
    pass


class SameAxis(ValidationError):
    """Two geodesics share an axis modulo the group"""
    pass


class SchemaMismatch(ValidationError):
    """Result files carry different schema versions"""
    pass


class PhaseAmbiguity(ValidationError):
    """Oscillating leading terms nearly cancel at a sampled p"""
    pass


class UnknownScenario(ValidationError):
    """Scenario name not in the registry"""
    pass


class ConfigError(ValidationError):
    """Run configuration cannot be parsed or has unknown keys"""
    pass


# =========================================================================
# Convergence
# =========================================================================


class PathDegeneracy(ConvergenceError):
    """Determinant along the branch path came too close to zero"""
    pass


class IllConditioned(ConvergenceError):
    """Fit matrix condition number above threshold"""
    pass


class DomainTooSmall(ConvergenceError):
    """Quadrature domain leaves too much kernel mass outside"""
    pass


class FlatnessViolation(ConvergenceError):
    """Parallel transport disagrees with the closed-form section"""
    pass


class TruncationNotConverged(ConvergenceError):
    """Last coset shell is too large relative to the partial sum"""
    pass


class GridTooCoarse(ConvergenceError):
    """Grid doubling changed the result beyond tolerance"""
    pass


class TruncationSuspect(ConvergenceError):
    """Intersections found close to the truncation boundary"""
    pass


class BranchPathInvalid(ConvergenceError):
    """Predictor matrix does not admit the branch continuation path"""
    pass


class CertificateFailure(ConvergenceError):
    """Node doubling changed a reported value beyond tolerance"""
    pass

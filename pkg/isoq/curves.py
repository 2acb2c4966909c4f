"""
Curves, flat unit sections and isotropic states.

A StateEvaluator is a curve discretized by quadrature nodes together with
the payload zeta^p f at each node; it is evaluated anywhere by a kernel sum.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import GeometryMismatch, OpenCurve, PowerMismatch, ValidationError
from .parallel import fixed_chunks, ordered_map, tree_sum

logger = logging.getLogger(__name__)

CLOSURE_TOL = 1e-12
ODE_RTOL = 1e-13
ODE_ATOL = 1e-14

NODE_CHUNK = 1024
POINT_BLOCK = 1024


# =========================================================================
# Kernel models
# =========================================================================


@dataclass(frozen=True)
class KernelModel:
    """
    A model geometry: closed-form Bergman kernel plus its metric data.

    kernel(p, x, y) broadcasts over leading axes. point_ndim is 1 when
    points are real coordinate vectors and 0 when they are complex numbers.
    """

    name: str
    kernel: Callable[[int, np.ndarray, np.ndarray], np.ndarray]
    point_ndim: int
    det_rl_over_2pi: float = 1.0
    connection: str = ""
    description: str = ""


KERNEL_MODELS: dict[str, KernelModel] = {}


def register_model(model: KernelModel) -> KernelModel:
    """Add a model to the registry"""
    KERNEL_MODELS[model.name] = model
    return model


def get_kernel_model(name: str) -> KernelModel:
    """Get a registered kernel model by name"""

    # geometry modules register their models on import
    from . import bargmann  # noqa: F401
    from .hyperbolic import moebius  # noqa: F401

    if name not in KERNEL_MODELS:
        raise ValidationError(f"Unknown geometry: {name}. Available: {list(KERNEL_MODELS.keys())}")
    return KERNEL_MODELS[name]


# =========================================================================
# Curves
# =========================================================================


@dataclass(frozen=True)
class ParametrizedCurve:
    """Closed curve t -> (u, v) in R^2 with period `period`"""

    period: float
    position: Callable[[np.ndarray], np.ndarray]
    velocity: Callable[[np.ndarray], np.ndarray]
    arclength: bool = False
    name: str = "curve"

    def __post_init__(self):
        if not self.period > 0:
            raise ValidationError(f"period must be positive, got {self.period}")

    def check_closed(self) -> None:
        start = np.asarray(self.position(np.array([0.0])))[0]
        end = np.asarray(self.position(np.array([self.period])))[0]
        gap = float(np.max(np.abs(end - start)))
        if gap > CLOSURE_TOL * max(1.0, float(np.max(np.abs(start)))):
            raise OpenCurve(f"{self.name}: endpoint gap {gap:.3e}")

    def speed(self, t: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.asarray(self.velocity(t)), axis=-1)

    def is_immersed(self, samples: int = 256) -> bool:
        t = np.linspace(0.0, self.period, samples, endpoint=False)
        return bool(np.min(self.speed(t)) > 0)

    def length(self, samples: int = 512) -> float:
        """Arclength by the periodic trapezoid rule"""
        t = np.linspace(0.0, self.period, samples, endpoint=False)
        return float(np.sum(self.speed(t)) * self.period / samples)

    @classmethod
    def circle(cls, center: complex, radius: float) -> "ParametrizedCurve":
        """Counter-clockwise circle parametrized by angle"""

        cu, cv = float(np.real(center)), float(np.imag(center))

        def position(t):
            t = np.asarray(t, dtype=float)
            return np.stack([cu + radius * np.cos(t), cv + radius * np.sin(t)], axis=-1)

        def velocity(t):
            t = np.asarray(t, dtype=float)
            return np.stack([-radius * np.sin(t), radius * np.cos(t)], axis=-1)

        return cls(
            period=2 * np.pi,
            position=position,
            velocity=velocity,
            arclength=bool(abs(radius - 1.0) < 1e-15),
            name=f"circle(c={complex(center)}, r={radius})",
        )

    @classmethod
    def point(cls, center: complex = 0j) -> "ParametrizedCurve":
        """Constant curve; zero area, not immersed"""

        c = np.array([float(np.real(center)), float(np.imag(center))])

        def position(t):
            return np.broadcast_to(c, np.shape(t) + (2,)).copy()

        def velocity(t):
            return np.zeros(np.shape(t) + (2,))

        return cls(period=2 * np.pi, position=position, velocity=velocity, name="point")


def transport_log(
    rate: Callable[[float], complex],
    t_span: tuple[float, float],
    t_eval: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Integrate (log f)' = rate(t) from log f = 0 by DOP853.

    Returns log f at t_eval (or at the end of t_span).
    """

    def rhs(t, y):
        return np.array([rate(t)], dtype=complex)

    sol = solve_ivp(
        rhs,
        t_span,
        np.array([0j]),
        method="DOP853",
        t_eval=t_eval,
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
    )
    if not sol.success:
        raise ValidationError(f"transport ODE failed: {sol.message}")
    return sol.y[0] if t_eval is not None else sol.y[0, -1:]


# =========================================================================
# Bohr-Sommerfeld curves and states
# =========================================================================


@dataclass(frozen=True)
class BohrSommerfeldCurve:
    """Curve with unit flat section values of L^p at its quadrature nodes"""

    curve: ParametrizedCurve
    p: int
    t_nodes: np.ndarray
    section_values: np.ndarray
    holonomy_residual: float
    radius: Optional[float] = None
    center: complex = 0j
    phase_shift: float = 0.0

    def __post_init__(self):
        if len(self.t_nodes) != len(self.section_values):
            raise ValidationError("node and section lengths differ")
        if np.max(np.abs(np.abs(self.section_values) - 1.0)) > 1e-10:
            raise ValidationError("section values are not unit")


@dataclass(frozen=True)
class StateEvaluator:
    """Isotropic state s = sum_i w_i P_p(., node_i) payload_i"""

    p: int
    nodes: np.ndarray
    weights: np.ndarray
    payload: np.ndarray
    model: KernelModel
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.nodes)
        if len(self.weights) != n or len(self.payload) != n:
            raise ValidationError(
                f"nodes/weights/payload lengths differ: {n}, {len(self.weights)}, {len(self.payload)}"
            )

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.weights * self.payload

    def with_payload(self, payload: np.ndarray) -> "StateEvaluator":
        return StateEvaluator(self.p, self.nodes, self.weights, np.asarray(payload, complex), self.model, self.meta)

    def evaluate(self, x: np.ndarray, workers: int = 1) -> np.ndarray | complex:
        """
        Evaluate the state at one or many points.

        Points are blocked, and node chunks within a block are combined by a
        fixed pairwise tree.
        """

        x = np.asarray(x)
        k = self.model.point_ndim
        batch = x.shape[: x.ndim - k]
        flat = x.reshape((-1,) + x.shape[x.ndim - k :])
        amp = self.amplitudes
        node_slices = fixed_chunks(len(self.nodes), NODE_CHUNK)

        def block(sl: slice) -> np.ndarray:
            pts = flat[sl][:, None]
            partials = [
                self.model.kernel(self.p, pts, self.nodes[None, ns]) @ amp[ns] for ns in node_slices
            ]
            return tree_sum(partials)

        blocks = ordered_map(block, fixed_chunks(len(flat), POINT_BLOCK), workers)
        values = np.concatenate(blocks) if blocks else np.zeros(0, complex)
        values = values.reshape(batch)
        return complex(values) if batch == () else values


def check_compatible(s1: StateEvaluator, s2: StateEvaluator) -> None:
    """Raise unless both states share geometry and tensor power"""

    if s1.model.name != s2.model.name:
        raise GeometryMismatch(f"{s1.model.name} vs {s2.model.name}")
    if s1.p != s2.p:
        raise PowerMismatch(f"p = {s1.p} vs p = {s2.p}")

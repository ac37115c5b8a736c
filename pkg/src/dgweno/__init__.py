"""DG solver for hyperbolic conservation laws with sensor-driven artificial viscosity."""

from .dg import DGOperator, StateField, reference_element
from .harness import RunConfig, RunReport, compare_sensors, convergence_study, run_simulation
from .laws import Burgers, Euler, KPP, InvalidStateError, LinearAdvection
from .mesh import build_structured_mesh
from .problems import get_benchmark
from .sensor import SensorConfig, WenoSensor
from .stabilization import SemiDiscreteScheme

__all__ = [
    "Burgers", "DGOperator", "Euler", "InvalidStateError", "KPP", "LinearAdvection",
    "RunConfig", "RunReport", "SemiDiscreteScheme", "SensorConfig", "StateField", "WenoSensor",
    "build_structured_mesh", "compare_sensors", "convergence_study", "get_benchmark",
    "reference_element", "run_simulation",
]

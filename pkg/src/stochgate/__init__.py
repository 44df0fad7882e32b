"""Store a qubit z-rotation in equatorial program qubits and retrieve it stochastically."""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConsistencyError,
    DomainError,
    PreconditionError,
    StochGateError,
    ValidationError,
)
from .statevec import StateVector
from .protocol import (
    AdaptiveRunStats,
    CascadeOutcome,
    ProgramRegister,
    cascade,
    classify_and_collapse,
    encode_program,
    equatorial_state,
    rotation_z,
    run_adaptive,
    run_once,
    twirl_program,
)

__all__ = [
    "AdaptiveRunStats",
    "CapacityError",
    "CascadeOutcome",
    "ConsistencyError",
    "DomainError",
    "PreconditionError",
    "ProgramRegister",
    "StateVector",
    "StochGateError",
    "ValidationError",
    "cascade",
    "classify_and_collapse",
    "encode_program",
    "equatorial_state",
    "rotation_z",
    "run_adaptive",
    "run_once",
    "twirl_program",
]

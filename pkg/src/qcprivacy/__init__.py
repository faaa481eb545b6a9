"""Simulation and privacy analysis of two-party quantum communication protocols."""

__version__ = "0.1.0"

from .linalg import (  # noqa: E402
    CqState,
    DensityMatrix,
    PureState,
    RegisterLayout,
    WidthCapError,
    conditional_mutual_information,
    entropy,
    mutual_information,
    partial_trace,
    trace_distance,
    von_neumann_entropy,
)
from .protocol import (  # noqa: E402
    ClassicalInputs,
    Protocol,
    Purified,
    PurifiedTraced,
    Round,
    SuperposedA,
    SuperposedB,
    round_state,
    run_honest,
    verify_honest_execution,
)
from .privacy import ordering_check, privacy_loss, quantum_ic, superposed_ic  # noqa: E402

__all__ = [
    "ClassicalInputs",
    "CqState",
    "DensityMatrix",
    "Protocol",
    "PureState",
    "Purified",
    "PurifiedTraced",
    "RegisterLayout",
    "Round",
    "SuperposedA",
    "SuperposedB",
    "WidthCapError",
    "conditional_mutual_information",
    "entropy",
    "mutual_information",
    "ordering_check",
    "partial_trace",
    "privacy_loss",
    "quantum_ic",
    "round_state",
    "run_honest",
    "superposed_ic",
    "trace_distance",
    "verify_honest_execution",
    "von_neumann_entropy",
]

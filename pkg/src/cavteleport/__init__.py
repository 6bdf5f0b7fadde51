"""Controlled teleportation of an arbitrary two-atom entangled state in
driven cavity QED: a dense state-vector engine, the closed-form pairwise
cavity maps with their full-model validation counterpart, the complete
classical-correction logic, and numerical experiment drivers.
"""

from ._kernels import backend_name
from .corrections import (
    CorrectionRule,
    CorrectionTable,
    apply_correction,
    compare_tables,
    derive_table,
    load_published_table,
)
from .dynamics import (
    DEFAULT_SCHEDULE,
    FockConfig,
    InteractionSchedule,
    PhysicalParams,
    drive_hamiltonian,
    effective_hamiltonian,
    effective_pair_map_closed_form,
    full_model_map,
    propagator,
    two_cavity_step,
)
from .protocol import (
    BranchRecord,
    ClassicalMessage,
    InputState,
    ProtocolLayout,
    charlie_step,
    enumerate_all_branches,
    prepare_epr_channel,
    prepare_ghz_channel,
    prepare_input,
    run_teleportation,
)
from .statevec import (
    DensityMatrix,
    LocalOperator,
    StateVector,
    SubsystemLayout,
    apply,
    branch_enumerate,
    fidelity,
    measure,
    partial_trace,
    reduced_fidelity,
    tensor,
)
from .validation import (
    FeasibilityReport,
    SweepResult,
    check_published_branches,
    effective_vs_full_sweep,
    feasibility_check,
    success_statistics,
    thermal_insensitivity_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BranchRecord",
    "ClassicalMessage",
    "CorrectionRule",
    "CorrectionTable",
    "DEFAULT_SCHEDULE",
    "DensityMatrix",
    "FeasibilityReport",
    "FockConfig",
    "InputState",
    "InteractionSchedule",
    "LocalOperator",
    "PhysicalParams",
    "ProtocolLayout",
    "StateVector",
    "SubsystemLayout",
    "SweepResult",
    "apply",
    "apply_correction",
    "backend_name",
    "branch_enumerate",
    "charlie_step",
    "check_published_branches",
    "compare_tables",
    "derive_table",
    "drive_hamiltonian",
    "effective_hamiltonian",
    "effective_pair_map_closed_form",
    "effective_vs_full_sweep",
    "enumerate_all_branches",
    "feasibility_check",
    "fidelity",
    "full_model_map",
    "load_published_table",
    "measure",
    "partial_trace",
    "prepare_epr_channel",
    "prepare_ghz_channel",
    "prepare_input",
    "propagator",
    "reduced_fidelity",
    "run_teleportation",
    "success_statistics",
    "tensor",
    "thermal_insensitivity_sweep",
    "two_cavity_step",
]

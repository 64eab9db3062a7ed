"""Composite-Hilbert-space engine shared by all pipeline modules."""

from .registry import (
    Mode,
    ModeRegistry,
    RegistryError,
    fock,
    fock_registry,
    log2_ceil,
    qubit,
    qubit_registry,
)
from .states import (
    DENSE_LIMIT,
    QuantumState,
    StateError,
    build_state,
    product_state,
)
from .gates import (
    CNOT,
    CZ,
    H,
    MeasurementError,
    UnitaryOp,
    X,
    Y,
    Z,
    apply,
    apply_matrix,
    cnot,
    cz,
    enumerate_measure,
    hadamard,
    measure,
    pauli_x,
    pauli_z,
    qft_matrix,
    qft_unitary,
)
from .optics import (
    TruncationLeakageError,
    apply_linear_optics,
    beam_splitter,
    coherent_amplitudes,
    coherent_state,
    linear_optics_matrix,
    loss_mixer,
    lossy_detector,
    min_coherent_cutoff,
)
from .support import SupportState

__all__ = [
    "Mode",
    "ModeRegistry",
    "RegistryError",
    "fock",
    "fock_registry",
    "log2_ceil",
    "qubit",
    "qubit_registry",
    "DENSE_LIMIT",
    "QuantumState",
    "StateError",
    "build_state",
    "product_state",
    "CNOT",
    "CZ",
    "H",
    "MeasurementError",
    "UnitaryOp",
    "X",
    "Y",
    "Z",
    "apply",
    "apply_matrix",
    "cnot",
    "cz",
    "enumerate_measure",
    "hadamard",
    "measure",
    "pauli_x",
    "pauli_z",
    "qft_matrix",
    "qft_unitary",
    "TruncationLeakageError",
    "apply_linear_optics",
    "beam_splitter",
    "coherent_amplitudes",
    "coherent_state",
    "linear_optics_matrix",
    "loss_mixer",
    "lossy_detector",
    "min_coherent_cutoff",
    "SupportState",
]

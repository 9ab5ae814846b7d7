"""One-way information (OWI) carried by unitary channels between quantum and classical systems."""

from .bases import Basis, computational_basis, copy_basis_for, fourier_basis
from .classical import ClassicalDist, ClassicalGate, quantum_classical_owi, run_classical_protocol
from .entropy import EntropyTable, conditional_mutual_information, mutual_information, von_neumann_entropy
from .errors import (
    CapacityError,
    IntegrityError,
    InvalidOperatorError,
    InvalidStateError,
    OnewayError,
    RegisterError,
    SpecError,
)
from .gates import ChannelSpec, GateApplication, ccnot, cnot, cshift, custom, local, swap
from .protocol import (
    CLASSICAL,
    QUANTUM,
    QUANTUM_PROJECT,
    CausalMatrix,
    Experiment,
    FinalState,
    ProtocolConfig,
    Query,
    QueryResult,
    causal_matrix,
    conditional_owi,
    owi,
    prepare,
    run_protocol,
)
from .specfile import ProcessSpec, parse, serialize
from .tensor import DensityOperator, PureState, Register, Subsystem, ket, partial_trace, tensor

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "computational_basis",
    "copy_basis_for",
    "fourier_basis",
    "ClassicalDist",
    "ClassicalGate",
    "quantum_classical_owi",
    "run_classical_protocol",
    "EntropyTable",
    "conditional_mutual_information",
    "mutual_information",
    "von_neumann_entropy",
    "CapacityError",
    "IntegrityError",
    "InvalidOperatorError",
    "InvalidStateError",
    "OnewayError",
    "RegisterError",
    "SpecError",
    "ChannelSpec",
    "GateApplication",
    "ccnot",
    "cnot",
    "cshift",
    "custom",
    "local",
    "swap",
    "CLASSICAL",
    "QUANTUM",
    "QUANTUM_PROJECT",
    "CausalMatrix",
    "Experiment",
    "FinalState",
    "ProtocolConfig",
    "Query",
    "QueryResult",
    "causal_matrix",
    "conditional_owi",
    "owi",
    "prepare",
    "run_protocol",
    "ProcessSpec",
    "parse",
    "serialize",
    "DensityOperator",
    "PureState",
    "Register",
    "Subsystem",
    "ket",
    "partial_trace",
    "tensor",
]

"""Hamiltonian and circuit parsing, Trotter steps and pi/8 rotation compilation."""

from .gates import Gate, GateCircuit, parse_circuit, parse_circuit_text, pauli_exponential, trotter_step_circuit
from .pauli import Pauli, PauliTerm, merge_terms, one_norm, parse_hamiltonian, parse_hamiltonian_text
from .tableau import CliffordFrame
from .transpile import Rotation, RotationSequence, synthesis_t_count, t_count, transpile

__all__ = [
    "Gate", "GateCircuit", "parse_circuit", "parse_circuit_text", "pauli_exponential",
    "trotter_step_circuit", "Pauli", "PauliTerm", "merge_terms", "one_norm", "parse_hamiltonian",
    "parse_hamiltonian_text", "CliffordFrame", "Rotation", "RotationSequence", "synthesis_t_count",
    "t_count", "transpile",
]

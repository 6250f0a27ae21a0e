from .builder import CircuitBuilder, RateOverrides
from .circuit import Instruction, StabCircuit
from .layout import Check, SurfaceCodePatch, rectangle_checks
from .memory import build_memory_circuit
from .teleport import TeleportSpec, apply_cuts, build_teleport_circuit

__all__ = [
    "CircuitBuilder", "RateOverrides", "Instruction", "StabCircuit", "Check",
    "SurfaceCodePatch", "rectangle_checks", "build_memory_circuit", "TeleportSpec",
    "apply_cuts", "build_teleport_circuit",
]

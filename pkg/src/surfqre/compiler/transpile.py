"""Commuting Clifford gates to the end of a circuit, leaving pi/8 Pauli rotations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

from ..errors import ValidationError
from .gates import CLIFFORD, Gate, GateCircuit
from .pauli import Pauli
from .tableau import CliffordFrame

PI8 = math.pi / 8
_ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class Rotation:
    """exp(-i angle P) with P a positive Pauli word; ``kind`` is pi8 or arbitrary."""

    axis: Pauli
    angle: float
    kind: str = "pi8"

    def label(self) -> str:
        return f"{self.axis.label()}({self.angle:+.12g})"


@dataclass
class RotationSequence:
    """Rotations in application order followed by the Clifford ``frame``."""

    num_qubits: int
    rotations: List[Rotation] = field(default_factory=list)
    frame: Optional[CliffordFrame] = None

    def __post_init__(self) -> None:
        if self.frame is None:
            self.frame = CliffordFrame(self.num_qubits)

    @property
    def pi8_count(self) -> int:
        return sum(r.kind == "pi8" for r in self.rotations)

    @property
    def arbitrary_count(self) -> int:
        return sum(r.kind == "arbitrary" for r in self.rotations)

    def to_text(self) -> str:
        lines = [f"qubits {self.num_qubits}"]
        lines += [f"{r.kind} {r.label()}" for r in self.rotations]
        lines += ["frame " + " ".join(p.label() for p in self.frame.images)]
        return "\n".join(lines) + "\n"


def _positive(p: Pauli, angle: float):
    return (p, angle) if p.sign > 0 else (p.negate(), -angle)


def _push(seq: RotationSequence, axis: Pauli, angle: float, kind: str, merge: bool) -> None:
    axis, angle = _positive(axis, angle)
    if merge and kind == "pi8":
        for j in range(len(seq.rotations) - 1, -1, -1):
            r = seq.rotations[j]
            if r.axis.same_axis(axis):
                if r.kind != "pi8":
                    continue
                total = r.angle + angle
                del seq.rotations[j]
                if abs(total) > _ANGLE_TOL:
                    # two equal pi/8 turns make a Clifford quarter turn; it commutes
                    # with everything after position j, so it joins the frame
                    seq.frame.absorb_quarter_turn(axis, 1 if total > 0 else -1)
                return
            if not r.axis.commutes(axis):
                break
    seq.rotations.append(Rotation(axis, angle, kind))


def _s_power(q: int, k: int) -> List[Gate]:
    return {0: [], 1: [Gate("s", (q,))], 2: [Gate("z", (q,))], 3: [Gate("sdg", (q,))]}[k % 4]


def transpile(circuit: GateCircuit, arbitrary: str = "error", merge: bool = True) -> RotationSequence:
    """Rotation form of a Clifford+T circuit.

    ``rz(theta)`` is exp(-i theta Z/2); angles that are multiples of pi/4 are
    split into Clifford and pi/8 parts.  Other angles raise unless
    ``arbitrary="keep"``, which carries them as arbitrary rotations.
    """
    if arbitrary not in ("error", "keep"):
        raise ValidationError("arbitrary must be 'error' or 'keep'")
    n = circuit.num_qubits
    seq = RotationSequence(n)
    for g in circuit.gates:
        if g.name in CLIFFORD:
            seq.frame.apply_gate(g)
            continue
        q = g.qubits[0]
        axis = seq.frame.conjugate(Pauli.single(n, q, "Z"))
        if g.name in ("t", "tdg"):
            _push(seq, axis, PI8 if g.name == "t" else -PI8, "pi8", merge)
            continue
        phi = 0.5 * g.angle
        k = phi / PI8
        kr = round(k)
        if abs(k - kr) > _ANGLE_TOL * max(1.0, abs(k)):
            if arbitrary == "error":
                raise ValidationError(f"rz({g.angle}) is not a multiple of pi/4; cost it via synthesis")
            _push(seq, axis, phi, "arbitrary", merge)
            continue
        kr = int(kr) % 16
        if kr % 2 == 0:
            for c in _s_power(q, kr // 2):
                seq.frame.apply_gate(c)
        else:
            s = 1 if kr % 4 == 1 else -1
            for c in _s_power(q, (kr - s) // 2):
                seq.frame.apply_gate(c)
            axis = seq.frame.conjugate(Pauli.single(n, q, "Z"))
            _push(seq, axis, s * PI8, "pi8", merge)
    return seq


def synthesis_t_count(delta: float) -> int:
    """T gates to approximate one arbitrary rotation to precision delta."""
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    x = 4.0 * math.log2(1.0 / delta)
    return int(math.ceil(x - 1e-9 * max(1.0, x)))


def t_count(seq: RotationSequence, delta: Optional[float] = None) -> int:
    arb = seq.arbitrary_count
    if arb and delta is None:
        raise ValidationError("delta is required to cost arbitrary rotations")
    return seq.pi8_count + (arb * synthesis_t_count(delta) if arb else 0)

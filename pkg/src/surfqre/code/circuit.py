"""Noisy stabilizer circuit representation and its line-oriented text format.

Text format (one statement per line, ``#`` starts a comment)::

    QUBIT <index> <x> <y>
    R <q>...                  reset / prepare |0>
    M <q>...                  Z-basis measurement, appends one record per target
    H <q>...
    CX <c> <t> [<c> <t>]...
    X_ERROR(<p>) <q>...       X flip before a measurement or after a reset
    DEPOLARIZE1(<p>) <q>...
    DEPOLARIZE2(<p>) <a> <b> [<a> <b>]...
    TICK                      end of a time layer
    DETECTOR <m>...           parity of absolute measurement indices
    OBSERVABLE <k> <m>...     logical observable k

Noise lines hold one rate; a noise instruction with per-target rates is
written as several consecutive lines.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import ValidationError

GATES = ("R", "M", "H", "CX", "TICK")
NOISE = ("X_ERROR", "DEPOLARIZE1", "DEPOLARIZE2")
ARITY = {"R": 1, "M": 1, "H": 1, "CX": 2, "TICK": 1,
         "X_ERROR": 1, "DEPOLARIZE1": 1, "DEPOLARIZE2": 2}


@dataclass(frozen=True)
class Instruction:
    name: str
    targets: Tuple[int, ...]
    probs: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.name not in ARITY:
            raise ValidationError(f"unknown instruction {self.name!r}")
        k = ARITY[self.name]
        if len(self.targets) % k:
            raise ValidationError(f"{self.name} needs targets in groups of {k}")
        if self.name in NOISE:
            if len(self.probs) != len(self.targets) // k:
                raise ValidationError(f"{self.name}: one probability per target group required")
            for p in self.probs:
                if not 0.0 <= p <= 1.0:
                    raise ValidationError(f"{self.name}: probability {p} out of range")
        elif self.probs:
            raise ValidationError(f"{self.name} takes no probability")

    @property
    def groups(self) -> List[Tuple[int, ...]]:
        k = ARITY[self.name]
        return [self.targets[i:i + k] for i in range(0, len(self.targets), k)]

    @property
    def is_noise(self) -> bool:
        return self.name in NOISE


@dataclass(frozen=True)
class StabCircuit:
    num_qubits: int
    instructions: Tuple[Instruction, ...]
    detectors: Tuple[Tuple[int, ...], ...]
    observables: Tuple[Tuple[int, ...], ...]
    qubit_coords: Tuple[Tuple[float, float], ...] = ()
    detector_coords: Tuple[Tuple[float, float, float], ...] = ()
    detector_basis: Tuple[str, ...] = ()
    _cache: Dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    @property
    def num_measurements(self) -> int:
        return sum(len(ins.targets) for ins in self.instructions if ins.name == "M")

    @property
    def num_detectors(self) -> int:
        return len(self.detectors)

    @property
    def num_observables(self) -> int:
        return len(self.observables)

    def used_qubits(self) -> set:
        used = set()
        for ins in self.instructions:
            if ins.name != "TICK":
                used.update(ins.targets)
        return used

    def noise_instructions(self) -> List[Tuple[int, Instruction]]:
        return [(k, ins) for k, ins in enumerate(self.instructions) if ins.is_noise]

    def without_noise(self) -> "StabCircuit":
        return StabCircuit(self.num_qubits,
                           tuple(i for i in self.instructions if not i.is_noise),
                           self.detectors, self.observables, self.qubit_coords,
                           self.detector_coords, self.detector_basis)

    def with_zero_noise(self) -> "StabCircuit":
        ins = tuple(Instruction(i.name, i.targets, tuple(0.0 for _ in i.probs)) if i.is_noise else i
                    for i in self.instructions)
        return self.replace_instructions(ins)

    def replace_instructions(self, instructions: Sequence[Instruction]) -> "StabCircuit":
        return StabCircuit(self.num_qubits, tuple(instructions), self.detectors,
                           self.observables, self.qubit_coords, self.detector_coords,
                           self.detector_basis)

    def structure_key(self) -> str:
        """Digest of everything except noise rates (zero-rate groups included)."""
        key = self._cache.get("structure_key")
        if key is None:
            h = hashlib.sha256()
            h.update(str(self.num_qubits).encode())
            for ins in self.instructions:
                h.update(ins.name.encode())
                h.update(repr(ins.targets).encode())
            h.update(repr(self.detectors).encode())
            h.update(repr(self.observables).encode())
            key = h.hexdigest()
            self._cache["structure_key"] = key
        return key

    def validate_layers(self) -> None:
        """Check that gates within each TICK-delimited layer act on disjoint qubits."""
        seen: set = set()
        for ins in self.instructions:
            if ins.name == "TICK":
                seen = set()
                continue
            if ins.is_noise:
                continue
            for q in ins.targets:
                if q in seen:
                    raise ValidationError(f"qubit {q} used twice in one layer")
                seen.add(q)

    # --- text format -----------------------------------------------------

    def to_text(self) -> str:
        lines = ["# surfqre stab circuit v1"]
        for q, (x, y) in enumerate(self.qubit_coords):
            lines.append(f"QUBIT {q} {x:g} {y:g}")
        if not self.qubit_coords:
            lines.append(f"QUBITS {self.num_qubits}")
        for ins in self.instructions:
            if ins.name == "TICK":
                lines.append("TICK")
            elif ins.is_noise:
                groups = ins.groups
                start = 0
                while start < len(groups):
                    end = start
                    while end + 1 < len(groups) and ins.probs[end + 1] == ins.probs[start]:
                        end += 1
                    flat = [t for g in groups[start:end + 1] for t in g]
                    lines.append(f"{ins.name}({ins.probs[start]!r}) " + " ".join(map(str, flat)))
                    start = end + 1
            else:
                lines.append(ins.name + " " + " ".join(map(str, ins.targets)))
        for det in self.detectors:
            lines.append("DETECTOR " + " ".join(map(str, det)))
        for k, obs in enumerate(self.observables):
            lines.append(f"OBSERVABLE {k} " + " ".join(map(str, obs)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "StabCircuit":
        coords: Dict[int, Tuple[float, float]] = {}
        num_qubits = 0
        instructions: List[Instruction] = []
        detectors: List[Tuple[int, ...]] = []
        observables: Dict[int, Tuple[int, ...]] = {}
        pat = re.compile(r"^([A-Z_0-9]+)(?:\(([^)]*)\))?$")
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, *rest = line.split()
            m = pat.match(head)
            if m is None:
                raise ValidationError(f"line {lineno}: cannot parse {head!r}")
            name, arg = m.group(1), m.group(2)
            try:
                nums = [int(t) for t in rest] if name != "QUBIT" else None
                if name == "QUBIT":
                    q, x, y = int(rest[0]), float(rest[1]), float(rest[2])
                    coords[q] = (x, y)
                    num_qubits = max(num_qubits, q + 1)
                elif name == "QUBITS":
                    num_qubits = max(num_qubits, nums[0])
                elif name == "DETECTOR":
                    detectors.append(tuple(nums))
                elif name == "OBSERVABLE":
                    observables[nums[0]] = tuple(nums[1:])
                elif name in NOISE:
                    p = float(arg)
                    n_groups = len(nums) // ARITY[name]
                    instructions.append(Instruction(name, tuple(nums), (p,) * n_groups))
                else:
                    instructions.append(Instruction(name, tuple(nums)))
                if nums:
                    num_qubits = max(num_qubits, *(n + 1 for n in nums)) if name in ARITY else num_qubits
            except (IndexError, ValueError, TypeError) as exc:
                raise ValidationError(f"line {lineno}: {exc}") from exc
        obs = tuple(observables[k] for k in sorted(observables))
        qc = tuple(coords[q] for q in range(num_qubits)) if len(coords) == num_qubits and coords else ()
        return cls(num_qubits, tuple(_merge_noise_runs(instructions)), tuple(detectors), obs, qc)


def _merge_noise_runs(instructions: List[Instruction]) -> List[Instruction]:
    """Re-join consecutive noise lines of one kind that were split by rate."""
    out: List[Instruction] = []
    for ins in instructions:
        prev: Optional[Instruction] = out[-1] if out else None
        if (prev is not None and ins.is_noise and prev.name == ins.name
                and not set(prev.targets) & set(ins.targets)):
            out[-1] = Instruction(ins.name, prev.targets + ins.targets, prev.probs + ins.probs)
        else:
            out.append(ins)
    return out

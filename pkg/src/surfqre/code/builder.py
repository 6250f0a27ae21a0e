"""Layer-by-layer construction of noisy parity-check circuits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from ..errors import ValidationError
from ..hwmodel import NoiseChannelSet, idle_error_rate
from .circuit import Instruction, StabCircuit
from .layout import Check


@dataclass(frozen=True)
class RateOverrides:
    """Per-qubit (or per-pair) replacements for the uniform channel strengths.

    Keys are qubit coordinates as used by the layout, so one map can be applied
    to any circuit built on the same lattice.
    """

    t1: Dict[Tuple[float, float], float] = field(default_factory=dict)
    p_dep_1q: Dict[Tuple[float, float], float] = field(default_factory=dict)
    p_dep_2q: Dict[FrozenSet, float] = field(default_factory=dict)
    p_meas_flip: Dict[Tuple[float, float], float] = field(default_factory=dict)
    p_reset_flip: Dict[Tuple[float, float], float] = field(default_factory=dict)
    p_prep_flip: Dict[Tuple[float, float], float] = field(default_factory=dict)


class CircuitBuilder:
    def __init__(self, noise: NoiseChannelSet, overrides: Optional[RateOverrides] = None):
        self.noise = noise
        self.ov = overrides or RateOverrides()
        self.coords: List[Tuple[float, float]] = []
        self.index: Dict[Tuple[float, float], int] = {}
        self.instructions: List[Instruction] = []
        self.n_meas = 0
        self.active: set = set()
        self.detectors: List[Tuple[int, ...]] = []
        self.detector_coords: List[Tuple[float, float, float]] = []
        self.detector_basis: List[str] = []
        self.observables: List[Tuple[int, ...]] = []
        self.layer_count = 0

    # --- qubits and rates -----------------------------------------------

    def qubit(self, coord) -> int:
        coord = (float(coord[0]), float(coord[1]))
        q = self.index.get(coord)
        if q is None:
            q = len(self.coords)
            self.coords.append(coord)
            self.index[coord] = q
        return q

    def _t1(self, q: int) -> float:
        return self.ov.t1.get(self.coords[q], self.noise.t1)

    def idle_rate(self, q: int, duration: float) -> float:
        t1 = self._t1(q)
        if t1 == float("inf") or duration <= 0:
            return 0.0
        return idle_error_rate(duration, t1)

    def p1(self, q: int) -> float:
        return self.ov.p_dep_1q.get(self.coords[q], self.noise.p_dep_1q)

    def p2(self, a: int, b: int) -> float:
        return self.ov.p_dep_2q.get(frozenset((self.coords[a], self.coords[b])), self.noise.p_dep_2q)

    def p_meas(self, q: int) -> float:
        return self.ov.p_meas_flip.get(self.coords[q], self.noise.p_meas_flip)

    def p_reset(self, q: int) -> float:
        return self.ov.p_reset_flip.get(self.coords[q], self.noise.p_reset_flip)

    def p_prep(self, q: int) -> float:
        return self.ov.p_prep_flip.get(self.coords[q], self.noise.p_prep_flip)

    # --- layers ------------------------------------------------------------

    def _emit_noise(self, name: str, targets: List[int], probs: List[float]) -> None:
        if targets and any(p > 0 for p in probs):
            self.instructions.append(Instruction(name, tuple(targets), tuple(probs)))

    def _finish_layer(self, touched: Iterable[int], duration: float,
                      dep1: Tuple[List[int], List[float]] = ([], [])) -> None:
        touched = set(touched)
        idle = sorted(self.active - touched)
        targets = list(dep1[0]) + idle
        probs = list(dep1[1]) + [self.idle_rate(q, duration) for q in idle]
        self._emit_noise("DEPOLARIZE1", targets, probs)
        self.instructions.append(Instruction("TICK", ()))
        self.layer_count += 1

    def init_layer(self, preps: Sequence[int] = (), resets: Sequence[int] = ()) -> None:
        """Reset qubits to |0>; fresh qubits use prep rates/time, reused ones reset rates/time."""
        qs = list(preps) + list(resets)
        if not qs:
            return
        self.active.update(qs)
        self.instructions.append(Instruction("R", tuple(qs)))
        self._emit_noise("X_ERROR", qs, [self.p_prep(q) for q in preps]
                         + [self.p_reset(q) for q in resets])
        duration = max(self.noise.time_prep if preps else 0.0,
                       self.noise.time_reset if resets else 0.0)
        self._finish_layer(qs, duration)

    def h_layer(self, qs: Sequence[int]) -> None:
        qs = list(qs)
        if not qs:
            return
        self.instructions.append(Instruction("H", tuple(qs)))
        self._finish_layer(qs, self.noise.time_1q, (qs, [self.p1(q) for q in qs]))

    def cx_layer(self, pairs: Sequence[Tuple[int, int]]) -> None:
        if not pairs:
            return
        flat = [q for pr in pairs for q in pr]
        self.instructions.append(Instruction("CX", tuple(flat)))
        self._emit_noise("DEPOLARIZE2", flat, [self.p2(a, b) for a, b in pairs])
        self._finish_layer(flat, self.noise.time_2q)

    def idle_layer(self, duration: float) -> None:
        if self.active:
            self._finish_layer((), duration)

    def measure_layer(self, qs: Sequence[int]) -> List[int]:
        qs = list(qs)
        if not qs:
            return []
        self._emit_noise("X_ERROR", qs, [self.p_meas(q) for q in qs])
        self.instructions.append(Instruction("M", tuple(qs)))
        recs = list(range(self.n_meas, self.n_meas + len(qs)))
        self.n_meas += len(qs)
        self._finish_layer(qs, self.noise.time_meas)
        self.active.difference_update(qs)
        return recs

    # --- parity-check rounds ------------------------------------------------

    def check_round(self, checks: Sequence[Check], preps: Sequence[int] = (),
                    resets: Sequence[int] = (), extra_h: Sequence[int] = ()) -> Dict:
        """One round of parity checks; returns {plaquette: record index}.

        ``preps`` are qubits initialised for the first time (prep rates);
        ancillas not in ``preps`` are reset, as are the extra ``resets``.
        ``extra_h`` qubits get an H in the first H layer (prepares |+> data).
        """
        anc = [self.qubit(c.ancilla) for c in checks]
        preps = list(preps)
        pset = set(preps)
        rs = [q for q in anc if q not in pset] + [q for q in resets if q not in pset]
        self.init_layer(preps=preps, resets=rs)
        xs = [self.qubit(c.ancilla) for c in checks if c.basis == "X"]
        self.h_layer(list(extra_h) + xs)
        for step in range(4):
            pairs = []
            for c in checks:
                corner = c.schedule[step]
                if corner is None:
                    continue
                a, dq = self.qubit(c.ancilla), self.qubit(corner)
                pairs.append((a, dq) if c.basis == "X" else (dq, a))
            self.cx_layer(pairs)
        self.h_layer(xs)
        recs = self.measure_layer(anc)
        if not self.noise.single_meas:
            # second measurement interval of the round (readout latency)
            self.idle_layer(self.noise.time_meas)
        return {c.plaquette: r for c, r in zip(checks, recs)}

    def detector(self, recs: Iterable[int], coord: Tuple[float, float, float], basis: str) -> None:
        self.detectors.append(tuple(sorted(recs)))
        self.detector_coords.append(coord)
        self.detector_basis.append(basis)

    def build(self) -> StabCircuit:
        circuit = StabCircuit(len(self.coords), tuple(self.instructions), tuple(self.detectors),
                              tuple(self.observables), tuple(self.coords),
                              tuple(self.detector_coords), tuple(self.detector_basis))
        circuit.validate_layers()
        return circuit


def _validate_distance(d) -> None:
    if isinstance(d, bool) or int(d) != d or d < 3 or d % 2 == 0:
        raise ValidationError(f"distance must be odd and >= 3, got {d}")

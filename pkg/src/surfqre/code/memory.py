"""Quantum-memory experiment: logical |0>, repeated parity checks, Z readout."""

from __future__ import annotations

from typing import Optional

from ..errors import ValidationError
from ..hwmodel import NoiseChannelSet
from .builder import CircuitBuilder, RateOverrides, _validate_distance
from .circuit import StabCircuit
from .layout import SurfaceCodePatch


def build_memory_circuit(d: int, rounds: int, noise: NoiseChannelSet,
                         overrides: Optional[RateOverrides] = None) -> StabCircuit:
    """Z-basis memory circuit on a d x d patch with ``rounds`` check rounds.

    Z checks get a detector from the first round on; X checks from the second.
    The final data readout closes every Z check, and the single observable is
    the bottom row of data qubits.
    """
    _validate_distance(d)
    if isinstance(rounds, bool) or int(rounds) != rounds or rounds < 1:
        raise ValidationError(f"rounds must be >= 1, got {rounds}")
    patch = SurfaceCodePatch(d)
    b = CircuitBuilder(noise, overrides)
    data = [b.qubit(c) for c in patch.data_qubit_coords]
    anc = [b.qubit(c.ancilla) for c in patch.checks]

    last = {}
    for r in range(rounds):
        recs = b.check_round(patch.checks, preps=(data + anc) if r == 0 else ())
        for c in patch.checks:
            m = recs[c.plaquette]
            coord = (c.ancilla[0], c.ancilla[1], float(r))
            if c.plaquette in last:
                b.detector((m, last[c.plaquette]), coord, c.basis)
            elif c.basis == "Z":
                b.detector((m,), coord, c.basis)
            last[c.plaquette] = m

    final = dict(zip(patch.data_qubit_coords, b.measure_layer(data)))
    for c in patch.checks:
        if c.basis == "Z":
            recs = [final[q] for q in c.support] + [last[c.plaquette]]
            b.detector(recs, (c.ancilla[0], c.ancilla[1], float(rounds)), "Z")
    b.observables.append(tuple(sorted(final[q] for q in patch.logical_z_row(0))))
    return b.build()

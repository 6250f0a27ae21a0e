"""Logical teleportation through a lattice-surgery XX merge, and weak-link cuts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from ..errors import ValidationError
from ..hwmodel import NoiseChannelSet, depolarizing_rate
from .builder import CircuitBuilder, RateOverrides, _validate_distance
from .circuit import Instruction, StabCircuit
from .layout import check_map, rectangle_checks


@dataclass(frozen=True)
class TeleportSpec:
    """Geometry and schedule of a teleportation experiment.

    The source patch occupies data columns [0, d-1], the bus [d, d+b-1] and
    the target [d+b, 2d+b-1].  ``r_m`` defaults to ``d``.  ``p_link`` of None
    leaves cut CNOTs at the default two-qubit rate.
    """

    d: int
    b: int
    r_pm: int = 1
    r_m: Optional[int] = None
    r_s: int = 0
    source_state: str = "zero"
    n_cuts: int = 0
    p_link: Optional[float] = None

    def __post_init__(self) -> None:
        _validate_distance(self.d)
        if self.r_m is None:
            object.__setattr__(self, "r_m", self.d)
        for name, lo in (("b", 1), ("r_pm", 1), ("r_m", 1), ("r_s", 0), ("n_cuts", 0)):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < lo:
                raise ValidationError(f"{name} must be an integer >= {lo}, got {v}")
        if self.source_state not in ("zero", "plus"):
            raise ValidationError(f"source_state must be 'zero' or 'plus', got {self.source_state!r}")
        if self.n_cuts >= self.b:
            raise ValidationError(f"n_cuts={self.n_cuts} needs a bus wider than {self.n_cuts} (b={self.b})")
        if self.p_link is not None and not 0.0 <= self.p_link < 1.0:
            raise ValidationError(f"p_link must lie in [0, 1), got {self.p_link}")

    def cut_columns(self) -> List[int]:
        """Plaquette columns carrying a cut, evenly spaced inside the bus."""
        return [self.d - 1 + ((k + 1) * self.b) // (self.n_cuts + 1) for k in range(self.n_cuts)]

    @property
    def width(self) -> int:
        return 2 * self.d + self.b


def build_teleport_circuit(spec: TeleportSpec, noise: NoiseChannelSet,
                           overrides: Optional[RateOverrides] = None) -> StabCircuit:
    """Teleport |0> or |+> from the source patch to the target patch.

    Steps: r_pm rounds on the separate patches; bus reset to |0> and r_m rounds
    of the merged code (measuring X_source X_target); bus measured in Z; r_s
    rounds on the separate patches; source measured in Z and target measured
    in the basis of the source state.  No correction is applied: the
    observable folds in the merge outcome (|+>) or the source and bus
    readouts (|0>).
    """
    d, bw = spec.d, spec.b
    W = spec.width
    xs0, xt0 = 0, d + bw
    src_checks = rectangle_checks(xs0, d - 1, d)
    tgt_checks = rectangle_checks(xt0, W - 1, d)
    merged_checks = rectangle_checks(0, W - 1, d)
    split_checks = src_checks + tgt_checks
    merged_by_p = check_map(merged_checks)
    before = set(check_map(split_checks))
    src_basis = "Z" if spec.source_state == "zero" else "X"

    b = CircuitBuilder(noise, overrides)
    src_data = [(x, y) for y in range(d) for x in range(xs0, d)]
    tgt_data = [(x, y) for y in range(d) for x in range(xt0, W)]
    bus_data = [(x, y) for y in range(d) for x in range(d, d + bw)]
    for c in src_data + tgt_data + bus_data:
        b.qubit(c)
    for c in split_checks + [m for m in merged_checks if m.plaquette not in before]:
        b.qubit(c.ancilla)
    q = b.qubit

    # data basis after initialisation, used to decide first-round determinism
    init_basis = {c: src_basis for c in src_data}
    init_basis.update({c: "Z" for c in tgt_data})

    last: Dict = {}
    t = 0

    def add_round_detectors(checks, recs, fresh_basis, extra=None):
        for c in checks:
            m = recs[c.plaquette]
            coord = (c.ancilla[0], c.ancilla[1], float(t))
            if c.plaquette in last:
                b.detector((m, last[c.plaquette]) + tuple(extra.get(c.plaquette, ()) if extra else ()),
                           coord, c.basis)
            elif all(fresh_basis.get(s) == c.basis for s in c.support):
                b.detector((m,), coord, c.basis)
            last[c.plaquette] = m

    # 1. preparation and pre-merge rounds
    for r in range(spec.r_pm):
        preps = ([q(c) for c in src_data + tgt_data] + [q(c.ancilla) for c in split_checks]) if r == 0 else []
        extra_h = [q(c) for c in src_data] if (r == 0 and src_basis == "X") else []
        recs = b.check_round(split_checks, preps=preps, extra_h=extra_h)
        add_round_detectors(split_checks, recs, init_basis if r == 0 else {})
        t += 1

    # 2. merge
    m1: List[int] = []
    bus_fresh = {c: "Z" for c in bus_data}
    for r in range(spec.r_m):
        resets = [q(c) for c in bus_data] if r == 0 else []
        recs = b.check_round(merged_checks, resets=resets)
        if r == 0:
            m1 = [recs[c.plaquette] for c in merged_checks
                  if c.basis == "X" and c.plaquette not in before]
        add_round_detectors(merged_checks, recs, bus_fresh if r == 0 else {})
        t += 1

    # 3. split and 4. post-split rounds
    final: Dict = {}
    if spec.r_s > 0:
        bus_recs = dict(zip(bus_data, b.measure_layer([q(c) for c in bus_data])))
        final.update(bus_recs)
        for c in merged_checks:
            if c.plaquette not in before and c.basis == "Z" and c.plaquette in last:
                recs_ = [bus_recs[s] for s in c.support] + [last[c.plaquette]]
                b.detector(recs_, (c.ancilla[0], c.ancilla[1], float(t)), "Z")
        extra = {}
        for c in split_checks:
            grown = [s for s in merged_by_p[c.plaquette].support if s in bus_recs]
            if grown:
                extra[c.plaquette] = tuple(bus_recs[s] for s in grown)
        for r in range(spec.r_s):
            recs = b.check_round(split_checks)
            add_round_detectors(split_checks, recs, {}, extra if r == 0 else None)
            t += 1
        last_checks = split_checks
        to_measure = src_data + tgt_data
    else:
        last_checks = merged_checks
        to_measure = src_data + bus_data + tgt_data

    # 5. projection
    if src_basis == "X":
        b.h_layer([q(c) for c in tgt_data])
    final.update(zip(to_measure, b.measure_layer([q(c) for c in to_measure])))
    meas_basis = {c: "Z" for c in src_data + bus_data}
    meas_basis.update({c: src_basis for c in tgt_data})
    for c in last_checks:
        if c.plaquette in last and all(meas_basis[s] == c.basis for s in c.support):
            recs_ = [final[s] for s in c.support] + [last[c.plaquette]]
            b.detector(recs_, (c.ancilla[0], c.ancilla[1], float(t)), c.basis)

    if src_basis == "Z":
        obs = [final[(x, 0)] for x in range(W)]
    else:
        obs = [final[(xt0, y)] for y in range(d)] + m1
    b.observables.append(tuple(sorted(obs)))
    circuit = b.build()
    if spec.n_cuts and spec.p_link is not None:
        circuit = apply_cuts(circuit, spec.cut_columns(), spec.p_link, bus=(d, d + bw - 1))
    return circuit


def _crossing(ca, cb, cols: set) -> bool:
    # a cut at plaquette column c separates ancilla column c from data column c + 1
    for anc, dat in ((ca, cb), (cb, ca)):
        if anc[0] % 1 == 0.5 and dat[0] % 1 == 0.0:
            c = int(anc[0] - 0.5)
            if c in cols and dat[0] == c + 1:
                return True
    return False


def apply_cuts(circuit: StabCircuit, cut_columns: Sequence[int], p_link: float,
               bus: Optional[tuple] = None) -> StabCircuit:
    """Give every CNOT crossing a cut the depolarizing rate of infidelity ``p_link``.

    ``bus`` = (first, last) data column of the bus; when given, cut columns
    must lie in [first - 1, last].
    """
    if not 0.0 <= p_link < 1.0:
        raise ValidationError(f"p_link must lie in [0, 1), got {p_link}")
    if not circuit.qubit_coords:
        raise ValidationError("circuit carries no qubit coordinates")
    cols = set(int(c) for c in cut_columns)
    if bus is not None:
        for c in cols:
            if not bus[0] - 1 <= c <= bus[1]:
                raise ValidationError(f"cut column {c} outside the bus region")
    rate = depolarizing_rate(1.0 - p_link, 2)
    coords = circuit.qubit_coords
    out: List[Instruction] = []
    ins_list = circuit.instructions
    k = 0
    while k < len(ins_list):
        ins = ins_list[k]
        out.append(ins)
        if ins.name == "CX":
            pairs = ins.groups
            hit = [_crossing(coords[a], coords[b_], cols) for a, b_ in pairs]
            nxt = ins_list[k + 1] if k + 1 < len(ins_list) else None
            if nxt is not None and nxt.name == "DEPOLARIZE2" and nxt.targets == ins.targets:
                probs = tuple(rate if h else p for h, p in zip(hit, nxt.probs))
                out.append(Instruction("DEPOLARIZE2", nxt.targets, probs))
                k += 1
            elif any(hit):
                out.append(Instruction("DEPOLARIZE2", ins.targets,
                                       tuple(rate if h else 0.0 for h in hit)))
        k += 1
    return circuit.replace_instructions(out)

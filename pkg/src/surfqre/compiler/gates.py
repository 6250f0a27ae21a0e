"""Clifford+T gate circuits, their text format and Trotter-step generation.

Text format, one gate per line (``#`` comments)::

    qubits 3          optional, otherwise inferred
    h 0
    s 1 / sdg 1 / t 2 / tdg 2 / x 0 / y 0 / z 0
    cx 0 1            control, target (``cnot`` accepted)
    rz(0.3927) 1      exp(-i theta Z / 2)
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from ..errors import ValidationError
from .pauli import PauliTerm

ONE_QUBIT = ("h", "s", "sdg", "t", "tdg", "x", "y", "z")
CLIFFORD = ("h", "s", "sdg", "x", "y", "z", "cx")
ALIASES = {"cnot": "cx", "s_dag": "sdg", "sdag": "sdg", "tdag": "tdg", "t_dag": "tdg"}


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: Tuple[int, ...]
    angle: Optional[float] = None

    def __post_init__(self) -> None:
        if self.name not in ONE_QUBIT + ("cx", "rz"):
            raise ValidationError(f"unsupported gate {self.name!r}")
        k = 2 if self.name == "cx" else 1
        if len(self.qubits) != k:
            raise ValidationError(f"{self.name} takes {k} qubit(s)")
        if k == 2 and self.qubits[0] == self.qubits[1]:
            raise ValidationError("cx control and target must differ")
        if (self.name == "rz") != (self.angle is not None):
            raise ValidationError("only rz carries an angle")
        if self.angle is not None and not math.isfinite(self.angle):
            raise ValidationError("rz angle must be finite")

    def text(self) -> str:
        head = f"rz({self.angle!r})" if self.name == "rz" else self.name
        return head + " " + " ".join(map(str, self.qubits))


@dataclass(frozen=True)
class GateCircuit:
    num_qubits: int
    gates: Tuple[Gate, ...]

    def __post_init__(self) -> None:
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValidationError(f"qubit {q} out of range for {self.num_qubits} qubits")

    def __add__(self, other: "GateCircuit") -> "GateCircuit":
        return GateCircuit(max(self.num_qubits, other.num_qubits), self.gates + other.gates)

    def count(self, *names: str) -> int:
        return sum(g.name in names for g in self.gates)

    def to_text(self) -> str:
        return "\n".join([f"qubits {self.num_qubits}"] + [g.text() for g in self.gates]) + "\n"


_LINE = re.compile(r"^([a-z_]+)(?:\(([^)]*)\))?$")


def parse_circuit_text(text: str) -> GateCircuit:
    gates: List[Gate] = []
    n_decl = None
    n_used = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip().rstrip(";")
        if not line:
            continue
        head, *args = line.replace(",", " ").split()
        m = _LINE.match(head.lower())
        if m is None:
            raise ValidationError(f"line {lineno}: cannot parse {head!r}")
        name, arg = ALIASES.get(m.group(1), m.group(1)), m.group(2)
        try:
            qs = tuple(int(a) for a in args)
            if name == "qubits":
                n_decl = qs[0]
                continue
            if any(q < 0 for q in qs):
                raise ValueError("negative qubit index")
            angle = _angle(arg) if name == "rz" else None
            if arg is not None and name != "rz":
                raise ValueError(f"{name} takes no parameter")
            gates.append(Gate(name, qs, angle))
        except (ValueError, IndexError) as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
        n_used = max(n_used, max(qs) + 1)
    n = n_used if n_decl is None else n_decl
    if n_decl is not None and n_used > n_decl:
        raise ValidationError(f"gate uses qubit {n_used - 1} but only {n_decl} declared")
    return GateCircuit(n, tuple(gates))


def _angle(arg: Optional[str]) -> float:
    if arg is None:
        raise ValueError("rz needs an angle")
    s = arg.strip().replace(" ", "")
    m = re.fullmatch(r"(-?)(\d*\.?\d*)\*?pi(?:/(\d+\.?\d*))?", s)
    if m and "pi" in s:
        mult = float(m.group(2)) if m.group(2) else 1.0
        val = mult * math.pi / (float(m.group(3)) if m.group(3) else 1.0)
        return -val if m.group(1) else val
    return float(s)


def parse_circuit(path: Union[str, Path]) -> GateCircuit:
    return parse_circuit_text(Path(path).read_text())


# --- Trotter steps ----------------------------------------------------------------

def pauli_exponential(word: str, angle: float) -> List[Gate]:
    """Gates for exp(-i angle P) with P the Pauli word (identity letters skipped)."""
    support = [k for k, c in enumerate(word) if c != "I"]
    if not support:
        return []
    pre: List[Gate] = []
    post: List[Gate] = []
    for k in support:
        c = word[k]
        if c == "X":
            pre.append(Gate("h", (k,)))
            post.append(Gate("h", (k,)))
        elif c == "Y":
            pre += [Gate("sdg", (k,)), Gate("h", (k,))]
            post += [Gate("h", (k,)), Gate("s", (k,))]
    ladder = [Gate("cx", (a, b)) for a, b in zip(support[:-1], support[1:])]
    mid = [Gate("rz", (support[-1],), 2.0 * angle)]
    return pre + ladder + mid + ladder[::-1] + post


def trotter_step_circuit(terms: Sequence[PauliTerm], tau: float, order: int = 1) -> GateCircuit:
    """One product-formula step of exp(-i tau H), H = sum of the terms.

    Order 1 applies the terms in list order.  Order 2 applies the terms in
    reverse at half angle and then forward at half angle, with the two
    adjacent copies of the first term fused into one full-angle rotation.
    """
    if order not in (1, 2):
        raise ValidationError(f"order must be 1 or 2, got {order}")
    if not terms:
        raise ValidationError("empty Hamiltonian")
    if not math.isfinite(tau):
        raise ValidationError("tau must be finite")
    n = terms[0].n
    if any(t.n != n for t in terms):
        raise ValidationError("terms act on different qubit counts")
    gates: List[Gate] = []
    if order == 1:
        for t in terms:
            gates += pauli_exponential(t.word, t.coeff * tau)
    else:
        half = 0.5 * tau
        for t in reversed(terms[1:]):
            gates += pauli_exponential(t.word, t.coeff * half)
        gates += pauli_exponential(terms[0].word, terms[0].coeff * tau)
        for t in terms[1:]:
            gates += pauli_exponential(t.word, t.coeff * half)
    return GateCircuit(n, tuple(gates))

"""Clifford frames in the symplectic representation.

A frame F is stored through the map Q -> F^dag Q F on the generators X_j and
Z_j (images with x, z bits and an i^r phase).  ``ops`` keeps the Clifford as an
explicit gate list in application order, which is what dense-matrix checks
use; the tableau is what the transpiler uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from ..errors import ValidationError
from .gates import Gate
from .pauli import Pauli


def _heisenberg_1q(name: str, n: int, q: int) -> Tuple[Pauli, Pauli]:
    """(G^dag X_q G, G^dag Z_q G) for a one-qubit Clifford G."""
    X, Z = Pauli.single(n, q, "X"), Pauli.single(n, q, "Z")
    Y = Pauli.single(n, q, "Y")
    table = {
        "h": (Z, X),
        "s": (Y.negate(), Z),
        "sdg": (Y, Z),
        "x": (X, Z.negate()),
        "y": (X.negate(), Z.negate()),
        "z": (X.negate(), Z),
    }
    if name not in table:
        raise ValidationError(f"{name} is not a Clifford gate")
    return table[name]


def quarter_turn(p: Pauli, q: Pauli, sign: int) -> Pauli:
    """C^dag q C for C = exp(-i sign pi/4 p) with p Hermitian."""
    if p.commutes(q):
        return q
    pq = p * q
    return Pauli(pq.x, pq.z, (pq.r + (1 if sign > 0 else 3)) % 4)


@dataclass
class CliffordFrame:
    n: int
    images: List[Pauli] = field(default_factory=list)     # X_0..X_{n-1}, Z_0..Z_{n-1}
    ops: List[tuple] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.images:
            self.images = ([Pauli.single(self.n, j, "X") for j in range(self.n)]
                           + [Pauli.single(self.n, j, "Z") for j in range(self.n)])

    def copy(self) -> "CliffordFrame":
        return CliffordFrame(self.n, list(self.images), list(self.ops))

    def conjugate(self, p: Pauli) -> Pauli:
        """F^dag p F."""
        if p.n != self.n:
            raise ValidationError(f"Pauli on {p.n} qubits, frame on {self.n}")
        out = Pauli(np.zeros(self.n, bool), np.zeros(self.n, bool), p.r)
        for j in np.flatnonzero(p.x):
            out = out * self.images[j]
        for j in np.flatnonzero(p.z):
            out = out * self.images[self.n + j]
        return out

    def apply_gate(self, gate: Gate) -> None:
        """F <- G F (G acts after everything so far)."""
        if gate.name == "cx":
            c, t = gate.qubits
            xc = Pauli.single(self.n, c, "X") * Pauli.single(self.n, t, "X")
            zt = Pauli.single(self.n, c, "Z") * Pauli.single(self.n, t, "Z")
            new_xc, new_zt = self.conjugate(xc), self.conjugate(zt)
            self.images[c] = new_xc
            self.images[self.n + t] = new_zt
        else:
            q = gate.qubits[0]
            gx, gz = _heisenberg_1q(gate.name, self.n, q)
            new_x, new_z = self.conjugate(gx), self.conjugate(gz)
            self.images[q] = new_x
            self.images[self.n + q] = new_z
        self.ops.append(("gate", gate))

    def absorb_quarter_turn(self, p: Pauli, sign: int) -> None:
        """F <- F C with C = exp(-i sign pi/4 p), i.e. C acts before F."""
        self.images = [quarter_turn(p, img, sign) for img in self.images]
        self.ops.insert(0, ("quarter", p, sign))

    def compose(self, later: "CliffordFrame") -> "CliffordFrame":
        """Frame of ``later`` applied after ``self``."""
        if later.n != self.n:
            raise ValidationError("frames act on different qubit counts")
        images = [self.conjugate(img) for img in later.images]
        return CliffordFrame(self.n, images, self.ops + later.ops)

    def is_identity(self) -> bool:
        return self == CliffordFrame(self.n)

    def symplectic(self) -> Tuple[np.ndarray, np.ndarray]:
        """(2n x 2n) binary matrix of images and their phase exponents."""
        m = np.array([np.concatenate([p.x, p.z]) for p in self.images], dtype=np.uint8)
        r = np.array([p.r for p in self.images], dtype=np.int64)
        return m, r

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordFrame) or other.n != self.n:
            return False
        return all(a == b for a, b in zip(self.images, other.images))

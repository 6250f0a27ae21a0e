"""Independent dense-matrix reference implementations used by the tests."""

from functools import reduce

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j])
T = np.diag([1, np.exp(1j * np.pi / 4)])
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}
ONE = {"h": H, "s": S, "sdg": S.conj().T, "t": T, "tdg": T.conj().T, "x": X, "y": Y, "z": Z}


def kron_all(mats):
    return reduce(np.kron, mats)


def pauli_matrix(word: str) -> np.ndarray:
    sign = 1.0
    if word.startswith("-"):
        sign, word = -1.0, word[1:]
    return sign * kron_all([PAULI[c] for c in word])


def embed_1q(u, q, n):
    return kron_all([u if k == q else I2 for k in range(n)])


def cnot(c, t, n):
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        bits = [(i >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[c]:
            bits[t] ^= 1
        j = sum(b << (n - 1 - k) for k, b in enumerate(bits))
        out[j, i] = 1
    return out


def gate_matrix(g, n):
    if g.name == "cx":
        return cnot(g.qubits[0], g.qubits[1], n)
    if g.name == "rz":
        u = np.diag([np.exp(-0.5j * g.angle), np.exp(0.5j * g.angle)])
        return embed_1q(u, g.qubits[0], n)
    return embed_1q(ONE[g.name], g.qubits[0], n)


def circuit_unitary(circuit):
    n = circuit.num_qubits
    u = np.eye(2 ** n, dtype=complex)
    for g in circuit.gates:
        u = gate_matrix(g, n) @ u
    return u


def rotation_matrix(word: str, angle: float) -> np.ndarray:
    return expm(-1j * angle * pauli_matrix(word))


def sequence_unitary(seq):
    n = seq.num_qubits
    u = np.eye(2 ** n, dtype=complex)
    for r in seq.rotations:
        u = rotation_matrix(r.axis.label(), r.angle) @ u
    return frame_unitary(seq.frame) @ u


def frame_unitary(frame):
    n = frame.n
    u = np.eye(2 ** n, dtype=complex)
    for op in frame.ops:
        if op[0] == "gate":
            m = gate_matrix(op[1], n)
        else:
            m = rotation_matrix(op[1].label(), op[2] * np.pi / 4)
        u = m @ u
    return u


def equal_up_to_phase(a, b, tol=1e-10) -> bool:
    k = np.argmax(np.abs(b))
    idx = np.unravel_index(k, b.shape)
    if abs(a[idx]) < 1e-12:
        return False
    phase = a[idx] / b[idx]
    if abs(abs(phase) - 1) > tol:
        return False
    return np.max(np.abs(a - phase * b)) < tol

"""Pauli operators in (x, z, phase) form and Hamiltonian term files.

A Pauli is ``i^r X^x Z^z`` with the X part written to the left of the Z part,
so Y = i X Z.  Products follow from Z^a X^b = (-1)^{a.b} X^b Z^a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np

from ..errors import ValidationError

LETTERS = "IXYZ"


@dataclass(frozen=True)
class Pauli:
    x: np.ndarray
    z: np.ndarray
    r: int = 0

    @classmethod
    def identity(cls, n: int) -> "Pauli":
        return cls(np.zeros(n, bool), np.zeros(n, bool), 0)

    @classmethod
    def from_label(cls, label: str) -> "Pauli":
        """Parse e.g. ``"-XIZ"``; character k acts on qubit k."""
        sign = 0
        if label.startswith("-"):
            sign, label = 2, label[1:]
        elif label.startswith("+"):
            label = label[1:]
        x = np.array([c in "XY" for c in label], bool)
        z = np.array([c in "ZY" for c in label], bool)
        bad = [c for c in label if c not in LETTERS]
        if bad:
            raise ValidationError(f"invalid Pauli letter {bad[0]!r}")
        return cls(x, z, (sign + int(np.sum(x & z))) % 4)

    @classmethod
    def single(cls, n: int, q: int, letter: str) -> "Pauli":
        word = ["I"] * n
        word[q] = letter
        return cls.from_label("".join(word))

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian Paulis."""
        k = (self.r - int(np.sum(self.x & self.z))) % 4
        if k % 2:
            raise ValidationError("Pauli is not Hermitian")
        return 1 if k == 0 else -1

    def label(self) -> str:
        word = "".join("Y" if a and b else "X" if a else "Z" if b else "I"
                       for a, b in zip(self.x, self.z))
        return ("-" if self.sign < 0 else "") + word

    def __mul__(self, other: "Pauli") -> "Pauli":
        r = self.r + other.r + 2 * int(np.sum(self.z & other.x))
        return Pauli(self.x ^ other.x, self.z ^ other.z, r % 4)

    def commutes(self, other: "Pauli") -> bool:
        return (int(np.sum(self.x & other.z)) + int(np.sum(self.z & other.x))) % 2 == 0

    def same_axis(self, other: "Pauli") -> bool:
        return bool(np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z))

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())

    def negate(self) -> "Pauli":
        return Pauli(self.x, self.z, (self.r + 2) % 4)

    def support(self) -> List[int]:
        return [int(k) for k in np.flatnonzero(self.x | self.z)]

    def __eq__(self, other) -> bool:
        return (isinstance(other, Pauli) and self.r == other.r
                and self.same_axis(other))

    def __hash__(self) -> int:
        return hash((self.x.tobytes(), self.z.tobytes(), self.r))


@dataclass(frozen=True)
class PauliTerm:
    coeff: float
    word: str

    def __post_init__(self) -> None:
        if not math.isfinite(self.coeff) or self.coeff == 0:
            raise ValidationError(f"coefficient must be finite and nonzero, got {self.coeff}")
        bad = [c for c in self.word if c not in LETTERS]
        if bad or not self.word:
            raise ValidationError(f"invalid Pauli word {self.word!r}")

    @property
    def n(self) -> int:
        return len(self.word)

    def pauli(self) -> Pauli:
        return Pauli.from_label(self.word)


def merge_terms(terms: Sequence[PauliTerm], tol: float = 0.0) -> List[PauliTerm]:
    """Add coefficients of repeated words, dropping terms that cancel."""
    acc: Dict[str, float] = {}
    for t in terms:
        acc[t.word] = acc.get(t.word, 0.0) + t.coeff
    return [PauliTerm(c, w) for w, c in acc.items() if abs(c) > tol]


def parse_hamiltonian_text(text: str) -> List[PauliTerm]:
    terms: List[PauliTerm] = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValidationError(f"line {lineno}: expected '<coeff> <pauli-word>'")
        try:
            coeff = float(parts[0])
        except ValueError:
            raise ValidationError(f"line {lineno}: bad coefficient {parts[0]!r}") from None
        word = parts[1].upper()
        for col, c in enumerate(word, 1):
            if c not in LETTERS:
                raise ValidationError(f"line {lineno}: invalid Pauli letter {parts[1][col - 1]!r} "
                                      f"at position {col}")
        if n is None:
            n = len(word)
        elif len(word) != n:
            raise ValidationError(f"line {lineno}: word length {len(word)} differs from {n}")
        if not math.isfinite(coeff):
            raise ValidationError(f"line {lineno}: coefficient must be finite")
        if coeff != 0:
            terms.append(PauliTerm(coeff, word))
    return merge_terms(terms)


def parse_hamiltonian(path: Union[str, Path]) -> List[PauliTerm]:
    return parse_hamiltonian_text(Path(path).read_text())


def one_norm(terms: Sequence[PauliTerm]) -> float:
    return float(sum(abs(t.coeff) for t in terms))

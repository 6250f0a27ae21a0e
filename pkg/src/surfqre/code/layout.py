"""Rotated surface code geometry on a global lattice.

Data qubits sit at integer points (x, y).  A plaquette (i, j) has its lower-left
corner at data (i, j) and its ancilla at (i + 0.5, j + 0.5).  Check types follow
one global checkerboard, so patches placed anywhere on the lattice agree on
their seams: plaquette (i, j) is X-type when i + j is even.

For a rectangle of data columns [x0, x1] and rows [0, d-1] the left and right
boundaries carry weight-2 Z checks and the top and bottom boundaries carry
weight-2 X checks.  Logical Z is a horizontal row of Z, logical X a vertical
column of X.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from ..errors import ValidationError

Coord = Tuple[float, float]
Plaquette = Tuple[int, int]

# CNOT order over the corners (dx, dy) of a plaquette.  The last two corners of
# each order form the hook pair: horizontal for X checks, vertical for Z checks,
# so hook errors run perpendicular to the logical operator of the same type.
X_ORDER = ((0, 1), (1, 1), (0, 0), (1, 0))   # NW, NE, SW, SE
Z_ORDER = ((0, 1), (0, 0), (1, 1), (1, 0))   # NW, SW, NE, SE


def plaquette_type(i: int, j: int) -> str:
    return "X" if (i + j) % 2 == 0 else "Z"


def ancilla_coord(p: Plaquette) -> Coord:
    return (p[0] + 0.5, p[1] + 0.5)


@dataclass(frozen=True)
class Check:
    plaquette: Plaquette
    basis: str
    # data coords in CNOT order; missing corners are None (boundary checks)
    schedule: Tuple[Tuple[int, int] | None, ...]

    @property
    def support(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(c for c in self.schedule if c is not None)

    @property
    def ancilla(self) -> Coord:
        return ancilla_coord(self.plaquette)


def rectangle_checks(x0: int, x1: int, height: int) -> List[Check]:
    """Stabilizers of the rotated code on data columns x0..x1 and rows 0..height-1."""
    if x1 < x0 or height < 1:
        raise ValidationError("empty rectangle")
    checks = []
    for j in range(-1, height):
        for i in range(x0 - 1, x1 + 1):
            basis = plaquette_type(i, j)
            on_lr = i == x0 - 1 or i == x1
            on_tb = j == -1 or j == height - 1
            if on_lr and on_tb:
                continue
            if on_lr and basis != "Z":
                continue
            if on_tb and basis != "X":
                continue
            order = X_ORDER if basis == "X" else Z_ORDER
            sched = []
            for dx, dy in order:
                x, y = i + dx, j + dy
                inside = x0 <= x <= x1 and 0 <= y < height
                sched.append((x, y) if inside else None)
            checks.append(Check((i, j), basis, tuple(sched)))
    return checks


@dataclass(frozen=True)
class SurfaceCodePatch:
    """A d x d rotated surface code patch with its lower-left data qubit at (x0, 0)."""

    distance: int
    x0: int = 0
    checks: Tuple[Check, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        d = self.distance
        if isinstance(d, bool) or int(d) != d or d < 3 or d % 2 == 0:
            raise ValidationError(f"distance must be odd and >= 3, got {d}")
        object.__setattr__(self, "checks", tuple(rectangle_checks(self.x0, self.x0 + d - 1, d)))

    @property
    def data_qubit_coords(self) -> List[Tuple[int, int]]:
        d = self.distance
        return [(x, y) for y in range(d) for x in range(self.x0, self.x0 + d)]

    @property
    def x_ancilla_coords(self) -> List[Coord]:
        return [c.ancilla for c in self.checks if c.basis == "X"]

    @property
    def z_ancilla_coords(self) -> List[Coord]:
        return [c.ancilla for c in self.checks if c.basis == "Z"]

    def logical_z_row(self, y: int = 0) -> List[Tuple[int, int]]:
        return [(x, y) for x in range(self.x0, self.x0 + self.distance)]

    def logical_x_column(self, x: int | None = None) -> List[Tuple[int, int]]:
        x = self.x0 if x is None else x
        return [(x, y) for y in range(self.distance)]


def check_map(checks) -> Dict[Plaquette, Check]:
    return {c.plaquette: c for c in checks}

"""Runtime extrapolation for exact-diagonalization and DMRG baselines."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Sequence, Tuple

import numpy as np

from ..errors import ValidationError

log = logging.getLogger(__name__)

# reference FCI run: 26 electrons in 23 orbitals, 113.6 h on 512 processes
FCI_ANCHOR_ORBITALS = 23
FCI_ANCHOR_ELECTRONS = 26
FCI_ANCHOR_CPU_HOURS = 113.6 * 512
DMRG_PARALLELISM = 100


def fci_determinants(n_orbitals: int, n_electrons: int, literal: bool = False) -> int:
    """Determinant count; balanced spin sectors C(N_o, N_a) C(N_o, N_b) by default.

    With ``literal`` the squared binomial C(N_o, N_e)^2 is used instead.
    """
    if n_orbitals < 1 or n_electrons < 1 or n_electrons > 2 * n_orbitals:
        raise ValidationError(f"need 0 < electrons <= 2*orbitals, got ({n_orbitals}, {n_electrons})")
    if literal:
        if n_electrons > n_orbitals:
            raise ValidationError("literal formula needs electrons <= orbitals")
        return math.comb(n_orbitals, n_electrons) ** 2
    if n_electrons % 2:
        log.warning("odd electron count %d: using a %d/%d spin split", n_electrons,
                    (n_electrons + 1) // 2, n_electrons // 2)
    na, nb = (n_electrons + 1) // 2, n_electrons // 2
    return math.comb(n_orbitals, na) * math.comb(n_orbitals, nb)


@dataclass(frozen=True)
class FCITime:
    n_orbitals: int
    n_electrons: int
    n_det: int
    cpu_hours: float
    wall_hours: float
    parallelism: int

    def to_dict(self) -> dict:
        return asdict(self)


def classical_fci_time(n_orbitals: int, n_electrons: int, parallelism: int = 1000,
                       literal: bool = False) -> FCITime:
    """CPU time quadratic in the determinant count, calibrated on the reference run."""
    if parallelism < 1:
        raise ValidationError(f"parallelism must be >= 1, got {parallelism}")
    n_det = fci_determinants(n_orbitals, n_electrons, literal)
    anchor = fci_determinants(FCI_ANCHOR_ORBITALS, FCI_ANCHOR_ELECTRONS)
    cpu = FCI_ANCHOR_CPU_HOURS * (n_det / anchor) ** 2
    return FCITime(n_orbitals, n_electrons, n_det, cpu, cpu / parallelism, parallelism)


@dataclass(frozen=True)
class DMRGTime:
    chi: int
    a: float
    b: float
    time: float
    wall_time: float
    parallelism: float
    extrapolated: bool

    def to_dict(self) -> dict:
        return asdict(self)


def fit_dmrg(fit_points: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    pts = np.asarray(fit_points, float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ValidationError("need at least two (chi, time) points")
    if np.unique(pts[:, 0]).size < 2:
        raise ValidationError("degenerate DMRG fit: all points share one chi")
    X = np.column_stack([pts[:, 0] ** 3, np.ones(len(pts))])
    (a, b), *_ = np.linalg.lstsq(X, pts[:, 1], rcond=None)
    return float(a), float(b)


def classical_dmrg_time(chi: int, fit_points: Sequence[Tuple[float, float]],
                        parallelism: float = DMRG_PARALLELISM) -> DMRGTime:
    """Time a*chi^3 + b from a least-squares fit; wall time divides by ``parallelism``."""
    if chi < 1:
        raise ValidationError(f"chi must be >= 1, got {chi}")
    if not parallelism > 0:
        raise ValidationError("parallelism must be > 0")
    a, b = fit_dmrg(fit_points)
    t = a * chi ** 3 + b
    top = max(p[0] for p in fit_points)
    return DMRGTime(int(chi), a, b, t, t / parallelism, float(parallelism), chi > top)

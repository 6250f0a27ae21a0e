"""Qubitization phase-estimation precision budgets and double factorization."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np

from ..errors import ValidationError
from .trotter import qpe_repetitions

PSD_TOL = 1e-10


@dataclass(frozen=True)
class QubitizationPlan:
    lam: float
    delta_E: float
    h_norm: float
    m: int
    eps_H: float
    eps_QFT: float
    chi: float
    omega: Optional[float] = None
    qpe_repetitions: Optional[int] = None
    t_count: Optional[int] = None

    def qpe_bound(self) -> float:
        """Energy-error bound implied by (m, eps_H, eps_QFT)."""
        return self.lam * math.hypot(math.pi / 2 ** self.m, self.eps_H + math.pi * self.eps_QFT)

    def to_dict(self) -> dict:
        return asdict(self)


def qubitization_budget(lam: float, delta_E: float, h_norm_bound: Optional[float] = None,
                        omega: Optional[float] = None,
                        eps_qpe: Optional[float] = None) -> QubitizationPlan:
    """Phase bits and rotation/QFT precisions for an energy error ``delta_E``.

    ``omega`` is the T cost of one walk-operator iteration; when given, the
    total is ceil(M * lam * omega) with M = qpe_repetitions(eps_qpe or delta_E).
    """
    if not lam > 0:
        raise ValidationError(f"lambda must be > 0, got {lam}")
    if not delta_E > 0:
        raise ValidationError(f"delta_E must be > 0, got {delta_E}")
    h = lam if h_norm_bound is None else h_norm_bound
    if not 0 < h <= lam:
        raise ValidationError(f"need 0 < ||H|| <= lambda, got ||H||={h}, lambda={lam}")
    r2 = math.sqrt(2.0) * delta_E
    m = max(1, math.ceil(math.log2(math.pi * lam / r2)))
    eps_H = r2 / (4 * lam)
    eps_QFT = r2 / (4 * math.pi * lam)
    chi = r2 / 4 / (1 + delta_E ** 2 / (8 * lam ** 2)) * (1 - (h / lam) ** 2)
    M = total = None
    if omega is not None:
        if not omega > 0:
            raise ValidationError(f"omega must be > 0, got {omega}")
        M = qpe_repetitions(delta_E if eps_qpe is None else eps_qpe)
        total = int(math.ceil(M * lam * omega))
    return QubitizationPlan(lam, delta_E, h, m, eps_H, eps_QFT, chi, omega, M, total)


@dataclass(frozen=True)
class DFFactor:
    weight: float               # first-level eigenvalue
    L: np.ndarray               # n x n leaf matrix, sum of weight-scaled outer products
    eigvals: np.ndarray         # second-level eigenvalues lambda_m
    U: np.ndarray               # second-level eigenvectors (columns)


def double_factorize(eri: np.ndarray, trunc_threshold: float = 0.0):
    """Two-level factorization of a chemist-ordered ERI tensor (ik|jl) -> eri[i,k,j,l].

    Returns (factors, truncation_error) where truncation_error is the
    Frobenius norm of A minus the sum of retained vec(L) vec(L)^T.
    """
    eri = np.asarray(eri, float)
    if eri.ndim == 2:
        A = eri
        n2 = A.shape[0]
        n = int(round(math.sqrt(n2)))
        if n * n != n2 or A.shape != (n2, n2):
            raise ValidationError("matrix input must be square with side n^2")
    elif eri.ndim == 4 and len(set(eri.shape)) == 1:
        n = eri.shape[0]
        A = eri.reshape(n * n, n * n)
    else:
        raise ValidationError(f"ERI must be n x n x n x n, got shape {eri.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError("ERI contains non-finite values")
    if trunc_threshold < 0:
        raise ValidationError("trunc_threshold must be >= 0")
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - A.T).max() > PSD_TOL * scale:
        raise ValidationError("reshaped ERI matrix is not symmetric")
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    if w.min() < -PSD_TOL * scale:
        raise ValidationError(f"reshaped ERI matrix is not PSD (min eigenvalue {w.min():.3g})")
    wmax = max(float(w.max()), 0.0)
    keep = w > max(trunc_threshold * wmax, PSD_TOL * scale)
    dropped = w[~keep]
    factors: List[DFFactor] = []
    for k in np.flatnonzero(keep)[::-1]:
        Lm = math.sqrt(w[k]) * V[:, k].reshape(n, n)
        Ls = 0.5 * (Lm + Lm.T)
        lam_m, U = np.linalg.eigh(Ls)
        factors.append(DFFactor(float(w[k]), Lm, lam_m, U))
    return factors, float(np.sqrt(np.sum(dropped ** 2)))


def reconstruct(factors) -> np.ndarray:
    if not factors:
        return np.zeros((0, 0))
    n = factors[0].L.shape[0]
    A = np.zeros((n * n, n * n))
    for f in factors:
        v = f.L.reshape(-1)
        A += np.outer(v, v)
    return A

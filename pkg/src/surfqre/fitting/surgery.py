"""Predictive models for teleportation by lattice surgery."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from ..errors import ValidationError
from .suppression import SuppressionModel, _weighted_loglinear


@dataclass(frozen=True)
class SurgeryModel:
    """P0 = mu_x (2d+b) r_m lam_x^-(d+1)/2;  P+ = mu_z d lam_z^-(d+1)/2 + mu_t d b lam_t^-(r_m+1)/2."""

    mu_x: float
    lambda_x: float
    mu_z: float
    lambda_z: float
    mu_t: float
    lambda_t: float
    errors: Optional[dict] = None

    def __post_init__(self) -> None:
        for name in ("mu_x", "lambda_x", "mu_z", "lambda_z", "mu_t", "lambda_t"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")

    def p_zero(self, d, b, r_m) -> float:
        return self.mu_x * (2 * d + b) * r_m * self.lambda_x ** (-(d + 1) / 2)

    def p_plus(self, d, b, r_m) -> float:
        return self.space_like(d) + self.time_like(d, b, r_m)

    def space_like(self, d) -> float:
        return self.mu_z * d * self.lambda_z ** (-(d + 1) / 2)

    def time_like(self, d, b, r_m) -> float:
        return self.mu_t * d * b * self.lambda_t ** (-(r_m + 1) / 2)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SurgeryPoint:
    d: int
    b: int
    r_m: int
    p_zero: float
    p_plus: float
    se_zero: float = 0.0
    se_plus: float = 0.0


def _as_points(data) -> list:
    out = []
    for row in data:
        if isinstance(row, SurgeryPoint):
            out.append(row)
        else:
            out.append(SurgeryPoint(*row))
    return out


def fit_surgery(data: Iterable) -> SurgeryModel:
    """Weighted log-space fits of the P0 and P+ models.

    Rows are SurgeryPoint or tuples (d, b, r_m, P0, P+[, se0, se+]).  Rows
    with a zero rate are dropped from the corresponding fit.
    """
    pts = _as_points(data)
    ds = {p.d for p in pts}
    rs = {p.r_m for p in pts}
    if len(ds) < 2 or len(rs) < 2:
        raise ValidationError("surgery fit needs at least two distances and two round counts")
    z = [p for p in pts if p.p_zero > 0]
    x = [p for p in pts if p.p_plus > 0]
    if len({p.d for p in z}) < 2 or len({p.d for p in x}) < 2 or len({p.r_m for p in x}) < 2:
        raise ValidationError("surgery fit rejected: too few non-zero failure rates")

    # P0: linear in log space
    d0 = np.array([p.d for p in z], float)
    y0 = np.log([p.p_zero / ((2 * p.d + p.b) * p.r_m) for p in z])
    se0 = np.array([p.se_zero for p in z])
    w0 = (np.array([p.p_zero for p in z]) / se0) ** 2 if np.all(se0 > 0) else None
    a, bcoef, cov0, _ = _weighted_loglinear(-(d0 + 1) / 2, y0, w0)
    mu_x, lam_x = math.exp(a), math.exp(bcoef)

    # P+: sum of two exponentials, nonlinear least squares over log-parameters
    d1 = np.array([p.d for p in x], float)
    b1 = np.array([p.b for p in x], float)
    r1 = np.array([p.r_m for p in x], float)
    obs = np.log([p.p_plus for p in x])
    se1 = np.array([p.se_plus for p in x])
    sw = (np.array([p.p_plus for p in x]) / se1) if np.all(se1 > 0) else np.ones(len(x))

    def resid(theta):
        lmz, llz, lmt, llt = theta
        space = lmz + np.log(d1) - (d1 + 1) / 2 * llz
        time = lmt + np.log(d1 * b1) - (r1 + 1) / 2 * llt
        return (np.logaddexp(space, time) - obs) * sw

    best = None
    for lz in (0.3, 1.0, 2.5):
        for lt in (0.3, 1.0, 2.5):
            start = np.array([math.log(np.mean(np.exp(obs) / d1)) + lz, lz,
                              math.log(np.mean(np.exp(obs) / (d1 * b1))) + lt, lt])
            sol = least_squares(resid, start, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                max_nfev=20000)
            if best is None or sol.cost < best.cost:
                best = sol
    lmz, llz, lmt, llt = best.x
    errs = {"mu_x": mu_x * math.sqrt(max(cov0[0, 0], 0)), "lambda_x": lam_x * math.sqrt(max(cov0[1, 1], 0))}
    J = best.jac
    try:
        cov1 = np.linalg.pinv(J.T @ J)
        if not np.all(se1 > 0):
            dof = max(len(x) - 4, 1)
            cov1 = cov1 * (2 * best.cost / dof)
        sd = np.sqrt(np.maximum(np.diag(cov1), 0))
    except np.linalg.LinAlgError:
        sd = np.full(4, np.nan)
    vals = np.exp(best.x)
    for name, v, s in zip(("mu_z", "lambda_z", "mu_t", "lambda_t"), vals, sd):
        errs[name] = float(v * s)
    return SurgeryModel(mu_x, lam_x, float(vals[0]), float(vals[1]), float(vals[2]), float(vals[3]), errs)


def predict_surgery_error(mu: float, lam: float, mu_t: float, lam_t: float, d: int, b: int,
                          r: int, tau_b: float = 0.0, tau_d: float = 0.0) -> float:
    """mu [d(2r + tau_b + tau_d + 1) + b r] lam^-(d+1)/2 + mu_t d b lam_t^-(r+1)/2."""
    for name, v in (("d", d), ("b", b), ("r", r), ("tau_b", tau_b), ("tau_d", tau_d)):
        if v < 0:
            raise ValidationError(f"{name} must be >= 0")
    if int(d) != d or d % 2 == 0:
        raise ValidationError(f"d must be odd, got {d}")
    space = mu * (d * (2 * r + tau_b + tau_d + 1) + b * r) * lam ** (-(d + 1) / 2)
    time = mu_t * d * b * lam_t ** (-(r + 1) / 2)
    return float(space + time)


def predict_surgery_from_models(memory: SuppressionModel, surgery: SurgeryModel, d: int, b: int,
                                r: int, tau_b: float = 0.0, tau_d: float = 0.0) -> float:
    return predict_surgery_error(memory.mu, memory.lam, surgery.mu_t, surgery.lambda_t,
                                 d, b, r, tau_b, tau_d)


def synthetic_surgery_data(model: SurgeryModel, grid: Sequence[tuple]) -> list:
    return [SurgeryPoint(d, b, r, model.p_zero(d, b, r), model.p_plus(d, b, r)) for d, b, r in grid]

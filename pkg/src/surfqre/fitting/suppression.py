"""Logical error suppression laws and their log-space fits."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ..errors import InfeasibleError, ValidationError

log = logging.getLogger(__name__)

VARIANTS = ("d_squared", "per_cycle")
DEFAULT_CUT = 10 ** -2.5


@dataclass(frozen=True)
class SuppressionModel:
    """p_L(d) = mu * d^k * lam^(-(d+1)/2) with k = 2 (d_squared) or 1 (per_cycle)."""

    mu: float
    lam: float
    variant: str = "d_squared"
    mu_err: float = 0.0
    lam_err: float = 0.0
    n_points: int = 0
    residual: float = 0.0

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not (self.mu > 0 and self.lam > 0):
            raise ValidationError("mu and lambda must be positive")

    @property
    def power(self) -> int:
        return 2 if self.variant == "d_squared" else 1

    def __call__(self, d) -> float:
        return predict_infidelity(self, d)

    def to_dict(self) -> dict:
        return asdict(self)


def _model_value(mu: float, lam: float, power: int, d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    return mu * d ** power * lam ** (-(d + 1) / 2)


def predict_infidelity(model: SuppressionModel, d: int) -> float:
    if isinstance(d, bool) or int(d) != d or d < 3 or d % 2 == 0:
        raise ValidationError(f"d must be odd and >= 3, got {d}")
    if math.isinf(model.lam):
        return 0.0
    # evaluate in log space so huge d does not overflow
    logp = math.log(model.mu) + model.power * math.log(d) - (d + 1) / 2 * math.log(model.lam)
    return 1.0 if logp >= 0 else math.exp(logp)


def _weighted_loglinear(x: np.ndarray, y: np.ndarray, w: Optional[np.ndarray]):
    """Fit y = a + b x; returns (a, b, cov, residual rms)."""
    A = np.column_stack([np.ones_like(x), x])
    sw = np.ones_like(x) if w is None else np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    r = (y - A @ coef) * sw
    n = len(x)
    fisher = (A * (sw ** 2)[:, None]).T @ A
    cov = np.linalg.pinv(fisher)
    if w is None:
        cov = cov * (float(r @ r) / (n - 2) if n > 2 else 0.0)
    rms = float(np.sqrt(np.mean(((y - A @ coef)) ** 2)))
    return float(coef[0]), float(coef[1]), cov, rms


def fit_suppression(points: Iterable[Sequence[float]], variant: str = "d_squared",
                    cut: Optional[float] = DEFAULT_CUT, cut_direction: str = "above") -> SuppressionModel:
    """Weighted least squares of log p = log mu + k log d - ((d+1)/2) log lam.

    ``points`` are (d, infidelity) or (d, infidelity, std_err).  Weights are
    1/(relative std err)^2 when every point carries a positive std err,
    uniform otherwise.  ``cut_direction="above"`` drops points with
    infidelity above ``cut``; "below" drops those below it; ``cut=None``
    keeps everything.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if cut_direction not in ("above", "below"):
        raise ValidationError("cut_direction must be 'above' or 'below'")
    rows = []
    for pt in points:
        d, p = float(pt[0]), float(pt[1])
        se = float(pt[2]) if len(pt) > 2 else 0.0
        if p < 0 or not math.isfinite(p):
            raise ValidationError(f"infidelity must be non-negative, got {p}")
        if p == 0:
            log.warning("dropping d=%g: zero observed failures", d)
            continue
        if cut is not None and ((cut_direction == "above" and p > cut)
                                or (cut_direction == "below" and p < cut)):
            continue
        rows.append((d, p, se))
    if len(rows) < 2 or len({r[0] for r in rows}) < 2:
        raise ValidationError("need at least two usable points at distinct distances")
    d = np.array([r[0] for r in rows])
    p = np.array([r[1] for r in rows])
    se = np.array([r[2] for r in rows])
    k = 2 if variant == "d_squared" else 1
    x = -(d + 1) / 2
    y = np.log(p) - k * np.log(d)
    w = (p / se) ** 2 if np.all(se > 0) else None
    a, b, cov, rms = _weighted_loglinear(x, y, w)
    mu, lam = math.exp(a), math.exp(b)
    return SuppressionModel(mu, lam, variant, mu * math.sqrt(max(cov[0, 0], 0.0)),
                            lam * math.sqrt(max(cov[1, 1], 0.0)), len(rows), rms)


def synthetic_points(model: SuppressionModel, distances: Sequence[int]) -> list:
    return [(d, float(_model_value(model.mu, model.lam, model.power, d))) for d in distances]


def min_distance(model: SuppressionModel, target: float, cap: int = 199) -> int:
    """Smallest odd d >= 3 with predicted infidelity <= target."""
    for d in range(3, cap + 1, 2):
        if predict_infidelity(model, d) <= target:
            return d
    raise InfeasibleError(f"no distance <= {cap} reaches {target:g}")


__all__ = ["SuppressionModel", "fit_suppression", "predict_infidelity", "synthetic_points",
           "DEFAULT_CUT", "VARIANTS", "min_distance"]

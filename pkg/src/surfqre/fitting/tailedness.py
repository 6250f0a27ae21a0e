"""Impact of the spread of T1 across a chip on logical memory.

A calibration table of per-qubit (T1, gate and readout errors) is turned into
a generative model: T1 values are bootstrapped from the table and affinely
rescaled to a chosen standard deviation, and each error rate is drawn from a
monotone piecewise-linear regression against 1/T1.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import isotonic_regression

from ..code import RateOverrides, SurfaceCodePatch, build_memory_circuit
from ..errors import ValidationError
from ..hwmodel import HardwareParams, depolarizing_rate, derive_noise_channels
from .experiments import cell_seed, estimate_failures

log = logging.getLogger(__name__)

CALIBRATION_COLUMNS = ("qubit", "t1_s", "err_1q", "err_2q", "err_readout")
MIN_ROWS = 20


@dataclass(frozen=True)
class CalibrationTable:
    qubit: np.ndarray
    t1: np.ndarray
    err_1q: np.ndarray
    err_2q: np.ndarray
    err_readout: np.ndarray

    def __len__(self) -> int:
        return len(self.t1)

    @property
    def t1_sigma(self) -> float:
        return float(np.std(self.t1))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CALIBRATION_COLUMNS)
        for row in zip(self.qubit, self.t1, self.err_1q, self.err_2q, self.err_readout):
            w.writerow([int(row[0])] + [f"{v:.6g}" for v in row[1:]])
        return buf.getvalue()


def parse_calibration(text: str) -> CalibrationTable:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames) != CALIBRATION_COLUMNS:
        raise ValidationError(f"calibration header must be {','.join(CALIBRATION_COLUMNS)}")
    cols: Dict[str, list] = {c: [] for c in CALIBRATION_COLUMNS}
    for lineno, row in enumerate(reader, 2):
        try:
            cols["qubit"].append(int(row["qubit"]))
            for c in CALIBRATION_COLUMNS[1:]:
                cols[c].append(float(row[c]))
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"calibration line {lineno}: {exc}") from exc
    t = CalibrationTable(*(np.asarray(cols[c]) for c in CALIBRATION_COLUMNS))
    if len(t) < MIN_ROWS:
        raise ValidationError(f"calibration table needs >= {MIN_ROWS} rows, got {len(t)}")
    if not np.all(np.isfinite(t.t1)) or np.any(t.t1 <= 0):
        raise ValidationError("calibration T1 values must be positive")
    for c in CALIBRATION_COLUMNS[2:]:
        v = getattr(t, c)
        if np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v >= 1):
            raise ValidationError(f"calibration column {c} must lie in [0, 1)")
    return t


def load_calibration(path: Union[str, Path, None] = None) -> CalibrationTable:
    """Read a calibration CSV; without a path the bundled synthetic table is used."""
    if path is None:
        text = resources.files("surfqre.data").joinpath("calibration_synthetic.csv").read_text()
    else:
        text = Path(path).read_text()
    return parse_calibration(text)


def synthetic_calibration(n: int = 133, seed: int = 2024, t1_mean: float = 180e-6,
                          t1_sigma: float = 71e-6) -> CalibrationTable:
    """A heavy-low-tailed calibration table with errors that worsen as T1 drops.

    Only used to ship a reproducible stand-in for device data.
    """
    rng = np.random.default_rng(seed)
    bulk = rng.normal(1.0, 0.25, n)
    tail = rng.random(n) < 0.12
    bulk[tail] = rng.uniform(0.35, 0.6, tail.sum())
    bulk = np.clip(bulk, 0.35, None)
    z = (bulk - bulk.mean()) / bulk.std()
    t1 = t1_mean + t1_sigma * z
    us = t1 * 1e6

    def noisy(v):
        return v * rng.lognormal(0.0, 0.3, n)

    e1 = noisy(1e-4 + 0.032 / us)
    e2 = noisy(1.5e-3 + 0.24 / us)
    ro = noisy(0.008 + 1.1 / us)
    return CalibrationTable(np.arange(n), t1, e1, e2, ro)


def rescale_t1_sample(samples: Sequence[float], target_sigma: float) -> np.ndarray:
    """Affine map T1 -> mean + a (T1 - mean) giving population std ``target_sigma``."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValidationError("need at least one T1 sample")
    if not target_sigma >= 0:
        raise ValidationError(f"target_sigma must be >= 0, got {target_sigma}")
    mu = x.mean()
    s = x.std()
    if s == 0:
        if target_sigma == 0:
            return x.copy()
        raise ValidationError("cannot rescale a zero-variance sample to nonzero spread")
    return mu + (target_sigma / s) * (x - mu)


@dataclass
class MonotoneErrorModel:
    """Nondecreasing piecewise-linear map from 1/T1 to an error rate."""

    knots_x: np.ndarray
    knots_y: np.ndarray
    floor: float
    ceil: float

    @classmethod
    def fit(cls, inv_t1: np.ndarray, err: np.ndarray, n_bins: int = 8,
            ceil: float = 0.5) -> "MonotoneErrorModel":
        inv_t1 = np.asarray(inv_t1, float)
        err = np.asarray(err, float)
        order = np.argsort(inv_t1)
        bins = np.array_split(order, min(n_bins, len(order)))
        bx = np.array([inv_t1[b].mean() for b in bins])
        by = np.array([err[b].mean() for b in bins])
        w = np.array([len(b) for b in bins], float)
        fitted = isotonic_regression(by, weights=w, increasing=True).x
        return cls(bx, fitted, float(err.min()) * 0.5, ceil)

    def __call__(self, inv_t1) -> np.ndarray:
        x = np.asarray(inv_t1, float)
        kx, ky = self.knots_x, self.knots_y
        y = np.interp(x, kx, ky)
        if len(kx) > 1:
            lo = (ky[1] - ky[0]) / (kx[1] - kx[0])
            hi = (ky[-1] - ky[-2]) / (kx[-1] - kx[-2])
            y = np.where(x < kx[0], ky[0] + lo * (x - kx[0]), y)
            y = np.where(x > kx[-1], ky[-1] + hi * (x - kx[-1]), y)
        return np.clip(y, self.floor, self.ceil)


@dataclass
class ErrorModels:
    e1: MonotoneErrorModel
    e2: MonotoneErrorModel
    readout: MonotoneErrorModel

    @classmethod
    def fit(cls, calib: CalibrationTable, n_bins: int = 8) -> "ErrorModels":
        x = 1.0 / calib.t1
        # a qubit's two-qubit error is the mean over its couplers, keyed to its own 1/T1
        return cls(MonotoneErrorModel.fit(x, calib.err_1q, n_bins),
                   MonotoneErrorModel.fit(x, calib.err_2q, n_bins, ceil=0.75),
                   MonotoneErrorModel.fit(x, calib.err_readout, n_bins))


def qpu_overrides(d: int, t1: np.ndarray, models: ErrorModels) -> RateOverrides:
    """Per-qubit rates for a d x d memory patch; ``t1`` is indexed like ``patch_qubits``."""
    coords = patch_qubits(d)
    if len(t1) != len(coords):
        raise ValidationError(f"need {len(coords)} T1 values, got {len(t1)}")
    if np.any(t1 <= 0):
        raise ValidationError("rescaled T1 produced non-positive values")
    inv = 1.0 / np.asarray(t1, float)
    e1 = models.e1(inv)
    ro = models.readout(inv)
    idx = {c: k for k, c in enumerate(coords)}
    pairs = {}
    for check in SurfaceCodePatch(d).checks:
        a = check.ancilla
        for dq in check.support:
            dqf = (float(dq[0]), float(dq[1]))
            key = frozenset((a, dqf))
            e2 = float(models.e2(0.5 * (inv[idx[a]] + inv[idx[dqf]])))
            pairs[key] = depolarizing_rate(1.0 - min(e2, 0.9375), 2)
    return RateOverrides(
        t1={c: float(t1[k]) for k, c in enumerate(coords)},
        p_dep_1q={c: depolarizing_rate(1.0 - min(float(e1[k]), 0.5), 1) for k, c in enumerate(coords)},
        p_dep_2q=pairs,
        p_meas_flip={c: float(ro[k]) for k, c in enumerate(coords)},
    )


def patch_qubits(d: int) -> List[tuple]:
    patch = SurfaceCodePatch(d)
    data = [(float(x), float(y)) for x, y in patch.data_qubit_coords]
    return data + [c.ancilla for c in patch.checks]


@dataclass
class TailednessResult:
    sigmas: List[float]
    d: int
    shots: int
    infidelity: np.ndarray          # (n_sigma, n_samples)
    t1_mean: float
    sigma0: float
    errors: List[str] = field(default_factory=list)

    @property
    def means(self) -> np.ndarray:
        return np.nanmean(self.infidelity, axis=1)

    @property
    def mean_std_err(self) -> np.ndarray:
        n = np.sum(np.isfinite(self.infidelity), axis=1)
        return np.nanstd(self.infidelity, axis=1, ddof=1) / np.sqrt(n)

    def rows(self) -> List[dict]:
        out = []
        for i, s in enumerate(self.sigmas):
            for k, p in enumerate(self.infidelity[i]):
                out.append({"sigma_s": s, "sample": k, "infidelity": float(p)})
        return out

    def summary(self) -> dict:
        return {"d": self.d, "shots_per_sample": self.shots, "t1_mean_s": self.t1_mean,
                "sigma0_s": self.sigma0, "sigmas_s": list(self.sigmas),
                "mean_infidelity": [float(m) for m in self.means],
                "mean_std_err": [float(s) for s in self.mean_std_err],
                "n_samples": int(self.infidelity.shape[1]), "failed_cells": len(self.errors)}


def tailedness_study(calib: CalibrationTable, sigmas: Sequence[float], d: int, n_samples: int,
                     gate_times: HardwareParams, shots: int = 1000, seed: int = 0,
                     rounds: Optional[int] = None, threads: int = 1,
                     n_bins: int = 8) -> TailednessResult:
    """Logical infidelity of many sampled chips for each T1 spread.

    Sample k uses the same bootstrap draw and the same sampler seed for every
    sigma, so the comparison across sigmas is paired.  Gate/measurement times
    and prep/reset errors come from ``gate_times``.
    """
    if len(calib) < MIN_ROWS:
        raise ValidationError(f"calibration table needs >= {MIN_ROWS} rows")
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    for s in sigmas:
        if not s >= 0:
            raise ValidationError(f"sigma must be >= 0, got {s}")
    rounds = d if rounds is None else rounds
    models = ErrorModels.fit(calib, n_bins)
    noise = derive_noise_channels(gate_times)
    n_q = len(patch_qubits(d))
    mu = float(calib.t1.mean())
    sigma0 = calib.t1_sigma
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 7]))
    draws = rng.integers(0, len(calib), size=(n_samples, n_q))
    out = np.full((len(sigmas), n_samples), np.nan)
    errors: List[str] = []
    for i, s in enumerate(sigmas):
        pool = rescale_t1_sample(calib.t1, s)
        for k in range(n_samples):
            try:
                ov = qpu_overrides(d, pool[draws[k]], models)
                circuit = build_memory_circuit(d, rounds, noise, ov)
                fails = estimate_failures(circuit, shots, cell_seed(seed, "tail", k), threads)
                out[i, k] = fails / shots
            except ValidationError as exc:
                errors.append(f"sigma={s} sample={k}: {exc}")
                log.warning("tailedness sample failed: %s", exc)
    return TailednessResult(list(map(float, sigmas)), d, shots, out, mu, sigma0, errors)

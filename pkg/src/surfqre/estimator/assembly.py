"""Distillation error recursion, code-distance selection and footprint/runtime assembly."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import InfeasibleError, ValidationError
from ..fitting.suppression import SuppressionModel, predict_infidelity
from ..hwmodel import HardwareParams, logical_cycle_time

log = logging.getLogger(__name__)

DEFAULT_CAP = 199
DEFAULT_E_PREP = 1e-3
UNIT_TILES = 30
UNIT_CYCLES = 6
MAX_LEVELS = 4


def _check_prob(name: str, v: float) -> None:
    if not (isinstance(v, (int, float, np.floating)) and 0.0 <= v <= 1.0):
        raise ValidationError(f"{name} must be a probability in [0, 1], got {v}")


def msf_chain_error(e_prep: float, e_mem_per_level: Sequence[float], L: int) -> float:
    """Error of magic states delivered to the core after L rounds of 15-to-1 distillation."""
    if L < 1:
        raise ValidationError(f"L must be >= 1, got {L}")
    if len(e_mem_per_level) != L:
        raise ValidationError(f"need {L} memory errors, got {len(e_mem_per_level)}")
    _check_prob("e_prep", e_prep)
    for v in e_mem_per_level:
        _check_prob("e_mem", v)
    return float(_chain(np.float64(e_prep), [np.float64(v) for v in e_mem_per_level]))


def _chain(e_in, e_mem):
    # vectorizes over leading array axes of e_in / e_mem entries
    for em in e_mem:
        e_out = np.minimum(35.0 * e_in ** 3 + 7.1 * em, 1.0)
        e_in = 1.0 - (1.0 - e_out) * (1.0 - em)
    return e_in


@dataclass(frozen=True)
class MagicThreshold:
    threshold: float
    p_cliff: float

    @property
    def feasible(self) -> bool:
        return self.threshold > 0

    def acceptance(self, p_magic: float) -> float:
        return 1.0 - 15.0 * p_magic - 356.0 * self.p_cliff

    def __iter__(self):
        return iter((self.acceptance, self.threshold))


def magic_threshold(p_cliff: float) -> MagicThreshold:
    """Acceptance probability of one 15-to-1 round and the input-error threshold."""
    if not 0.0 <= p_cliff < 1.0:
        raise ValidationError(f"p_cliff must lie in [0, 1), got {p_cliff}")
    thr = (1.0 - 356.0 * p_cliff) / 15.0
    if abs(thr) < 1e-15:
        thr = 0.0
    if thr <= 0:
        log.warning("distillation infeasible at this Clifford error (p_cliff=%g)", p_cliff)
    return MagicThreshold(thr, p_cliff)


def core_tiles(Q: int) -> float:
    return 2 * Q + math.sqrt(8 * Q) + 29


def memory_errors(model: SuppressionModel, distances) -> np.ndarray:
    d = np.asarray(distances, float)
    logp = math.log(model.mu) + model.power * np.log(d) - (d + 1) / 2 * math.log(model.lam)
    return np.exp(np.minimum(logp, 0.0))


def unit_counts(distances: Sequence[int], d_core: int, unit_cycles: int = UNIT_CYCLES) -> List[int]:
    """Units per level so production matches consumption.

    A unit at level l emits one state per ``unit_cycles`` logical cycles of its
    own distance (unit_cycles * d_l rounds); the core consumes one state per
    logical cycle (d_core rounds) and each output needs 15 inputs.
    """
    units = np.asarray(_units_array(np.asarray(distances, float)[None, :], d_core, unit_cycles))[0]
    return [int(u) for u in units]


def _units_array(D: np.ndarray, d_core: int, unit_cycles: int) -> np.ndarray:
    n, L = D.shape
    units = np.zeros((n, L))
    units[:, L - 1] = np.ceil(unit_cycles * D[:, L - 1] / d_core - 1e-9)
    for l in range(L - 2, -1, -1):
        units[:, l] = np.ceil(units[:, l + 1] * 15.0 * D[:, l] / D[:, l + 1] - 1e-9)
    return units


@dataclass(frozen=True)
class DistanceSelection:
    L: int
    distances: Tuple[int, ...]
    d_core: int
    E_core: float
    e_core_required: float
    e_core: float
    units: Tuple[int, ...]
    msf_qubits: int


def _core_distance(model: SuppressionModel, Q: int, T: int, budget_core: float, cap: int) -> int:
    k = core_tiles(Q) * T
    for d in range(3, cap + 1, 2):
        if k * predict_infidelity(model, d) <= budget_core:
            return d
    raise InfeasibleError(f"no core distance <= {cap} meets the core budget {budget_core:g}")


def select_distances(model: SuppressionModel, Q: int, T: int, budget: float,
                     e_prep: float = DEFAULT_E_PREP, cap: int = DEFAULT_CAP,
                     core_fraction: float = 0.5, unit_tiles: int = UNIT_TILES,
                     unit_cycles: int = UNIT_CYCLES, max_levels: int = MAX_LEVELS
                     ) -> DistanceSelection:
    """Core distance first, then the fewest distillation levels that fit the rest of the budget.

    Among the level distances that meet the required core-input error the
    choice minimizes distillation physical qubits.
    """
    if not model.lam > 1:
        raise InfeasibleError(f"model is not below threshold (lambda={model.lam})")
    if Q < 1 or T < 1:
        raise ValidationError("Q and T must be >= 1")
    if not 0 < budget < 1:
        raise ValidationError(f"budget must lie in (0, 1), got {budget}")
    if not 0 < core_fraction < 1:
        raise ValidationError("core_fraction must lie in (0, 1)")
    _check_prob("e_prep", e_prep)
    d_core = _core_distance(model, Q, T, core_fraction * budget, cap)
    E_core = core_tiles(Q) * T * predict_infidelity(model, d_core)
    req = (budget - E_core) / T
    choices = np.arange(3, d_core + 1, 2)
    for L in range(1, max_levels + 1):
        combos = np.array(list(itertools.combinations_with_replacement(choices.tolist(), L)),
                          dtype=float)
        err = _chain(np.full(len(combos), float(e_prep)),
                     [memory_errors(model, combos[:, l]) for l in range(L)])
        ok = err <= req
        if not ok.any():
            continue
        D = combos[ok]
        units = _units_array(D, d_core, unit_cycles)
        qubits = np.sum(units * unit_tiles * 2 * D ** 2, axis=1)
        # ties broken by the smallest achieved error
        best = np.lexsort((err[ok], qubits))[0]
        dist = tuple(int(v) for v in D[best])
        return DistanceSelection(L, dist, d_core, float(E_core), float(req), float(err[ok][best]),
                                 tuple(int(u) for u in units[best]), int(qubits[best]))
    raise InfeasibleError(f"no distillation chain with <= {max_levels} levels and distances "
                          f"<= {d_core} reaches e_core={req:g}")


@dataclass(frozen=True)
class ResourceEstimate:
    Q: int
    T: int
    budget: float
    e_prep: float
    L: int
    distances: Tuple[int, ...]
    d_core: int
    units: Tuple[int, ...]
    core_tiles: int
    unit_tiles: int
    physical_qubits: int
    core_qubits: int
    msf_qubits: int
    logical_cycles: int
    cycle_time_s: float
    runtime_seconds: float
    E_core: float
    e_core_required: float
    e_core: float
    e_mem: Tuple[float, ...]
    mu: float
    lam: float
    single_meas: bool = False

    @property
    def runtime_days(self) -> float:
        return self.runtime_seconds / 86400.0

    @property
    def runtime_years(self) -> float:
        return self.runtime_seconds / (365.25 * 86400.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["runtime_days"] = self.runtime_days
        d["runtime_years"] = self.runtime_years
        return d


def assemble(Q: int, T: int, model: SuppressionModel, params: HardwareParams, budget: float,
             e_prep: float = DEFAULT_E_PREP, cap: int = DEFAULT_CAP, core_fraction: float = 0.5,
             unit_tiles: int = UNIT_TILES, unit_cycles: int = UNIT_CYCLES,
             single_meas: bool = False) -> ResourceEstimate:
    """Serial-schedule footprint and runtime: one logical cycle per T gate."""
    if Q < 1:
        raise ValidationError("Q must be >= 1")
    if T < 0 or int(T) != T:
        raise ValidationError(f"T must be a non-negative integer, got {T}")
    T = int(T)
    tiles = int(math.ceil(core_tiles(Q)))
    if T == 0:
        d_core = 3
        sel = DistanceSelection(0, (), d_core, 0.0, 0.0, 0.0, (), 0)
    else:
        sel = select_distances(model, Q, T, budget, e_prep, cap, core_fraction, unit_tiles,
                               unit_cycles)
        d_core = sel.d_core
    core_q = tiles * 2 * d_core ** 2
    cycle = logical_cycle_time(params, d_core, single_meas)
    e_mem = tuple(float(v) for v in memory_errors(model, sel.distances)) if sel.L else ()
    return ResourceEstimate(
        Q=int(Q), T=T, budget=budget, e_prep=e_prep, L=sel.L, distances=sel.distances,
        d_core=d_core, units=sel.units, core_tiles=tiles, unit_tiles=unit_tiles,
        physical_qubits=core_q + sel.msf_qubits, core_qubits=core_q, msf_qubits=sel.msf_qubits,
        logical_cycles=T, cycle_time_s=cycle, runtime_seconds=T * cycle, E_core=sel.E_core,
        e_core_required=sel.e_core_required, e_core=sel.e_core, e_mem=e_mem,
        mu=model.mu, lam=model.lam, single_meas=single_meas)


@dataclass(frozen=True)
class Embedding:
    n_drs: int
    interconnects_per_boundary: int

    def __iter__(self):
        return iter((self.n_drs, self.interconnects_per_boundary))


def multi_dr_embed(estimate, dr_capacity: int, d_core: Optional[int] = None) -> Embedding:
    """Split a footprint over dilution refrigerators of fixed capacity.

    ``estimate`` is a ResourceEstimate or a plain physical-qubit count.
    """
    if not dr_capacity > 0:
        raise ValidationError(f"dr_capacity must be > 0, got {dr_capacity}")
    if isinstance(estimate, ResourceEstimate):
        qubits = estimate.physical_qubits
        d_core = estimate.d_core if d_core is None else d_core
    else:
        qubits = int(estimate)
    if d_core is None:
        raise ValidationError("d_core is required when a qubit count is given")
    n = max(1, math.ceil(qubits / dr_capacity))
    return Embedding(n, int(d_core) if n > 1 else 0)

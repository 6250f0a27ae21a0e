"""Monte Carlo experiments: memory, sensitivity sweeps, teleportation and cuts."""

from __future__ import annotations

import dataclasses
import hashlib
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

from ..code import StabCircuit, TeleportSpec, build_memory_circuit, build_teleport_circuit
from ..decoder import build_detector_graph, count_failures
from ..errors import SurfqreError, ValidationError
from ..hwmodel import HardwareParams, NoiseChannelSet, derive_noise_channels
from ..stabsim import enumerate_faults, sample_blocks
from .suppression import SuppressionModel, fit_suppression
from .surgery import SurgeryPoint

log = logging.getLogger(__name__)

GROUPS = {
    "coherence": ("t1", "t2"),
    "gates": ("err_1q", "err_2q"),
    "spam": ("err_prep", "err_meas", "err_reset"),
}
GROUPS["all"] = GROUPS["coherence"] + GROUPS["gates"] + GROUPS["spam"]


def cell_seed(seed: int, *keys) -> int:
    """Independent 63-bit seed for one grid cell, stable across runs and platforms."""
    h = hashlib.sha256(repr((int(seed),) + tuple(keys)).encode()).digest()
    return int.from_bytes(h[:8], "little") >> 1


def _noise(hw: Union[HardwareParams, NoiseChannelSet], single_meas: bool = False) -> NoiseChannelSet:
    if isinstance(hw, NoiseChannelSet):
        return hw
    return derive_noise_channels(hw, single_meas=single_meas)


def _check_shots(shots: int) -> None:
    if isinstance(shots, bool) or int(shots) != shots or shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")


def estimate_failures(circuit: StabCircuit, shots: int, seed: int, threads: int = 1) -> int:
    """Sample ``shots`` shots, decode them and count logical failures."""
    _check_shots(shots)
    graph = build_detector_graph(enumerate_faults(circuit))
    fails = 0
    for block in sample_blocks(circuit, shots, seed):
        fails += count_failures(graph, block, threads)
    return fails


@dataclass(frozen=True)
class RateResult:
    shots: int
    failures: int

    @property
    def rate(self) -> float:
        return self.failures / self.shots

    @property
    def std_err(self) -> float:
        p = self.rate
        return math.sqrt(p * (1 - p) / self.shots)


@dataclass(frozen=True)
class MemoryResult(RateResult):
    d: int = 0
    rounds: int = 0

    def row(self) -> dict:
        return {"d": self.d, "rounds": self.rounds, "shots": self.shots, "failures": self.failures,
                "infidelity": self.rate, "std_err": self.std_err}


def run_memory(hw: Union[HardwareParams, NoiseChannelSet], distances: Sequence[int], shots: int,
               seed: int, rounds: Optional[int] = None, threads: int = 1) -> List[MemoryResult]:
    """Memory experiment at each distance (``rounds`` defaults to d)."""
    _check_shots(shots)
    noise = _noise(hw)
    out = []
    for d in distances:
        r = d if rounds is None else rounds
        circuit = build_memory_circuit(d, r, noise)
        fails = estimate_failures(circuit, shots, cell_seed(seed, "memory", d, r), threads)
        out.append(MemoryResult(shots, fails, d, r))
    return out


def fit_memory(results: Sequence[MemoryResult], variant: str = "d_squared",
               cut: Optional[float] = None) -> SuppressionModel:
    return fit_suppression([(r.d, r.rate, r.std_err) for r in results], variant, cut=cut)


# --- sensitivity -----------------------------------------------------------------

def improve_params(base: HardwareParams, group: str, factor: float) -> HardwareParams:
    """Divide the group's error rates by ``factor`` (multiply T1/T2 for coherence)."""
    if group not in GROUPS:
        raise ValidationError(f"group must be one of {sorted(GROUPS)}, got {group!r}")
    if not factor >= 1:
        raise ValidationError(f"improvement factor must be >= 1, got {factor}")
    changes = {}
    for name in GROUPS[group]:
        v = getattr(base, name)
        changes[name] = v * factor if name in ("t1", "t2") else v / factor
    return dataclasses.replace(base, **changes)


@dataclass
class SensitivityPoint:
    group: str
    factor: float
    lam: float = math.nan
    lam_err: float = math.nan
    mu: float = math.nan
    results: List[MemoryResult] = dataclasses.field(default_factory=list)
    error: Optional[str] = None


def sensitivity_sweep(base: HardwareParams, group: str, factors: Sequence[float],
                      distances: Sequence[int] = (3, 5, 7), shots: int = 100_000, seed: int = 0,
                      cut: Optional[float] = None, threads: int = 1) -> List[SensitivityPoint]:
    """Fitted lambda for each improvement factor; failed cells carry ``error``.

    All cells reuse the same per-distance seeds so differences between groups
    and factors are not dominated by sampling noise.
    """
    out = []
    for f in factors:
        pt = SensitivityPoint(group, float(f))
        try:
            hw = improve_params(base, group, f)
            pt.results = run_memory(hw, distances, shots, seed, threads=threads)
            model = fit_memory(pt.results, cut=cut)
            pt.lam, pt.lam_err, pt.mu = model.lam, model.lam_err, model.mu
        except (SurfqreError, ValueError) as exc:
            pt.error = str(exc)
            log.warning("sensitivity cell %s x%g failed: %s", group, f, exc)
        out.append(pt)
    return out


# --- teleportation -----------------------------------------------------------------

@dataclass(frozen=True)
class TeleportResult(RateResult):
    spec: Optional[TeleportSpec] = None


def run_teleport(spec: TeleportSpec, hw: Union[HardwareParams, NoiseChannelSet], shots: int,
                 seed: int, threads: int = 1) -> TeleportResult:
    noise = _noise(hw)
    circuit = build_teleport_circuit(spec, noise)
    key = (spec.d, spec.b, spec.r_pm, spec.r_m, spec.r_s, spec.source_state, spec.n_cuts,
           None if spec.p_link is None else round(spec.p_link, 12))
    fails = estimate_failures(circuit, shots, cell_seed(seed, "teleport", *key), threads)
    return TeleportResult(shots, fails, spec)


def teleport_grid(distances: Sequence[int], bus_factors: Sequence[int], round_factors: Sequence[int],
                  hw: Union[HardwareParams, NoiseChannelSet], shots: int, seed: int,
                  threads: int = 1) -> List[SurgeryPoint]:
    """P0 and P+ for b = k_b d and r_m = k_r d over the grid."""
    out = []
    for d in distances:
        for kb in bus_factors:
            for kr in round_factors:
                b, r = kb * d, kr * d
                z = run_teleport(TeleportSpec(d, b, r_m=r, source_state="zero"), hw, shots, seed, threads)
                x = run_teleport(TeleportSpec(d, b, r_m=r, source_state="plus"), hw, shots, seed, threads)
                out.append(SurgeryPoint(d, b, r, z.rate, x.rate, z.std_err, x.std_err))
    return out


@dataclass
class CutCell:
    d: int
    p_link: Optional[float]
    n_cuts: int
    p_zero: float = math.nan
    se_zero: float = math.nan
    p_plus: float = math.nan
    se_plus: float = math.nan
    error: Optional[str] = None


def cut_threshold_scan(d_list: Sequence[int], p_link_list: Sequence[Optional[float]],
                       template: Dict, hw: Union[HardwareParams, NoiseChannelSet], shots: int,
                       seed: int, threads: int = 1) -> List[CutCell]:
    """Teleportation failure rates over (d, p_link).

    ``template`` holds TeleportSpec fields other than d, source_state and
    p_link; ``b`` and ``r_m`` may be given as callables of d.  A p_link of
    None runs the same geometry without cuts.
    """
    out = []
    for d in d_list:
        for pl in p_link_list:
            fields = {k: (v(d) if callable(v) else v) for k, v in template.items()}
            n_cuts = int(fields.pop("n_cuts", 0)) if pl is not None else 0
            fields.pop("n_cuts", None)
            cell = CutCell(d, pl, n_cuts)
            try:
                rates = {}
                for state in ("zero", "plus"):
                    spec = TeleportSpec(d=d, source_state=state, n_cuts=n_cuts, p_link=pl, **fields)
                    rates[state] = run_teleport(spec, hw, shots, seed, threads)
                cell.p_zero, cell.se_zero = rates["zero"].rate, rates["zero"].std_err
                cell.p_plus, cell.se_plus = rates["plus"].rate, rates["plus"].std_err
            except (SurfqreError, ValueError) as exc:
                cell.error = str(exc)
                log.warning("cut cell d=%d p_link=%s failed: %s", d, pl, exc)
            out.append(cell)
    return out

"""Hardware parameter sets and the circuit-level noise channels derived from them."""

from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping, Union

from .errors import ValidationError

PRESETS = ("baseline", "target", "desired", "ibm_torino")

PROB_FIELDS = ("err_1q", "err_2q", "err_prep", "err_meas", "err_reset")
TIME_FIELDS = ("t1", "t2", "time_1q", "time_2q", "time_prep", "time_meas", "time_reset")
ALL_FIELDS = (
    "t1", "t2", "err_1q", "err_2q", "err_prep", "err_meas", "err_reset",
    "time_1q", "time_2q", "time_prep", "time_meas", "time_reset", "t1_tailedness",
)

_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ns": 1e-9}
_DURATION_RE = re.compile(r"^\s*([0-9eE.+\-]+)\s*(s|ms|us|µs|μs|ns)?\s*$")


def parse_duration(value: Union[str, float, int]) -> float:
    """Convert ``"100us"``, ``"25 ns"`` or a bare number of seconds to seconds."""
    if isinstance(value, bool):
        raise ValidationError(f"invalid duration {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    m = _DURATION_RE.match(str(value))
    if m is None:
        raise ValidationError(f"invalid duration {value!r}")
    try:
        number = float(m.group(1))
    except ValueError as exc:
        raise ValidationError(f"invalid duration {value!r}") from exc
    return number * _UNITS[m.group(2) or "s"]


@dataclass(frozen=True)
class HardwareParams:
    """Physical error rates and operation times of a superconducting QPU.

    Times are in seconds.  ``t1_tailedness`` is the standard deviation of the
    per-qubit T1 distribution.
    """

    t1: float
    t2: float
    err_1q: float
    err_2q: float
    err_prep: float
    err_meas: float
    err_reset: float
    time_1q: float
    time_2q: float
    time_prep: float
    time_meas: float
    time_reset: float
    t1_tailedness: float = 0.0

    def __post_init__(self) -> None:
        for name in ALL_FIELDS:
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"field {name!r} must be a finite number, got {v!r}")
        for name in PROB_FIELDS:
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValidationError(f"field {name!r}={v} violates 0 <= p < 1")
        for name in TIME_FIELDS:
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"field {name!r} must be > 0")
        if self.t1_tailedness < 0.0:
            raise ValidationError("field 't1_tailedness' must be >= 0")

    def replace(self, **changes: float) -> "HardwareParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class NoiseChannelSet:
    """Channel strengths used by the circuit builders.

    ``t1`` is kept so the idle channel can be evaluated for any layer duration.
    """

    p_dep_1q: float
    p_dep_2q: float
    p_prep_flip: float
    p_meas_flip: float
    p_reset_flip: float
    t1: float
    time_1q: float
    time_2q: float
    time_prep: float
    time_meas: float
    time_reset: float
    # rounds last T_M + 4 T_2q + 2 T_1q + T_M + T_R; True drops the second T_M
    single_meas: bool = False

    @property
    def idle_rate_fn(self) -> Callable[[float], float]:
        if math.isinf(self.t1):
            return lambda duration: 0.0
        return lambda duration: idle_error_rate(duration, self.t1)

    def idle_rate(self, duration: float) -> float:
        return self.idle_rate_fn(duration)

    @classmethod
    def noiseless(cls, params: "HardwareParams | None" = None) -> "NoiseChannelSet":
        p = params or preset("baseline")
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, math.inf,
                   p.time_1q, p.time_2q, p.time_prep, p.time_meas, p.time_reset)

    def round_time(self) -> float:
        n_meas = 1 if self.single_meas else 2
        return n_meas * self.time_meas + 4 * self.time_2q + 2 * self.time_1q + self.time_reset

    def is_noiseless(self) -> bool:
        return (self.p_dep_1q == self.p_dep_2q == self.p_prep_flip == self.p_meas_flip
                == self.p_reset_flip == 0.0 and math.isinf(self.t1))


def depolarizing_rate(fidelity: float, n_qubits: int) -> float:
    """Depolarizing rate p with average gate fidelity F.

    Inverts F = 1 - ((2^n - 1) 2^n / (2^{2n} - 1)) p.
    """
    if n_qubits not in (1, 2):
        raise ValidationError(f"n_qubits must be 1 or 2, got {n_qubits}")
    if not 0.0 <= fidelity <= 1.0:
        raise ValidationError(f"fidelity must lie in [0, 1], got {fidelity}")
    dim = 2 ** n_qubits
    coeff = (dim - 1) * dim / (dim * dim - 1)
    return (1.0 - fidelity) / coeff


def idle_error_rate(duration: float, t1: float) -> float:
    """Single-qubit depolarizing rate (3/4)(1 - exp(-t/T1)) for an idle period."""
    if duration < 0:
        raise ValidationError(f"duration must be >= 0, got {duration}")
    if not t1 > 0:
        raise ValidationError(f"t1 must be > 0, got {t1}")
    return 0.75 * -math.expm1(-duration / t1)


def derive_noise_channels(params: HardwareParams, single_meas: bool = False) -> NoiseChannelSet:
    return NoiseChannelSet(
        p_dep_1q=depolarizing_rate(1.0 - params.err_1q, 1),
        p_dep_2q=depolarizing_rate(1.0 - params.err_2q, 2),
        p_prep_flip=params.err_prep,
        p_meas_flip=params.err_meas,
        p_reset_flip=params.err_reset,
        t1=params.t1,
        time_1q=params.time_1q,
        time_2q=params.time_2q,
        time_prep=params.time_prep,
        time_meas=params.time_meas,
        time_reset=params.time_reset,
        single_meas=single_meas,
    )


def logical_cycle_time(params: HardwareParams, d: int, single_meas: bool = False) -> float:
    """Duration of one logical cycle, i.e. d parity-check rounds.

    A round lasts T_M + 4 T_2q + 2 T_1q + T_M + T_reset.  ``single_meas``
    drops the second T_M term.
    """
    if isinstance(d, bool) or int(d) != d or d < 1 or d % 2 == 0:
        raise ValidationError(f"d must be a positive odd integer, got {d}")
    n_meas = 1 if single_meas else 2
    round_time = (n_meas * params.time_meas + 4 * params.time_2q
                  + 2 * params.time_1q + params.time_reset)
    return d * round_time


def params_from_mapping(data: Mapping) -> HardwareParams:
    if not isinstance(data, Mapping):
        raise ValidationError("hardware description must be a JSON object")
    missing = [f for f in ALL_FIELDS if f not in data]
    if missing:
        raise ValidationError(f"missing field {missing[0]!r}")
    unknown = sorted(set(data) - set(ALL_FIELDS))
    if unknown:
        raise ValidationError(f"unknown field {unknown[0]!r}")
    values = {}
    for name in ALL_FIELDS:
        raw = data[name]
        if name in TIME_FIELDS or name == "t1_tailedness":
            values[name] = parse_duration(raw)
        else:
            if isinstance(raw, bool) or not isinstance(raw, (int, float)):
                raise ValidationError(f"field {name!r} must be a number")
            values[name] = float(raw)
    return HardwareParams(**values)


def load_hardware_params(path: Union[str, Path]) -> HardwareParams:
    """Load and validate a hardware JSON file (see docs/formats.md)."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: JSON parse error: {exc}") from exc
    return params_from_mapping(data)


def preset(name: str) -> HardwareParams:
    """Return one of the shipped parameter sets."""
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("surfqre.data").joinpath(f"{name}.json").read_text()
    return params_from_mapping(json.loads(text))


def resolve_hardware(spec: str) -> HardwareParams:
    """Accept either a preset name or a path to a JSON file."""
    if spec in PRESETS:
        return preset(spec)
    return load_hardware_params(spec)

"""Logical-circuit summary files."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Union

from ..errors import ValidationError

ALGORITHMS = ("trotter", "qubitization")


@dataclass(frozen=True)
class LogicalSummary:
    num_data_qubits: int
    t_count: int
    algorithm: str
    notes: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def parse_logical_summary(text: str) -> LogicalSummary:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"summary JSON parse error: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("summary must be a JSON object")
    for key in ("num_data_qubits", "t_count", "algorithm"):
        if key not in data:
            raise ValidationError(f"summary missing field {key!r}")
    q, t = data["num_data_qubits"], data["t_count"]
    for name, v in (("num_data_qubits", q), ("t_count", t)):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v) or v < 0:
            raise ValidationError(f"{name} must be a non-negative integer")
    if q < 1:
        raise ValidationError("num_data_qubits must be >= 1")
    if data["algorithm"] not in ALGORITHMS:
        raise ValidationError(f"algorithm must be one of {ALGORITHMS}")
    notes = data.get("notes", "")
    return LogicalSummary(int(q), int(t), data["algorithm"], "" if notes is None else str(notes))


def load_logical_summary(path: Union[str, Path]) -> LogicalSummary:
    return parse_logical_summary(Path(path).read_text())

"""Suppression-law fits and the hardware studies built on Monte Carlo runs."""

from .experiments import (GROUPS, CutCell, MemoryResult, SensitivityPoint, TeleportResult,
                          cell_seed, cut_threshold_scan, estimate_failures, fit_memory,
                          improve_params, run_memory, run_teleport, sensitivity_sweep,
                          teleport_grid)
from .suppression import (DEFAULT_CUT, VARIANTS, SuppressionModel, fit_suppression, min_distance,
                          predict_infidelity, synthetic_points)
from .surgery import (SurgeryModel, SurgeryPoint, fit_surgery, predict_surgery_error,
                      predict_surgery_from_models, synthetic_surgery_data)
from .tailedness import (CalibrationTable, ErrorModels, MonotoneErrorModel, TailednessResult,
                         load_calibration, parse_calibration, rescale_t1_sample,
                         synthetic_calibration, tailedness_study)

__all__ = [
    "GROUPS", "CutCell", "MemoryResult", "SensitivityPoint", "TeleportResult", "cell_seed",
    "cut_threshold_scan", "estimate_failures", "fit_memory", "improve_params", "run_memory",
    "run_teleport", "sensitivity_sweep", "teleport_grid", "DEFAULT_CUT", "VARIANTS",
    "SuppressionModel", "fit_suppression", "min_distance", "predict_infidelity",
    "synthetic_points", "SurgeryModel", "SurgeryPoint", "fit_surgery", "predict_surgery_error",
    "predict_surgery_from_models", "synthetic_surgery_data", "CalibrationTable", "ErrorModels",
    "MonotoneErrorModel", "TailednessResult", "load_calibration", "parse_calibration",
    "rescale_t1_sample", "synthetic_calibration", "tailedness_study",
]

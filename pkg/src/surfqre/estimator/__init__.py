from .assembly import (DEFAULT_CAP, DEFAULT_E_PREP, UNIT_CYCLES, UNIT_TILES, DistanceSelection,
                       Embedding, MagicThreshold, ResourceEstimate, assemble, core_tiles,
                       magic_threshold, memory_errors, msf_chain_error, multi_dr_embed,
                       select_distances, unit_counts)
from .classical import (DMRGTime, FCITime, classical_dmrg_time, classical_fci_time,
                        fci_determinants, fit_dmrg)
from .qubitization import DFFactor, QubitizationPlan, double_factorize, qubitization_budget, reconstruct
from .summary import LogicalSummary, load_logical_summary, parse_logical_summary
from .trotter import (BudgetSplit, CommutatorSums, TrotterPlan, anticommutation_matrix,
                      commutator_sums, energy_error, optimize_budget, plan_trotter, qpe_repetitions,
                      synthesis_budget, trotter_bound, trotter_slices)

__all__ = [n for n in dir() if not n.startswith("_")]

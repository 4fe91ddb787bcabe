"""Sparse online learning by truncated gradient descent.

Includes an estimator-level emulation of the quantum variant with a query
ledger, a bit-exact reversible truncation circuit and a regret harness.
"""

from .circuits import FixedPointFormat, ToffoliModel, truncation_circuit, truncate_fixed
from .config import RunConfig
from .data import Dataset, DatasetSpec, Example, load_dataset, normalize_to_ball, synth_dataset
from .emulation import (EstimatorSpec, QueryLedger, ae_emulate, est_inner_product, est_l1_norm,
                        ledger_total, sample_index)
from .engine import EngineParams, audit_mode, run_quantum_emulated, theorem_presets
from .lazy_oracle import ExampleAccess, LazyWeightOracle
from .losses import ProblemKind, loss_constants, loss_grad_scalar, loss_value
from .regret import (best_fixed_comparator, fact_c1_check, regularized_regret_lhs,
                     scaling_experiment, theorem_rhs)
from .trace import RunTrace, TraceRow
from .truncation import (GravitySchedule, TruncationParams, classical_online_run, truncate_entry,
                         truncate_vector)

__version__ = "0.1.0"

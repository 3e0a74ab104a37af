"""halolab: hybrid-parallel block-grid halo-exchange proxy benchmark.

A single-process stand-in for a rank x thread finite-volume code: simulated
ranks exchange ghost-cell slabs through an in-memory transport while worker
threads advance scalar advection or ideal-gas Euler on a cubic block grid.
The package measures per-phase timing, checks bitwise decomposition
invariance, and converts wall time into an energy/CO2 estimate.
"""

__version__ = "1.0.0"

from .bench import FUSED, SPLIT_OVERLAP, ImbalanceProfile, RunConfig, \
    RunResult, SweepRow, SweepSpec, run_once, run_sweep
from .csvio import CSV_HEADER, emit_csv, parse_csv
from .exchange import HaloPlan, build_plan, exchange_fused, \
    exchange_split_overlap
from .grid import NGHOST, Block, BlockId, Decomposition, GridConfig, \
    decompose, morton_decode, morton_encode
from .metrics import EnergyModel, PhaseTimes, RunMetrics, cellupdates, \
    co2_equivalent, energy_to_solution, epc6, speedup_efficiency
from .runtime import COPY_THROUGH, SHARED_HANDOFF, DeadlockError, \
    RankContext, Scheduling, spawn_ranks
from .solver import PhysicsSystem, SolverConfig, SolverError
from .validate import run_validation

__all__ = [
    "__version__", "FUSED", "SPLIT_OVERLAP", "ImbalanceProfile", "RunConfig",
    "RunResult", "SweepRow", "SweepSpec", "run_once", "run_sweep",
    "CSV_HEADER", "emit_csv", "parse_csv", "HaloPlan", "build_plan",
    "exchange_fused", "exchange_split_overlap", "NGHOST", "Block", "BlockId",
    "Decomposition", "GridConfig", "decompose", "morton_decode",
    "morton_encode", "EnergyModel", "PhaseTimes", "RunMetrics", "cellupdates",
    "co2_equivalent", "energy_to_solution", "epc6", "speedup_efficiency",
    "COPY_THROUGH", "SHARED_HANDOFF", "DeadlockError", "RankContext",
    "Scheduling", "spawn_ranks", "PhysicsSystem", "SolverConfig",
    "SolverError", "run_validation",
]

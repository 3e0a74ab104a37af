"""HTTP service exposing run, sweep and validate over FastAPI.

The service wraps the same core entry points the CLI uses; responses carry
the frozen CSV text so downstream tooling consumes one schema everywhere.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .bench import FUSED, ImbalanceProfile, RunConfig, SweepSpec, SweepRow, \
    run_id_for, run_once, run_sweep
from .csvio import csv_text
from .grid import GridConfig, GridError
from .metrics import EnergyModel
from .runtime import SHARED_HANDOFF, Scheduling
from .solver import PhysicsSystem, SolverConfig, SolverError
from .validate import run_validation

app = FastAPI(title="halolab", version=__version__)


class RunRequest(BaseModel):
    nx: int = 64
    block: int = 16
    system: str = Field("advection", pattern="^(advection|euler)$")
    velocity: tuple[float, float, float] = (1.0, 0.0, 0.0)
    gamma: float = 1.4
    reconstruction: str = Field("plm_minmod",
                                pattern="^(first_order|plm_minmod)$")
    cfl: float = 0.4
    steps: int = 10
    ranks: int = 1
    threads: int = 1
    strategy: str = Field(FUSED, pattern="^(fused|split_overlap)$")
    scheduling: str = Field("static", pattern="^(static|dynamic)$")
    chunk: int = 1
    path: str = Field(SHARED_HANDOFF, pattern="^(shared_handoff|copy_through)$")
    imbalance_k: int = 1
    imbalance_seed: int = 0
    node_power_w: float | None = None
    nodes: int = 1
    carbon_intensity: float = 275.0
    reps: int = 1


class SweepRequest(RunRequest):
    scaling: str = Field("strong", pattern="^(strong|weak)$")
    cells_per_core: int = 65536
    configs: list[tuple[int, int]] = [(1, 1)]
    strategies: list[str] = [FUSED]
    schedulings: list[str] = ["static"]
    paths: list[str] = [SHARED_HANDOFF]
    reps: int = 5


class RunRow(BaseModel):
    run_id: str
    rep: int
    wall_s: float
    mcups: float
    state_hash: str
    energy_j: float | None
    error: str


class RunResponse(BaseModel):
    rows: list[RunRow]
    csv: str


class SweepResponse(RunResponse):
    medians: dict[str, float]


class CheckOutcome(BaseModel):
    name: str
    passed: bool
    detail: str


class ValidateResponse(BaseModel):
    passed: bool
    checks: list[CheckOutcome]


def _scheduling(kind: str, chunk: int) -> Scheduling:
    return Scheduling("static_blocked") if kind == "static" \
        else Scheduling("dynamic", chunk)


def _run_config(req: RunRequest) -> RunConfig:
    system = PhysicsSystem("advection", tuple(req.velocity)) \
        if req.system == "advection" else PhysicsSystem("euler", gamma=req.gamma)
    energy = None if req.node_power_w is None else \
        EnergyModel(req.node_power_w, req.nodes, req.carbon_intensity)
    imbalance = None if req.imbalance_k <= 1 else \
        ImbalanceProfile(req.imbalance_seed, req.imbalance_k)
    return RunConfig(
        grid=GridConfig(req.nx, req.nx, req.nx, req.block), system=system,
        solver=SolverConfig(reconstruction=req.reconstruction, cfl=req.cfl),
        steps=req.steps, ranks=req.ranks, threads=req.threads,
        strategy=req.strategy, scheduling=_scheduling(req.scheduling, req.chunk),
        path=req.path, imbalance=imbalance, energy=energy)


def _row_model(row: SweepRow) -> RunRow:
    m = row.metrics
    return RunRow(run_id=row.run_id, rep=row.rep, wall_s=m.wall_s,
                  mcups=m.mcups, state_hash=m.state_hash,
                  energy_j=m.energy_j, error=m.error)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/run", response_model=RunResponse)
def run_endpoint(req: RunRequest) -> RunResponse:
    try:
        cfg = _run_config(req)
        rows = [SweepRow(run_id_for(cfg, rep), rep, run_once(cfg).metrics)
                for rep in range(req.reps)]
    except (GridError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except SolverError as exc:
        raise HTTPException(status_code=500, detail=str(exc))
    return RunResponse(rows=[_row_model(r) for r in rows], csv=csv_text(rows))


@app.post("/sweep", response_model=SweepResponse)
def sweep_endpoint(req: SweepRequest) -> SweepResponse:
    base = _run_config(req)
    try:
        spec = SweepSpec(
            scaling=req.scaling, grid=base.grid,
            cells_per_core=req.cells_per_core,
            configs=tuple(tuple(c) for c in req.configs),
            strategies=tuple(req.strategies),
            schedulings=tuple(_scheduling(s, req.chunk)
                              for s in req.schedulings),
            paths=tuple(req.paths), steps=req.steps, repetitions=req.reps,
            system=base.system, solver=base.solver,
            imbalance=base.imbalance, energy=base.energy)
        rows, medians = run_sweep(spec)
    except (GridError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    named = {f"{r}x{t}/{strat}/{sched}/{path}": wall
             for (r, t, strat, sched, path), wall in medians.items()}
    return SweepResponse(rows=[_row_model(r) for r in rows],
                         csv=csv_text(rows), medians=named)


@app.post("/validate", response_model=ValidateResponse)
def validate_endpoint() -> ValidateResponse:
    results = run_validation()
    checks = [CheckOutcome(name=r.name, passed=r.passed, detail=r.detail)
              for r in results]
    return ValidateResponse(passed=all(r.passed for r in results),
                            checks=checks)

"""Experiment orchestration: single runs, scaling sweeps, imbalance injection.

run_once executes the full pipeline for one configuration: decompose the
grid, initialize the field, then per step reduce the global timestep and
advance two stages, each preceded by a ghost-cell exchange.  A run records
per-phase times, the cellupdate count and a state hash used for
cross-configuration equality checks.

run_sweep iterates a configuration matrix (strong or weak scaling), one
configuration at a time for timing integrity, and reports medians over
repetitions.
"""

from __future__ import annotations

import hashlib
import math
import os
import statistics
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .exchange import build_plan, exchange_fused, exchange_split_overlap, slab_cells
from .grid import Block, BlockId, Decomposition, GridConfig, NGHOST, decompose
from .metrics import EnergyModel, PhaseTimes, RunMetrics, cellupdates, \
    energy_to_solution, phase
from .runtime import PATHS, RankContext, Scheduling, SHARED_HANDOFF, STATIC, \
    spawn_ranks
from .solver import PhysicsSystem, SolverConfig, compute_dt, euler_conserved, \
    flux_divergence, heun_stage2, update_block_stage

FUSED = "fused"
SPLIT_OVERLAP = "split_overlap"
STRATEGIES = (FUSED, SPLIT_OVERLAP)


class BenchError(ValueError):
    """Invalid run or sweep configuration."""


@dataclass(frozen=True)
class ImbalanceProfile:
    """Deterministic per-block work multiplier in [1, k]."""

    seed: int
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise BenchError(f"imbalance k must be >= 1, got {self.k}")

    def multiplier(self, morton: int) -> int:
        if self.k == 1:
            return 1
        h = hashlib.sha256(f"{self.seed}:{morton}".encode()).digest()
        return 1 + int.from_bytes(h[:8], "big") % self.k


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig
    system: PhysicsSystem
    solver: SolverConfig = SolverConfig()
    steps: int = 10
    ranks: int = 1
    threads: int = 1
    strategy: str = FUSED
    scheduling: Scheduling = STATIC
    path: str = SHARED_HANDOFF
    imbalance: ImbalanceProfile | None = None
    energy: EnergyModel | None = None
    watchdog_secs: float | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise BenchError(f"unknown strategy {self.strategy!r}")
        if self.path not in PATHS:
            raise BenchError(f"unknown intranode path {self.path!r}")
        if self.steps < 0 or self.ranks < 1 or self.threads < 1:
            raise BenchError("steps must be >= 0, ranks/threads >= 1")

    def canonical(self) -> str:
        return (f"grid={self.grid.nx}x{self.grid.ny}x{self.grid.nz}"
                f",B={self.grid.block_size},system={self.system.kind}"
                f",recon={self.solver.reconstruction},cfl={self.solver.cfl}"
                f",steps={self.steps},ranks={self.ranks},threads={self.threads}"
                f",strategy={self.strategy},sched={self.scheduling.label()}"
                f",path={self.path},imb={self.imbalance}")


def init_block_interior(system: PhysicsSystem, grid: GridConfig,
                        bid: BlockId) -> np.ndarray:
    """Initial condition evaluated at this block's cell centers.

    Advection: u = sin(2 pi (x+y+z)); Euler: a smooth density wave advected
    at vx = 0.1 under unit pressure.  Values depend only on global cell
    coordinates, so blocking never changes them bitwise.
    """
    b = grid.block_size
    dx, dy, dz = (grid.extent[0] / grid.nx, grid.extent[1] / grid.ny,
                  grid.extent[2] / grid.nz)
    xs = (np.arange(bid.ib * b, (bid.ib + 1) * b) + 0.5) * dx
    ys = (np.arange(bid.jb * b, (bid.jb + 1) * b) + 0.5) * dy
    zs = (np.arange(bid.kb * b, (bid.kb + 1) * b) + 0.5) * dz
    s = xs[None, None, :] + ys[None, :, None] + zs[:, None, None]
    if system.kind == "advection":
        return np.sin(2.0 * np.pi * s)[None]
    rho = 1.0 + 0.2 * np.sin(2.0 * np.pi * s)
    return euler_conserved(rho, 0.1, 0.0, 0.0, 1.0, system.gamma)


@dataclass
class RankResult:
    interiors: dict  # morton -> interior array copy
    times: PhaseTimes
    mem_bytes: int


@dataclass
class RunResult:
    metrics: RunMetrics
    interiors: dict  # morton -> interior array (global, merged from ranks)

    def assemble_field(self, decomp: Decomposition) -> np.ndarray:
        """Full interior field [nvar, nz, ny, nx] from per-block interiors."""
        g = decomp.grid
        b = g.block_size
        nvar = next(iter(self.interiors.values())).shape[0]
        out = np.empty((nvar, g.nz, g.ny, g.nx))
        for bid in decomp.block_ids:
            blk = self.interiors[bid.morton]
            out[:, bid.kb * b:(bid.kb + 1) * b,
                bid.jb * b:(bid.jb + 1) * b,
                bid.ib * b:(bid.ib + 1) * b] = blk
        return out


def state_hash(interiors: dict) -> str:
    """sha256 over per-block digests in Morton order."""
    h = hashlib.sha256()
    for morton in sorted(interiors):
        h.update(hashlib.sha256(
            np.ascontiguousarray(interiors[morton]).tobytes()).digest())
    return h.hexdigest()


def _stage_tasks(blocks, scratch, stage, dt, dx, cfg: RunConfig):
    """One closure per local block; tasks touch pairwise-disjoint blocks."""
    system, solver = cfg.system, cfg.solver
    g = NGHOST

    def make(morton):
        u = blocks[morton]
        mult = cfg.imbalance.multiplier(morton) if cfg.imbalance else 1

        def task():
            for _ in range(mult - 1):  # inflate compute, discard extras
                flux_divergence(u, system, solver)
            if stage == 0:
                scratch[morton][...] = u[:, g:-g, g:-g, g:-g]
                update_block_stage(u, dt, dx, system, solver)
            else:
                heun_stage2(scratch[morton], u, dt, dx, system, solver)
        return task

    return [make(m) for m in sorted(blocks)]


def run_once(cfg: RunConfig) -> RunResult:
    """Execute one configuration end to end and aggregate its metrics."""
    decomp = decompose(cfg.grid, cfg.ranks)
    hw = os.cpu_count() or 1
    if cfg.ranks * cfg.threads > hw:
        warnings.warn(
            f"{cfg.ranks} ranks x {cfg.threads} threads oversubscribes "
            f"{hw} hardware threads", stacklevel=2)
    dx = cfg.grid.dx
    bcells = (cfg.grid.block_size,) * 3

    def rank_main(ctx: RankContext) -> RankResult:
        times = PhaseTimes()
        bids = decomp.blocks_of_rank(ctx.rank)
        g = NGHOST
        blocks = {}
        scratch = {}
        with phase(times, "serial"):
            for bid in bids:
                blk = Block.allocate(bid, ctx.rank, cfg.system.nvar, cfg.grid)
                blk.data[:, g:-g, g:-g, g:-g] = init_block_interior(
                    cfg.system, cfg.grid, bid)
                blocks[bid.morton] = blk.data
                scratch[bid.morton] = np.empty_like(blk.interior())
            plan = build_plan(decomp, ctx.rank)
        mem = sum(a.nbytes for a in blocks.values())
        mem += sum(a.nbytes for a in scratch.values())
        nvar = cfg.system.nvar
        mem += sum(8 * nvar * slab_cells(bcells, s.slab.face)
                   for s in plan.remote_sends)
        mem += sum(8 * nvar * slab_cells(bcells, r.slab.face)
                   for r in plan.remote_recvs)

        def do_exchange():
            if cfg.strategy == FUSED:
                exchange_fused(ctx, plan, blocks, bcells, times)
            else:
                exchange_split_overlap(ctx, plan, blocks, bcells, times,
                                       cfg.scheduling)

        for _ in range(cfg.steps):
            with phase(times, "serial"):
                local_dt = compute_dt(blocks.values(), cfg.solver.cfl, dx,
                                      cfg.system, cfg.solver.dt_max)
            dt = ctx.allreduce_min(local_dt)
            for stage in (0, 1):
                do_exchange()
                tasks = _stage_tasks(blocks, scratch, stage, dt, dx, cfg)
                with phase(times, "compute"):
                    ctx.parallel_for(tasks, cfg.scheduling)
        interiors = {m: u[:, g:-g, g:-g, g:-g].copy()
                     for m, u in blocks.items()}
        return RankResult(interiors, times, mem)

    t0 = time.perf_counter()
    results = spawn_ranks(cfg.ranks, cfg.threads, rank_main,
                          intranode_path=cfg.path,
                          watchdog_secs=cfg.watchdog_secs)
    wall = time.perf_counter() - t0

    interiors = {}
    agg = PhaseTimes()
    mem_total = 0
    for rr in results:
        interiors.update(rr.interiors)
        agg = agg.merged(rr.times)
        mem_total += rr.mem_bytes
    mean_times = agg.scaled(1.0 / cfg.ranks)
    updates = cellupdates(cfg.grid.interior_cells, cfg.steps,
                          cfg.solver.substeps)
    energy = energy_to_solution(cfg.energy, wall) if cfg.energy else None
    metrics = RunMetrics(
        ranks=cfg.ranks, threads=cfg.threads, strategy=cfg.strategy,
        scheduling=cfg.scheduling.label(), path=cfg.path, nx=cfg.grid.nx,
        block=cfg.grid.block_size, steps=cfg.steps, wall_s=wall,
        cellupdates=updates, phases=mean_times, mem_bytes=mem_total,
        state_hash=state_hash(interiors), energy_j=energy)
    return RunResult(metrics, interiors)


@dataclass(frozen=True)
class SweepSpec:
    """The experiment matrix for a scaling study."""

    scaling: str = "strong"  # "strong" | "weak"
    grid: GridConfig = GridConfig(64, 64, 64, 16)
    cells_per_core: int = 65536  # weak-scaling workload per rank*thread
    configs: tuple = ((1, 1),)  # (ranks, threads) pairs
    strategies: tuple = (FUSED,)
    schedulings: tuple = (STATIC,)
    paths: tuple = (SHARED_HANDOFF,)
    steps: int = 10
    repetitions: int = 5
    system: PhysicsSystem = PhysicsSystem("advection", (1.0, 0.0, 0.0))
    solver: SolverConfig = SolverConfig()
    imbalance: ImbalanceProfile | None = None
    energy: EnergyModel | None = None

    def __post_init__(self):
        if self.scaling not in ("strong", "weak"):
            raise BenchError(f"unknown scaling mode {self.scaling!r}")
        if self.repetitions < 1:
            raise BenchError("repetitions must be >= 1")


def weak_scaling_grid(spec: SweepSpec, ranks: int, threads: int) -> GridConfig:
    """Cube holding cells_per_core x ranks x threads cells, edge rounded up
    to the next block multiple."""
    b = spec.grid.block_size
    target = spec.cells_per_core * ranks * threads
    edge = math.ceil(target ** (1.0 / 3.0))
    edge = max(b, math.ceil(edge / b) * b)
    return GridConfig(edge, edge, edge, b)


@dataclass
class SweepRow:
    run_id: str
    rep: int
    metrics: RunMetrics


def run_id_for(cfg: RunConfig, rep: int) -> str:
    return hashlib.sha256(f"{cfg.canonical()}|rep={rep}".encode()).hexdigest()[:12]


def _cfg_for(spec: SweepSpec, ranks, threads, strategy, scheduling,
             path) -> RunConfig:
    grid = spec.grid if spec.scaling == "strong" \
        else weak_scaling_grid(spec, ranks, threads)
    return RunConfig(
        grid=grid, system=spec.system, solver=spec.solver, steps=spec.steps,
        ranks=ranks, threads=threads, strategy=strategy,
        scheduling=scheduling, path=path, imbalance=spec.imbalance,
        energy=spec.energy)


def run_sweep(spec: SweepSpec):
    """All configurations x repetitions, one at a time, in a fixed order.

    Returns (rows, summaries).  A failing configuration contributes error
    rows and the sweep continues.  summaries maps the configuration tuple to
    its median wall time over successful repetitions.
    """
    rows: list[SweepRow] = []
    summaries: dict[tuple, float] = {}
    for ranks, threads in spec.configs:
        for strategy in spec.strategies:
            for scheduling in spec.schedulings:
                for path in spec.paths:
                    cfg = _cfg_for(spec, ranks, threads, strategy, scheduling,
                                   path)
                    walls = []
                    for rep in range(spec.repetitions):
                        rid = run_id_for(cfg, rep)
                        try:
                            result = run_once(cfg)
                            rows.append(SweepRow(rid, rep, result.metrics))
                            walls.append(result.metrics.wall_s)
                        except Exception as exc:
                            err = f"{type(exc).__name__}: {exc}"
                            rows.append(SweepRow(rid, rep, RunMetrics(
                                ranks=ranks, threads=threads,
                                strategy=strategy,
                                scheduling=scheduling.label(), path=path,
                                nx=cfg.grid.nx, block=cfg.grid.block_size,
                                steps=spec.steps, wall_s=0.0, cellupdates=0,
                                error=err)))
                    if walls:
                        key = (ranks, threads, strategy, scheduling.label(),
                               path)
                        summaries[key] = statistics.median(walls)
    return rows, summaries


def median_wall(rows: list[SweepRow], **match) -> float:
    """Median wall time over the rows whose metrics match the given fields."""
    walls = [r.metrics.wall_s for r in rows if not r.metrics.error
             and all(getattr(r.metrics, k) == v for k, v in match.items())]
    if not walls:
        raise BenchError(f"no rows match {match}")
    return statistics.median(walls)

"""Self-contained oracle suite behind the `validate` subcommand.

Runs brute-force and differential correctness checks on small grids:
ghost correctness against the periodic-wrapped global field, strategy
equivalence, decomposition invariance, conservation, advection convergence
order, and the energy conversion arithmetic.  Returns a pass/fail report;
the CLI exits nonzero on any failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bench import RunConfig, run_once, FUSED, SPLIT_OVERLAP
from .exchange import build_plan, exchange_fused, exchange_split_overlap
from .grid import Block, GridConfig, NGHOST, decompose
from .metrics import EnergyModel, cellupdates, co2_equivalent, energy_to_solution, \
    epc6, joules_to_kwh
from .runtime import SHARED_HANDOFF, spawn_ranks
from .solver import PhysicsSystem, SolverConfig


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def coordinate_field(grid: GridConfig) -> np.ndarray:
    """Cell-unique global field: value = ix + 1e3*iy + 1e6*iz."""
    ix = np.arange(grid.nx, dtype=np.float64)
    iy = np.arange(grid.ny, dtype=np.float64)
    iz = np.arange(grid.nz, dtype=np.float64)
    return (ix[None, None, :] + 1e3 * iy[None, :, None]
            + 1e6 * iz[:, None, None])[None]


def exchange_once(grid: GridConfig, nranks: int, strategy: str,
                  path: str = SHARED_HANDOFF, threads: int = 1,
                  fault_skip_rank: int | None = None,
                  watchdog_secs: float | None = None) -> dict:
    """Fill blocks with the coordinate field, exchange once, return the
    padded arrays keyed by Morton code."""
    decomp = decompose(grid, nranks)
    gfield = coordinate_field(grid)
    b = grid.block_size
    g = NGHOST
    bcells = (b, b, b)

    def rank_main(ctx):
        blocks = {}
        for bid in decomp.blocks_of_rank(ctx.rank):
            blk = Block.allocate(bid, ctx.rank, 1, grid)
            blk.data[:, g:-g, g:-g, g:-g] = gfield[
                :, bid.kb * b:(bid.kb + 1) * b, bid.jb * b:(bid.jb + 1) * b,
                bid.ib * b:(bid.ib + 1) * b]
            blocks[bid.morton] = blk.data
        plan = build_plan(decomp, ctx.rank)
        if fault_skip_rank is not None and ctx.rank == fault_skip_rank:
            # test hook: drop this rank's ghost fills, still serve the others
            plan = replace(plan, local_copies=(), remote_recvs=())
        if strategy == FUSED:
            exchange_fused(ctx, plan, blocks, bcells)
        else:
            exchange_split_overlap(ctx, plan, blocks, bcells)
        return blocks

    results = spawn_ranks(nranks, threads, rank_main, intranode_path=path,
                          watchdog_secs=watchdog_secs)
    merged = {}
    for r in results:
        merged.update(r)
    return merged


def ghost_errors(grid: GridConfig, blocks: dict) -> int:
    """Brute-force count of face-ghost cells differing from the periodic
    neighbor interior value of the global field."""
    gfield = coordinate_field(grid)[0]
    b = grid.block_size
    g = NGHOST
    decomp = decompose(grid, 1)
    bad = 0
    for bid in decomp.block_ids:
        data = blocks[bid.morton][0]
        origin = (bid.kb * b, bid.jb * b, bid.ib * b)  # z, y, x
        dims = (grid.nz, grid.ny, grid.nx)
        for face in range(6):
            side = (-1, 1)[face % 2]
            axis = face // 2  # 0=x,1=y,2=z
            nd = 2 - axis  # index into (z, y, x) ordering
            local = [np.arange(g, b + g)] * 3  # z, y, x local index ranges
            local[nd] = np.arange(0, g) if side < 0 else np.arange(b + g, b + 2 * g)
            got = data[np.ix_(*local)]
            glob = [(origin[d] + local[d] - g) % dims[d] for d in range(3)]
            want = gfield[np.ix_(*glob)]
            bad += int(np.sum(got != want))
    return bad


def check_ghost_correctness(sizes=(16, 32), block_sizes=(8, 16),
                            rank_counts=(1, 2, 4)) -> CheckResult:
    for n in sizes:
        for b in block_sizes:
            if n % b:
                continue
            grid = GridConfig(n, n, n, b)
            for nranks in rank_counts:
                if nranks > grid.nblocks:
                    continue
                for strategy in (FUSED, SPLIT_OVERLAP):
                    blocks = exchange_once(grid, nranks, strategy)
                    bad = ghost_errors(grid, blocks)
                    if bad:
                        return CheckResult(
                            "ghost-correctness", False,
                            f"{bad} bad ghosts at n={n} B={b} "
                            f"ranks={nranks} {strategy}")
    return CheckResult("ghost-correctness", True)


def check_strategy_equivalence() -> CheckResult:
    base = RunConfig(grid=GridConfig(16, 16, 16, 8),
                     system=PhysicsSystem("advection", (1.0, 0.5, 0.25)),
                     steps=5, ranks=2, threads=2)
    h_fused = run_once(replace(base, strategy=FUSED)).metrics.state_hash
    h_split = run_once(replace(base, strategy=SPLIT_OVERLAP)).metrics.state_hash
    ok = h_fused == h_split
    return CheckResult("strategy-equivalence", ok,
                       "" if ok else f"{h_fused[:12]} != {h_split[:12]}")


def check_decomposition_invariance(system_kind: str = "advection") -> CheckResult:
    system = PhysicsSystem("advection", (1.0, 0.0, 0.0)) \
        if system_kind == "advection" else PhysicsSystem("euler")
    base = RunConfig(grid=GridConfig(16, 16, 16, 8), system=system, steps=5)
    ref = run_once(base).metrics.state_hash
    for ranks, threads in ((2, 1), (2, 2), (4, 1)):
        h = run_once(replace(base, ranks=ranks, threads=threads,
                             strategy=SPLIT_OVERLAP)).metrics.state_hash
        if h != ref:
            return CheckResult(
                f"decomposition-invariance[{system_kind}]", False,
                f"hash differs at ranks={ranks} threads={threads}")
    return CheckResult(f"decomposition-invariance[{system_kind}]", True)


def check_conservation(system_kind: str = "euler",
                       tol: float = 1e-12) -> CheckResult:
    system = PhysicsSystem("euler") if system_kind == "euler" \
        else PhysicsSystem("advection", (1.0, 0.0, 0.0))
    cfg = RunConfig(grid=GridConfig(16, 16, 16, 8), system=system, steps=5)
    decomp = decompose(cfg.grid, 1)
    res0 = run_once(replace(cfg, steps=0))
    res1 = run_once(cfg)
    f0 = res0.assemble_field(decomp)
    f1 = res1.assemble_field(decomp)
    sums0 = f0.reshape(f0.shape[0], -1).sum(axis=1)
    sums1 = f1.reshape(f1.shape[0], -1).sum(axis=1)
    scale = np.maximum(np.abs(sums0), 1.0)
    drift = float(np.max(np.abs(sums1 - sums0) / scale)) / cfg.steps
    ok = drift <= tol
    return CheckResult(f"conservation[{system_kind}]", ok,
                       f"relative drift {drift:.2e} per step")


def advection_l1_error(n: int, crossing_fraction: float = 1.0,
                       reconstruction: str = "plm_minmod",
                       block_size: int = 16) -> float:
    """L1 error of a sine profile advected a fraction of a periodic crossing."""
    grid = GridConfig(n, n, n, block_size)
    system = PhysicsSystem("advection", (1.0, 0.0, 0.0))
    solver = SolverConfig(reconstruction=reconstruction)
    dt = solver.cfl * grid.dx  # vmax = 1
    steps = round(crossing_fraction / dt)
    t_final = steps * dt
    cfg = RunConfig(grid=grid, system=system, solver=solver, steps=steps)
    result = run_once(cfg)
    field = result.assemble_field(decompose(grid, 1))[0]
    xs = (np.arange(n) + 0.5) * grid.dx
    s = (xs[None, None, :] - t_final) + xs[None, :, None] + xs[:, None, None]
    exact = np.sin(2.0 * np.pi * s)
    return float(np.mean(np.abs(field - exact)))


def convergence_order(n_coarse: int = 32, n_fine: int = 64,
                      crossing_fraction: float = 1.0,
                      reconstruction: str = "plm_minmod") -> float:
    e_c = advection_l1_error(n_coarse, crossing_fraction, reconstruction)
    e_f = advection_l1_error(n_fine, crossing_fraction, reconstruction)
    return math.log2(e_c / e_f)


def check_convergence(order_min: float = 1.8,
                      crossing_fraction: float = 0.25) -> CheckResult:
    order = convergence_order(32, 64, crossing_fraction)
    ok = order >= order_min
    return CheckResult("convergence-order", ok,
                       f"observed order {order:.3f} (need >= {order_min})")


def check_energy_arithmetic(tol: float = 1e-9) -> CheckResult:
    checks = [
        ("cellupdates", cellupdates(6_000_000, 2_000_000, 2), 24e12),
        ("energy_kwh", 24e12 / 1e6 * 1.6e-5, 384.0),
        ("co2_g", co2_equivalent(384.0, 275.0), 105_600.0),
        ("epc6", epc6(307_400.0, int(5.3e9)), 58.0),
        ("kj", energy_to_solution(EnergyModel(277.0, 16), 69.7), 308_910.4),
        ("kwh_roundtrip", joules_to_kwh(3.6e6), 1.0),
    ]
    for name, got, want in checks:
        if abs(got - want) > tol * abs(want):
            return CheckResult("energy-arithmetic", False,
                               f"{name}: {got} != {want}")
    return CheckResult("energy-arithmetic", True)


def run_validation(fault_skip_exchange: bool = False) -> list[CheckResult]:
    """The full suite; fault_skip_exchange is a test hook that drops one
    rank's ghost fills so the ghost oracle must fail."""
    results = []
    if fault_skip_exchange:
        # demonstrate the oracle catches a dropped exchange; nothing else
        # is affected by the fault, so only this check runs
        grid = GridConfig(16, 16, 16, 8)
        blocks = exchange_once(grid, 2, FUSED, fault_skip_rank=0)
        bad = ghost_errors(grid, blocks)
        return [CheckResult("ghost-correctness", bad == 0,
                            f"fault injected: {bad} bad ghosts")]
    results.append(check_ghost_correctness())
    results.append(check_strategy_equivalence())
    results.append(check_decomposition_invariance("advection"))
    results.append(check_decomposition_invariance("euler"))
    results.append(check_conservation("euler"))
    results.append(check_conservation("advection"))
    results.append(check_convergence())
    results.append(check_energy_arithmetic())
    return results


def format_report(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        detail = f"  {r.detail}" if r.detail else ""
        lines.append(f"{r.name.ljust(width)}  {status}{detail}")
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{n_fail} failure(s) out of {len(results)} checks"
                 if n_fail else f"all {len(results)} checks passed")
    return "\n".join(lines)

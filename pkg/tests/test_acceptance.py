"""Acceptance gate: every stated criterion runs here at its stated
tolerance and prints one PASS/FAIL line.  Criteria that require more
hardware threads than this machine has are implemented in full and skipped
with an explicit reason instead of being weakened.
"""

import os
import statistics

import numpy as np
import pytest

from halolab.bench import FUSED, SPLIT_OVERLAP, ImbalanceProfile, RunConfig, \
    run_once
from halolab.grid import GridConfig
from halolab.metrics import EnergyModel, cellupdates, co2_equivalent, \
    energy_to_solution, epc6, joules_to_kwh, speedup_efficiency
from halolab.runtime import COPY_THROUGH, SHARED_HANDOFF, CopyCounter, \
    DeadlockError, FunneledViolationError, RankFailureError, Scheduling, \
    TaskError, Transport, WorkerPool, spawn_ranks, transfer_intranode
from halolab.solver import PhysicsSystem, SolverConfig
from halolab.validate import check_conservation, check_ghost_correctness, \
    convergence_order
from oracles.riemann import sod_density_profile
from oracles.sodtube import run_sod

HW_THREADS = os.cpu_count() or 1
STATIC = Scheduling("static_blocked")
DYNAMIC = Scheduling("dynamic", 1)
ADV = PhysicsSystem("advection", (1.0, 0.0, 0.0))


def report(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    print(f"[{status}] {name}" + (f": {detail}" if detail else ""))
    assert passed, f"{name}: {detail}"


# --- criterion: energy accounting arithmetic, exact to 1e-9 ----------------

def test_energy_arithmetic():
    tol = 1e-9
    checks = [
        ("epc6", epc6(307400.0, 5.3e9), 58.0),
        ("cellupdates", cellupdates(6_000_000, 2_000_000, 2), 2.4e13),
        ("energy 16 nodes 69.7 s", energy_to_solution(
            EnergyModel(nodes=16), 69.7), 308910.4),
        ("co2 384 kWh", co2_equivalent(384.0, 275.0), 105600.0),
        ("kwh round trip", joules_to_kwh(384.0 * 3.6e6), 384.0),
    ]
    s, e = speedup_efficiency(100.0, 160, 100.0 / 19.0, 3200)
    checks.append(("speedup", s, 19.0))
    checks.append(("efficiency", e, 0.95))
    bad = [f"{n}: {got} != {want}" for n, got, want in checks
           if abs(got - want) > tol]
    report("energy-arithmetic (tol 1e-9)", not bad, "; ".join(bad) or
           f"{len(checks)} identities exact")


# --- criterion: ghost-cell correctness, brute force over the full matrix ---

def test_ghost_correctness_matrix():
    result = check_ghost_correctness(sizes=(32, 48, 64),
                                     block_sizes=(8, 16),
                                     rank_counts=(1, 2, 4))
    report("ghost-correctness n={32,48,64} B={8,16} ranks={1,2,4} "
           "both strategies", result.passed, result.detail)


# --- criterion: strategy equivalence and decomposition invariance ----------

def test_bitwise_equivalence_across_layouts():
    grid = GridConfig(32, 32, 32, 16)
    hashes = {}
    for ranks, threads in ((1, 1), (2, 2), (4, 2), (1, 8)):
        for strategy in (FUSED, SPLIT_OVERLAP):
            for sched in (STATIC, DYNAMIC):
                for path in (SHARED_HANDOFF, COPY_THROUGH):
                    cfg = RunConfig(grid=grid, system=ADV,
                                    solver=SolverConfig(), steps=20,
                                    ranks=ranks, threads=threads,
                                    strategy=strategy, scheduling=sched,
                                    path=path)
                    key = (ranks, threads, strategy, sched.label(), path)
                    hashes[key] = run_once(cfg).metrics.state_hash
    distinct = set(hashes.values())
    report("bitwise equivalence: 32 layout/strategy/scheduling/path combos, "
           "20 steps", len(distinct) == 1,
           f"{len(distinct)} distinct hash(es) over {len(hashes)} runs")


# --- criterion: numerics -----------------------------------------------------

def test_convergence_order():
    order = convergence_order(32, 64, crossing_fraction=1.0)
    report("L1 convergence order 32^3 -> 64^3 full crossing >= 1.8",
           order >= 1.8, f"observed {order:.3f}")


def test_conservation():
    for kind in ("euler", "advection"):
        result = check_conservation(kind)
        report(f"conservation[{kind}] drift <= 1e-12 per step",
               result.passed, result.detail)


def test_sod_shock_tube():
    xs, rho = run_sod(nx=64, t_end=0.2)
    exact = sod_density_profile(xs, 0.2)
    l1 = float(np.mean(np.abs(rho - exact)))
    report("shock tube L1(rho) <= 0.02 at t=0.2, 64 cells",
           l1 <= 0.02, f"observed {l1:.5f}")


# --- criterion: communication/computation overlap benefit -------------------

@pytest.mark.skipif(HW_THREADS < 8, reason=(
    "overlap benefit is stated for >= 8 hardware threads; "
    f"this machine has {HW_THREADS}"))
def test_overlap_benefit():
    grid = GridConfig(64, 64, 64, 16)

    def medians(strategy, path):
        walls, waits = [], []
        for _ in range(5):
            cfg = RunConfig(grid=grid, system=ADV, solver=SolverConfig(),
                            steps=10, ranks=2, threads=4, strategy=strategy,
                            path=path)
            m = run_once(cfg).metrics
            walls.append(m.wall_s)
            waits.append(m.phases.commwait)
        return statistics.median(walls), statistics.median(waits)

    wall_f, wait_f = medians(FUSED, SHARED_HANDOFF)
    wall_s, wait_s = medians(SPLIT_OVERLAP, SHARED_HANDOFF)
    wall_ct, _ = medians(SPLIT_OVERLAP, COPY_THROUGH)
    report("overlap: CommWait(split) <= CommWait(fused)", wait_s <= wait_f,
           f"{wait_s:.4f} vs {wait_f:.4f}")
    report("overlap: wall(split) <= 1.02 x wall(fused)",
           wall_s <= 1.02 * wall_f, f"{wall_s:.4f} vs {wall_f:.4f}")
    report("overlap: copy_through costs >= 3% over shared_handoff",
           wall_ct >= 1.03 * wall_s, f"{wall_ct:.4f} vs {wall_s:.4f}")


# --- criterion: dynamic scheduling under imbalance --------------------------

@pytest.mark.skipif(HW_THREADS < 4, reason=(
    "dynamic-scheduling benefit is stated for 4 worker threads; "
    f"this machine has {HW_THREADS}"))
def test_dynamic_scheduling_benefit():
    grid = GridConfig(32, 32, 32, 8)
    imb = ImbalanceProfile(seed=7, k=8)

    def median_wall(sched):
        walls = []
        for _ in range(5):
            cfg = RunConfig(grid=grid, system=ADV, solver=SolverConfig(),
                            steps=5, ranks=1, threads=4,
                            strategy=SPLIT_OVERLAP, scheduling=sched,
                            imbalance=imb)
            walls.append(run_once(cfg).metrics.wall_s)
        return statistics.median(walls)

    static = median_wall(STATIC)
    dynamic = median_wall(DYNAMIC)
    report("dynamic scheduling beats static under k=8 imbalance",
           dynamic < static, f"{dynamic:.4f} vs {static:.4f}")


# --- criterion: runtime contract --------------------------------------------

def test_runtime_contract():
    # (a) same-(source, tag) messages preserve order
    def ordered(ctx):
        if ctx.rank == 0:
            for k in range(8):
                ctx.isend(1, tag=3, payload=np.array([float(k)]))
            return None
        got = ctx.wait_all([ctx.irecv(0, tag=3) for _ in range(8)])
        return [float(p[0]) for p in got]

    ok = spawn_ranks(2, 1, ordered)[1] == [float(k) for k in range(8)]
    report("runtime: FIFO per (source, tag)", ok)

    # (b) watchdog turns a mismatched tag into a diagnosed deadlock
    def mismatch(ctx):
        if ctx.rank == 0:
            ctx.isend(1, tag=1, payload=np.zeros(1))
            return None
        return ctx.wait_all([ctx.irecv(0, tag=2)])

    try:
        spawn_ranks(2, 1, mismatch, watchdog_secs=0.3)
        caught = False
    except RankFailureError as exc:
        (_, inner), = exc.failures
        caught = isinstance(inner, DeadlockError) and "(0, 2)" in str(inner)
    report("runtime: watchdog diagnoses a mismatched tag", caught)

    # (c) only the rank main thread may communicate
    def funneled(ctx):
        if ctx.rank == 1:
            return ctx.wait_all([ctx.irecv(0, tag=0)])
        ctx.parallel_for([lambda: ctx.isend(1, tag=0, payload=np.zeros(1))])

    try:
        spawn_ranks(2, 2, funneled, watchdog_secs=2.0)
        caught = False
    except RankFailureError as exc:
        inner = dict(exc.failures)[0]
        caught = isinstance(inner, TaskError) and isinstance(
            inner.__cause__, FunneledViolationError)
    report("runtime: funneled threading is enforced", caught)

    # (d) allreduce_min is exact
    vals = [0.1 + 0.2, 0.3, 2.0, -0.0]
    results = spawn_ranks(4, 1, lambda ctx: ctx.allreduce_min(vals[ctx.rank]))
    ok = all(r == min(vals) for r in results)
    report("runtime: allreduce_min returns the exact minimum", ok)

    # (e) parallel_for executes each task exactly once for every schedule
    ok = True
    for nthreads in (1, 2, 8):
        for sched in (STATIC, DYNAMIC, Scheduling("dynamic", 4)):
            pool = WorkerPool(nthreads, watchdog_secs=10.0)
            try:
                counts = np.zeros(31, dtype=int)

                def make(i):
                    def task():
                        counts[i] += 1
                    return task

                pool.parallel_for([make(i) for i in range(31)], sched)
                ok = ok and bool(np.all(counts == 1))
            finally:
                pool.shutdown()
    report("runtime: exactly-once execution across schedules", ok)

    # (f) intranode copy accounting: 0 for shared_handoff, exactly 2 per
    # message for copy_through
    payload = np.arange(64.0)
    c0 = CopyCounter()
    out = transfer_intranode(SHARED_HANDOFF, payload, c0)
    ok = out is payload and c0.count == 0
    t = Transport(2, COPY_THROUGH, watchdog_secs=5.0)
    import time
    for k in range(3):
        t.send(0, 1, k, payload)
    for k in range(3):
        got = t.receive(1, 0, k, deadline=time.monotonic() + 5.0)
        ok = ok and np.array_equal(got, payload) \
            and not np.shares_memory(got, payload)
    ok = ok and t.copies.count == 6
    report("runtime: copy accounting (0 shared, 2 per copy_through message)",
           ok, f"copy_through counted {t.copies.count} for 3 messages")


# --- cross-cutting: phase-time plausibility ---------------------------------

def test_phase_times_plausible():
    cfg = RunConfig(grid=GridConfig(32, 32, 32, 16), system=ADV,
                    solver=SolverConfig(), steps=5, ranks=2, threads=2,
                    strategy=SPLIT_OVERLAP)
    m = run_once(cfg).metrics
    total = m.phases.total()
    report("phase times sum <= 1.05 x wall", 0.0 < total <= 1.05 * m.wall_s,
           f"sum {total:.4f} vs wall {m.wall_s:.4f}")

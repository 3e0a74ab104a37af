"""Simulated distributed runtime: ranks as threads inside one process.

Provides the communication subset the engine needs: non-blocking
point-to-point sends/receives matched by (source, tag), wait-all, a min
reduction, and a per-rank worker pool with static or dynamic scheduling.
Only a rank's main thread may issue communication calls (funneled
contract); pool workers do compute, packing and copies.

The intra-node delivery path is switchable: shared_handoff passes the
payload buffer through untouched, copy_through serializes it into a staging
buffer and copies it back out on delivery, emulating the path taken when
the shared-memory fabric is disabled.  Delivered bytes are identical.
"""

from __future__ import annotations

import os
import threading
import time
from collections import deque
from dataclasses import dataclass

import numpy as np

DEFAULT_WATCHDOG_SECS = 60.0
WATCHDOG_ENV = "HALOLAB_WATCHDOG_SECS"

SHARED_HANDOFF = "shared_handoff"
COPY_THROUGH = "copy_through"
PATHS = (SHARED_HANDOFF, COPY_THROUGH)


class RuntimeError_(RuntimeError):
    """Base class for simulated-runtime failures."""


class DeadlockError(RuntimeError_):
    """Watchdog fired while waiting on communication."""


class FunneledViolationError(RuntimeError_):
    """Communication call issued off the rank main thread."""


class RankFailureError(RuntimeError_):
    """One or more ranks raised; carries per-rank diagnostics."""

    def __init__(self, failures):
        self.failures = failures  # list of (rank, exception)
        names = ", ".join(f"rank {r}: {type(e).__name__}: {e}" for r, e in failures)
        super().__init__(f"rank failure(s): {names}")


class TaskError(RuntimeError_):
    """A parallel_for task raised; carries the task index."""

    def __init__(self, index, exc):
        self.index = index
        self.exc = exc
        super().__init__(f"task {index} failed: {type(exc).__name__}: {exc}")


class AbortError(RuntimeError_):
    """Run aborted because another rank failed."""


def watchdog_seconds(override: float | None = None) -> float:
    if override is not None:
        return override
    env = os.environ.get(WATCHDOG_ENV)
    if env:
        return float(env)
    return DEFAULT_WATCHDOG_SECS


@dataclass(frozen=True)
class Scheduling:
    kind: str  # "static_blocked" | "dynamic"
    chunk: int = 1

    def __post_init__(self):
        if self.kind not in ("static_blocked", "dynamic"):
            raise ValueError(f"unknown scheduling kind {self.kind!r}")
        if self.chunk < 1:
            raise ValueError(f"chunk must be >= 1, got {self.chunk}")

    def label(self) -> str:
        return "static" if self.kind == "static_blocked" else f"dynamic({self.chunk})"


STATIC = Scheduling("static_blocked")
DYNAMIC1 = Scheduling("dynamic", 1)


class Request:
    """Handle for a pending send or receive."""

    __slots__ = ("kind", "peer", "tag", "payload", "completed")

    def __init__(self, kind, peer, tag, payload=None, completed=False):
        self.kind = kind  # "send" | "recv"
        self.peer = peer
        self.tag = tag
        self.payload = payload
        self.completed = completed


def transfer_intranode(path: str, payload: np.ndarray, counter=None) -> np.ndarray:
    """Deliver a payload over the selected intra-node path.

    shared_handoff hands the buffer over without copying; copy_through
    serializes into a staging buffer and copies back out (2 counted copies).
    """
    if path == SHARED_HANDOFF:
        return payload
    if path != COPY_THROUGH:
        raise ValueError(f"unknown intranode path {path!r}")
    staging = payload.tobytes()  # copy 1: serialize into staging
    if counter is not None:
        counter.add(2)
    out = np.frombuffer(staging, dtype=payload.dtype).copy()  # copy 2: copy out
    return out.reshape(payload.shape)


class CopyCounter:
    __slots__ = ("count", "_lock")

    def __init__(self):
        self.count = 0
        self._lock = threading.Lock()

    def add(self, n):
        with self._lock:
            self.count += n


class Transport:
    """In-process mailboxes with (source, tag) matching and FIFO ordering."""

    def __init__(self, nranks: int, intranode_path: str = SHARED_HANDOFF,
                 watchdog_secs: float | None = None):
        if intranode_path not in PATHS:
            raise ValueError(f"unknown intranode path {intranode_path!r}")
        self.nranks = nranks
        self.path = intranode_path
        self.watchdog = watchdog_seconds(watchdog_secs)
        self.copies = CopyCounter()
        self._locks = [threading.Lock() for _ in range(nranks)]
        self._conds = [threading.Condition(l) for l in self._locks]
        self._boxes = [{} for _ in range(nranks)]  # (src, tag) -> deque
        self._aborted = None

    def abort(self, reason: str):
        self._aborted = reason
        for cond in self._conds:
            with cond:
                cond.notify_all()

    def _check_abort(self):
        if self._aborted is not None:
            raise AbortError(self._aborted)

    def send(self, src: int, dest: int, tag: int, payload: np.ndarray):
        if not 0 <= dest < self.nranks:
            raise RuntimeError_(f"invalid destination rank {dest}")
        # staging copy happens on the sender; delivery copy on the receiver
        if self.path == COPY_THROUGH:
            staged = payload.tobytes()
            self.copies.add(1)
            msg = ("staged", staged, payload.dtype, payload.shape)
        else:
            msg = ("direct", payload, None, None)
        cond = self._conds[dest]
        with cond:
            self._boxes[dest].setdefault((src, tag), deque()).append(msg)
            cond.notify_all()

    def receive(self, rank: int, src: int, tag: int, deadline: float) -> np.ndarray:
        cond = self._conds[rank]
        key = (src, tag)
        with cond:
            while True:
                self._check_abort()
                box = self._boxes[rank]
                q = box.get(key)
                if q:
                    msg = q.popleft()
                    if not q:
                        del box[key]
                    break
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise DeadlockError(
                        f"rank {rank}: receive (src={src}, tag={tag}) timed out")
                cond.wait(remaining)
        kind, data, dtype, shape = msg
        if kind == "staged":
            out = np.frombuffer(data, dtype=dtype).copy()
            self.copies.add(1)
            return out.reshape(shape)
        return data


class Reducer:
    """Reusable all-reduce(min) barrier over all ranks."""

    def __init__(self, nranks: int, watchdog_secs: float):
        self.nranks = nranks
        self.watchdog = watchdog_secs
        self._cond = threading.Condition()
        self._gen = 0
        self._values = []
        self._results = {}
        self._aborted = None

    def abort(self, reason: str):
        with self._cond:
            self._aborted = reason
            self._cond.notify_all()

    def allreduce_min(self, value: float) -> float:
        deadline = time.monotonic() + self.watchdog
        with self._cond:
            if self._aborted is not None:
                raise AbortError(self._aborted)
            gen = self._gen
            self._values.append(value)
            if len(self._values) == self.nranks:
                self._results[gen] = min(self._values)
                self._values = []
                self._gen += 1
                self._cond.notify_all()
            else:
                while gen not in self._results:
                    if self._aborted is not None:
                        raise AbortError(self._aborted)
                    remaining = deadline - time.monotonic()
                    if remaining <= 0:
                        raise DeadlockError(
                            f"allreduce_min generation {gen} timed out")
                    self._cond.wait(remaining)
            return self._results[gen]


class _Region:
    """One parallel_for dispatch: shared task list plus scheduling state."""

    __slots__ = ("tasks", "scheduling", "nslots", "next", "lock",
                 "done", "errors", "cond", "finished_slots")

    def __init__(self, tasks, scheduling, nslots):
        self.tasks = tasks
        self.scheduling = scheduling
        self.nslots = nslots
        self.next = 0
        self.lock = threading.Lock()
        self.cond = threading.Condition()
        self.finished_slots = 0
        self.errors = []

    def run_slot(self, slot: int):
        tasks = self.tasks
        n = len(tasks)
        try:
            if self.scheduling.kind == "static_blocked":
                base, extra = divmod(n, self.nslots)
                lo = slot * base + min(slot, extra)
                hi = lo + base + (1 if slot < extra else 0)
                for i in range(lo, hi):
                    self._run_one(i)
            else:
                chunk = self.scheduling.chunk
                while True:
                    with self.lock:
                        lo = self.next
                        if lo >= n:
                            break
                        self.next = lo + chunk
                    for i in range(lo, min(lo + chunk, n)):
                        self._run_one(i)
        finally:
            with self.cond:
                self.finished_slots += 1
                self.cond.notify_all()

    def _run_one(self, i):
        try:
            self.tasks[i]()
        except Exception as exc:  # propagate with the task index
            with self.lock:
                self.errors.append((i, exc))

    def wait(self, deadline):
        with self.cond:
            while self.finished_slots < self.nslots:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise DeadlockError("parallel_for region timed out")
                self.cond.wait(remaining)
        if self.errors:
            i, exc = sorted(self.errors)[0]
            raise TaskError(i, exc) from exc


class WorkerPool:
    """nthreads-wide pool; the dispatching thread participates as a worker.

    nthreads-1 background threads are spawned; parallel_for runs the caller
    as the last slot (OpenMP-style master participation).  dispatch() leaves
    the caller free, e.g. to post sends while workers pack.
    """

    def __init__(self, nthreads: int, watchdog_secs: float | None = None):
        if nthreads < 1:
            raise ValueError(f"nthreads must be >= 1, got {nthreads}")
        self.nthreads = nthreads
        self.watchdog = watchdog_seconds(watchdog_secs)
        self._cond = threading.Condition()
        self._region = None
        self._region_slots = 0
        self._gen = 0
        self._shutdown = False
        self._threads = [
            threading.Thread(target=self._worker_loop, args=(w,), daemon=True)
            for w in range(nthreads - 1)
        ]
        for t in self._threads:
            t.start()

    def _worker_loop(self, worker: int):
        seen_gen = 0
        while True:
            with self._cond:
                while self._gen == seen_gen and not self._shutdown:
                    self._cond.wait()
                if self._shutdown:
                    return
                seen_gen = self._gen
                region = self._region
                nslots = self._region_slots
            if worker < nslots:
                region.run_slot(worker)

    def dispatch(self, tasks, scheduling: Scheduling, include_caller: bool):
        """Start a region on the background workers; returns the region.

        With include_caller the caller must run the final slot itself (done
        by parallel_for); otherwise only background workers execute, and a
        pool with no background workers runs everything inline here.
        """
        nbg = len(self._threads)
        nslots = nbg + (1 if include_caller else 0)
        if nbg == 0:
            region = _Region(tasks, scheduling, 1)
            region.run_slot(0)
            return region
        region = _Region(tasks, scheduling, nslots)
        with self._cond:
            self._region = region
            self._region_slots = nbg if not include_caller else nslots
            self._gen += 1
            self._cond.notify_all()
        return region

    def parallel_for(self, tasks, scheduling: Scheduling = STATIC):
        """Run all tasks exactly once; blocks until completion."""
        tasks = list(tasks)
        if not tasks:
            return
        region = self.dispatch(tasks, scheduling, include_caller=True)
        if len(self._threads) > 0:
            region.run_slot(region.nslots - 1)  # caller takes the last slot
        region.wait(time.monotonic() + self.watchdog)

    def shutdown(self):
        with self._cond:
            self._shutdown = True
            self._cond.notify_all()
        for t in self._threads:
            t.join(timeout=5.0)


class RankContext:
    """Per-rank handle: transport endpoint, reducer, worker pool."""

    def __init__(self, rank: int, nranks: int, transport: Transport,
                 reducer: Reducer, pool: WorkerPool):
        self.rank = rank
        self.nranks = nranks
        self.transport = transport
        self.reducer = reducer
        self.pool = pool
        self._main_thread = threading.get_ident()

    def _check_funneled(self):
        if threading.get_ident() != self._main_thread:
            raise FunneledViolationError(
                f"rank {self.rank}: communication call off the main context")

    def bind_main_thread(self):
        self._main_thread = threading.get_ident()

    def isend(self, dest: int, tag: int, payload: np.ndarray) -> Request:
        self._check_funneled()
        self.transport.send(self.rank, dest, tag, payload)
        return Request("send", dest, tag, completed=True)

    def irecv(self, src: int, tag: int) -> Request:
        self._check_funneled()
        if not 0 <= src < self.nranks:
            raise RuntimeError_(f"invalid source rank {src}")
        return Request("recv", src, tag)

    def wait_all(self, requests) -> list:
        """Complete every request; receive payloads returned in request order."""
        self._check_funneled()
        requests = list(requests)
        deadline = time.monotonic() + self.transport.watchdog
        payloads = []
        try:
            for req in requests:
                if req.kind == "recv" and not req.completed:
                    req.payload = self.transport.receive(
                        self.rank, req.peer, req.tag, deadline)
                req.completed = True
                if req.kind == "recv":
                    payloads.append(req.payload)
        except DeadlockError:
            pending = [(r.peer, r.tag) for r in requests if not r.completed]
            raise DeadlockError(
                f"rank {self.rank}: wait_all timed out; pending (peer, tag): "
                f"{pending}") from None
        return payloads

    def allreduce_min(self, value: float) -> float:
        self._check_funneled()
        return self.reducer.allreduce_min(value)

    def parallel_for(self, tasks, scheduling: Scheduling = STATIC):
        self.pool.parallel_for(tasks, scheduling)


def spawn_ranks(nranks: int, nthreads: int, rank_main,
                intranode_path: str = SHARED_HANDOFF,
                watchdog_secs: float | None = None) -> list:
    """Run rank_main(ctx) once per rank on concurrent threads.

    Returns the per-rank results in rank order.  Any rank failure aborts the
    others and raises RankFailureError naming the failing rank(s).
    """
    if nranks < 1 or nthreads < 1:
        raise ValueError("nranks and nthreads must be >= 1")
    wd = watchdog_seconds(watchdog_secs)
    transport = Transport(nranks, intranode_path, wd)
    reducer = Reducer(nranks, wd)
    pools = [WorkerPool(nthreads, wd) for _ in range(nranks)]
    contexts = [RankContext(r, nranks, transport, reducer, pools[r])
                for r in range(nranks)]
    results = [None] * nranks
    failures = []
    failure_lock = threading.Lock()

    def main(rank):
        ctx = contexts[rank]
        ctx.bind_main_thread()
        try:
            results[rank] = rank_main(ctx)
        except AbortError:
            pass  # secondary failure caused by another rank's abort
        except Exception as exc:
            with failure_lock:
                failures.append((rank, exc))
            transport.abort(f"rank {rank} failed: {exc}")
            reducer.abort(f"rank {rank} failed: {exc}")

    threads = [threading.Thread(target=main, args=(r,), name=f"rank-{r}")
               for r in range(nranks)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for pool in pools:
        pool.shutdown()
    if failures:
        raise RankFailureError(sorted(failures))
    return results

"""Ghost-cell exchange: halo plans plus the fused and split-overlap engines.

A HaloPlan classifies every (block, face) ghost fill of one rank as either a
local slab copy (both blocks on the rank) or a remote send/recv pair.  The
fused engine performs everything serially on the rank main context, the
baseline behaviour before the threading overhaul.  The split-overlap engine
threads packing, local copies and unpacking on the worker pool and performs
the local (communication-independent) work before wait-all, overlapping it
with remote transfers.  Both produce bitwise identical ghost state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import FACES, NGHOST, Decomposition, face_neighbor, opposite_face
from .metrics import PhaseTimes, phase
from .runtime import DeadlockError, RankContext, Scheduling, STATIC


class ExchangeError(RuntimeError):
    """Malformed plan or payload."""


@dataclass(frozen=True)
class FaceSlab:
    """A ghost-width-deep slab on one face of a block.

    role "source" selects the interior cells adjacent to the face, role
    "ghost" the ghost cells outside it.  Payload layout is variable-major,
    then z, y, x fastest (C order of the block array).
    """

    face: int  # 0..5 = -x,+x,-y,+y,-z,+z
    role: str  # "source" | "ghost"

    def slices(self, block_cells: tuple[int, int, int]) -> tuple:
        g = NGHOST
        side, axis = FACES[self.face]
        n = block_cells[axis]
        if self.role == "source":
            sl = slice(g, 2 * g) if side < 0 else slice(n, n + g)
        else:
            sl = slice(0, g) if side < 0 else slice(n + g, n + 2 * g)
        idx = [slice(None)] * 4
        idx[3 - axis] = sl
        # restrict nothing else: transverse extent includes ghosts so the
        # slab shape is fixed; only interior-width transverse cells matter
        return tuple(idx)


def _transverse_interior(idx: tuple, block_cells: tuple[int, int, int],
                         face: int) -> tuple:
    """Shrink the transverse axes of a slab index to the interior."""
    g = NGHOST
    _, axis = FACES[face]
    out = list(idx)
    for a in (0, 1, 2):
        if a != axis:
            out[3 - a] = slice(g, block_cells[a] + g)
    return tuple(out)


def slab_index(slab: FaceSlab, block_cells: tuple[int, int, int]) -> tuple:
    """Full numpy index of a slab: face-normal depth g, transverse interior."""
    return _transverse_interior(slab.slices(block_cells), block_cells, slab.face)


def slab_cells(block_cells: tuple[int, int, int], face: int) -> int:
    _, axis = FACES[face]
    trans = [block_cells[a] for a in (0, 1, 2) if a != axis]
    return NGHOST * trans[0] * trans[1]


@dataclass(frozen=True)
class LocalCopy:
    src_morton: int
    src_slab: FaceSlab
    dest_morton: int
    dest_slab: FaceSlab


@dataclass(frozen=True)
class RemoteSend:
    dest_rank: int
    tag: int
    src_morton: int
    slab: FaceSlab


@dataclass(frozen=True)
class RemoteRecv:
    src_rank: int
    tag: int
    dest_morton: int
    slab: FaceSlab


@dataclass(frozen=True)
class HaloPlan:
    rank: int
    local_copies: tuple[LocalCopy, ...]
    remote_sends: tuple[RemoteSend, ...]
    remote_recvs: tuple[RemoteRecv, ...]


def exchange_tag(dest_morton: int, dest_face: int) -> int:
    """Unique per receiver: Morton code of the destination block times 6
    plus the index of the face being filled."""
    return dest_morton * 6 + dest_face


def build_plan(decomp: Decomposition, rank: int) -> HaloPlan:
    """Classify all 6 ghost fills of every local block as local or remote.

    Deterministic ordering: local blocks in Morton order, faces 0..5.
    """
    local_copies, remote_sends, remote_recvs = [], [], []
    for bid in decomp.blocks_of_rank(rank):
        for face in range(6):
            nbr = face_neighbor(bid, face, decomp.grid)
            src_slab = FaceSlab(opposite_face(face), "source")
            dest_slab = FaceSlab(face, "ghost")
            if decomp.owner_of(nbr.morton) == rank:
                local_copies.append(
                    LocalCopy(nbr.morton, src_slab, bid.morton, dest_slab))
            else:
                remote_recvs.append(RemoteRecv(
                    decomp.owner_of(nbr.morton), exchange_tag(bid.morton, face),
                    bid.morton, dest_slab))
                # the neighbor fills its opposite ghost face from our slab
                remote_sends.append(RemoteSend(
                    decomp.owner_of(nbr.morton),
                    exchange_tag(nbr.morton, opposite_face(face)),
                    bid.morton, FaceSlab(face, "source")))
    return HaloPlan(rank, tuple(local_copies), tuple(remote_sends),
                    tuple(remote_recvs))


def pack_face(data: np.ndarray, slab: FaceSlab,
              block_cells: tuple[int, int, int]) -> np.ndarray:
    """Contiguous payload of a slab, variable-major then z, y, x fastest."""
    return np.ascontiguousarray(data[slab_index(slab, block_cells)]).ravel()


def unpack_face(data: np.ndarray, slab: FaceSlab, payload: np.ndarray,
                block_cells: tuple[int, int, int]) -> None:
    """Exact inverse of pack_face over the destination slab."""
    idx = slab_index(slab, block_cells)
    shape = data[idx].shape
    expected = int(np.prod(shape))
    if payload.size != expected:
        raise ExchangeError(
            f"payload length {payload.size} != slab volume {expected}")
    data[idx] = payload.reshape(shape)


def apply_local_copy(blocks: dict, copy: LocalCopy,
                     block_cells: tuple[int, int, int]) -> None:
    src = blocks[copy.src_morton]
    dest = blocks[copy.dest_morton]
    dest[slab_index(copy.dest_slab, block_cells)] = \
        src[slab_index(copy.src_slab, block_cells)]


def exchange_fused(ctx: RankContext, plan: HaloPlan, blocks: dict,
                   block_cells: tuple[int, int, int],
                   times: PhaseTimes | None = None) -> None:
    """Baseline strategy: everything serial on the rank main context."""
    times = times if times is not None else PhaseTimes()
    with phase(times, "serial"):
        reqs = [ctx.irecv(r.src_rank, r.tag) for r in plan.remote_recvs]
    with phase(times, "pack"):
        for s in plan.remote_sends:
            payload = pack_face(blocks[s.src_morton], s.slab, block_cells)
            ctx.isend(s.dest_rank, s.tag, payload)
    with phase(times, "localcopy"):
        for c in plan.local_copies:
            apply_local_copy(blocks, c, block_cells)
    with phase(times, "commwait"):
        payloads = ctx.wait_all(reqs)
    with phase(times, "unpack"):
        for r, payload in zip(plan.remote_recvs, payloads):
            unpack_face(blocks[r.dest_morton], r.slab, payload, block_cells)


def exchange_split_overlap(ctx: RankContext, plan: HaloPlan, blocks: dict,
                           block_cells: tuple[int, int, int],
                           times: PhaseTimes | None = None,
                           scheduling: Scheduling = STATIC) -> None:
    """Optimized strategy: threaded packs/copies/unpacks, local work first.

    Workers pack remote slabs while the main context posts each send as its
    payload completes; local copies (communication-independent) run on the
    pool before wait-all, overlapping remote transfer; unpacking is threaded
    behind a completion barrier.
    """
    import queue

    times = times if times is not None else PhaseTimes()
    with phase(times, "serial"):
        reqs = [ctx.irecv(r.src_rank, r.tag) for r in plan.remote_recvs]

    sends = plan.remote_sends
    with phase(times, "pack"):
        if sends:
            payloads = [None] * len(sends)
            ready: queue.Queue = queue.Queue()

            def make_pack(i, s):
                def task():
                    payloads[i] = pack_face(blocks[s.src_morton], s.slab,
                                            block_cells)
                    ready.put(i)
                return task

            tasks = [make_pack(i, s) for i, s in enumerate(sends)]
            region = ctx.pool.dispatch(tasks, scheduling, include_caller=False)
            for _ in range(len(sends)):
                try:
                    i = ready.get(timeout=ctx.transport.watchdog)
                except queue.Empty:
                    raise DeadlockError(
                        f"rank {ctx.rank}: pack tasks stalled") from None
                s = sends[i]
                ctx.isend(s.dest_rank, s.tag, payloads[i])
            region.wait(deadline=_deadline(ctx))

    with phase(times, "localcopy"):
        copies = plan.local_copies
        ctx.parallel_for(
            [_copy_task(blocks, c, block_cells) for c in copies], scheduling)

    with phase(times, "commwait"):
        payloads_in = ctx.wait_all(reqs)

    with phase(times, "unpack"):
        recvs = plan.remote_recvs
        ctx.parallel_for(
            [_unpack_task(blocks, r, payloads_in[i], block_cells)
             for i, r in enumerate(recvs)], scheduling)


def _deadline(ctx: RankContext) -> float:
    import time
    return time.monotonic() + ctx.transport.watchdog


def _copy_task(blocks, c, block_cells):
    def task():
        apply_local_copy(blocks, c, block_cells)
    return task


def _unpack_task(blocks, r, payload, block_cells):
    def task():
        unpack_face(blocks[r.dest_morton], r.slab, payload, block_cells)
    return task


def verify_plan_coverage(plan: HaloPlan, decomp: Decomposition, rank: int):
    """Raise unless every local (block, face) appears exactly once as a ghost
    destination and every outgoing dependency exactly once as a source."""
    local = {b.morton for b in decomp.blocks_of_rank(rank)}
    dests = [(c.dest_morton, c.dest_slab.face) for c in plan.local_copies]
    dests += [(r.dest_morton, r.slab.face) for r in plan.remote_recvs]
    expected = {(m, f) for m in local for f in range(6)}
    if sorted(dests) != sorted(expected):
        raise ExchangeError(f"rank {rank}: ghost destinations not covered once")
    srcs = [(c.src_morton, c.src_slab.face) for c in plan.local_copies]
    srcs += [(s.src_morton, s.slab.face) for s in plan.remote_sends]
    for m, _ in srcs:
        if m not in local:
            raise ExchangeError(f"rank {rank}: source block {m} not local")

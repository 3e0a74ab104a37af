"""Uniform Cartesian grid, block decomposition, Morton ordering, neighbor topology.

The domain is periodic on all axes and split into cubic blocks of B cells
per axis with a fixed ghost width of 2.  Blocks are ordered along the Morton
(z-order) curve and assigned to ranks as contiguous Morton chunks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NGHOST = 2

# Face index layout: 0..5 = -x, +x, -y, +y, -z, +z
FACES = ((-1, 0), (1, 0), (-1, 1), (1, 1), (-1, 2), (1, 2))


def opposite_face(face: int) -> int:
    return face ^ 1


class GridError(ValueError):
    """Invalid grid or decomposition configuration."""


@dataclass(frozen=True)
class GridConfig:
    nx: int
    ny: int
    nz: int
    block_size: int = 16
    nghost: int = NGHOST
    extent: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        for name, n in (("nx", self.nx), ("ny", self.ny), ("nz", self.nz)):
            if n <= 0:
                raise GridError(f"{name} must be positive, got {n}")
            if n % self.block_size != 0:
                raise GridError(
                    f"{name}={n} not divisible by block_size={self.block_size}"
                )
        if self.nghost != NGHOST:
            raise GridError(f"ghost width is fixed at {NGHOST}, got {self.nghost}")
        if any(e <= 0 for e in self.extent):
            raise GridError(f"extent must be positive, got {self.extent}")

    @property
    def dx(self) -> float:
        return self.extent[0] / self.nx

    @property
    def blocks_per_axis(self) -> tuple[int, int, int]:
        b = self.block_size
        return (self.nx // b, self.ny // b, self.nz // b)

    @property
    def nblocks(self) -> int:
        bx, by, bz = self.blocks_per_axis
        return bx * by * bz

    @property
    def interior_cells(self) -> int:
        return self.nx * self.ny * self.nz


def morton_encode(ib: int, jb: int, kb: int, grid: GridConfig | None = None) -> int:
    """Interleave block coordinates: x bits at 3i, y at 3i+1, z at 3i+2."""
    if min(ib, jb, kb) < 0:
        raise GridError(f"negative block coords ({ib},{jb},{kb})")
    if grid is not None:
        bx, by, bz = grid.blocks_per_axis
        if ib >= bx or jb >= by or kb >= bz:
            raise GridError(
                f"block coords ({ib},{jb},{kb}) outside grid {grid.blocks_per_axis}"
            )
    code = 0
    pos = 0
    while ib or jb or kb:
        code |= (ib & 1) << (3 * pos)
        code |= (jb & 1) << (3 * pos + 1)
        code |= (kb & 1) << (3 * pos + 2)
        ib >>= 1
        jb >>= 1
        kb >>= 1
        pos += 1
    return code


def morton_decode(code: int) -> tuple[int, int, int]:
    ib = jb = kb = 0
    pos = 0
    while code:
        ib |= (code & 1) << pos
        jb |= ((code >> 1) & 1) << pos
        kb |= ((code >> 2) & 1) << pos
        code >>= 3
        pos += 1
    return ib, jb, kb


@dataclass(frozen=True, order=True)
class BlockId:
    morton: int
    ib: int
    jb: int
    kb: int

    @classmethod
    def from_coords(cls, ib: int, jb: int, kb: int, grid: GridConfig | None = None):
        return cls(morton_encode(ib, jb, kb, grid), ib, jb, kb)


def face_neighbor(bid: BlockId, face: int, grid: GridConfig) -> BlockId:
    """Neighbor across a face with periodic wraparound (may be bid itself)."""
    if not 0 <= face < 6:
        raise GridError(f"invalid face {face}")
    side, axis = FACES[face]
    nb = list(grid.blocks_per_axis)
    coords = [bid.ib, bid.jb, bid.kb]
    coords[axis] = (coords[axis] + side) % nb[axis]
    return BlockId.from_coords(*coords, grid)


@dataclass
class Block:
    """One grid block: conserved variables with ghost layers, x fastest.

    data shape is [nvar, B+2g, B+2g, B+2g] with array axes (var, z, y, x).
    """

    id: BlockId
    owner: int
    data: np.ndarray

    @classmethod
    def allocate(cls, bid: BlockId, owner: int, nvar: int, grid: GridConfig):
        b = grid.block_size + 2 * grid.nghost
        return cls(bid, owner, np.zeros((nvar, b, b, b), dtype=np.float64))

    def interior(self) -> np.ndarray:
        g = NGHOST
        return self.data[:, g:-g, g:-g, g:-g]


@dataclass(frozen=True)
class Decomposition:
    """Morton-contiguous assignment of blocks to ranks, balanced to within 1.

    block_ids is the full block list sorted by Morton code.  Codes are not
    dense when the per-axis block count is not a power of two, so ownership
    is keyed by code rather than indexed.
    """

    grid: GridConfig
    nranks: int
    block_ids: tuple[BlockId, ...] = field(repr=False)
    owners: dict = field(repr=False)  # morton code -> rank

    def owner_of(self, morton: int) -> int:
        return self.owners[morton]

    def blocks_of_rank(self, rank: int) -> list[BlockId]:
        return [b for b in self.block_ids if self.owners[b.morton] == rank]

    def chunk_sizes(self) -> list[int]:
        counts = [0] * self.nranks
        for o in self.owners.values():
            counts[o] += 1
        return counts


def decompose(grid: GridConfig, nranks: int) -> Decomposition:
    """Split the Morton block sequence into nranks contiguous balanced chunks."""
    nb = grid.nblocks
    if nranks < 1:
        raise GridError(f"nranks must be >= 1, got {nranks}")
    if nranks > nb:
        raise GridError(f"nranks={nranks} exceeds block count {nb}")
    bx, by, bz = grid.blocks_per_axis
    ids = sorted(
        BlockId.from_coords(ib, jb, kb, grid)
        for kb in range(bz)
        for jb in range(by)
        for ib in range(bx)
    )
    base, extra = divmod(nb, nranks)
    owners = {}
    pos = 0
    for rank in range(nranks):
        size = base + (1 if rank < extra else 0)
        for bid in ids[pos:pos + size]:
            owners[bid.morton] = rank
        pos += size
    return Decomposition(grid, nranks, tuple(ids), owners)

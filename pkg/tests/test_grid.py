import numpy as np
import pytest

from halolab.grid import NGHOST, Block, BlockId, GridConfig, GridError, \
    decompose, face_neighbor, morton_decode, morton_encode, opposite_face


def test_morton_examples():
    assert morton_encode(0, 0, 0) == 0
    assert morton_encode(1, 0, 0) == 1
    assert morton_encode(0, 1, 0) == 2
    assert morton_encode(0, 0, 1) == 4
    assert morton_encode(1, 1, 1) == 7
    assert morton_encode(2, 0, 0) == 8
    assert morton_encode(3, 3, 3) == 63


def test_morton_round_trip():
    for ib in range(5):
        for jb in range(5):
            for kb in range(5):
                assert morton_decode(morton_encode(ib, jb, kb)) == (ib, jb, kb)


def test_morton_ordering_is_z_order():
    codes = [morton_encode(i, j, k)
             for k in range(4) for j in range(4) for i in range(4)]
    assert len(set(codes)) == 64
    assert sorted(codes) == list(range(64))


def test_opposite_face():
    assert [opposite_face(f) for f in range(6)] == [1, 0, 3, 2, 5, 4]


def test_grid_config_properties():
    g = GridConfig(32, 32, 32, 16)
    assert g.dx == pytest.approx(1.0 / 32)
    assert g.blocks_per_axis == (2, 2, 2)
    assert g.nblocks == 8
    assert g.interior_cells == 32 ** 3


def test_grid_config_validation():
    with pytest.raises(GridError):
        GridConfig(30, 30, 30, 16)  # not divisible
    with pytest.raises(GridError):
        GridConfig(0, 16, 16, 16)
    with pytest.raises(GridError):
        GridConfig(16, 16, 16, 3)  # 3 does not divide 16


def test_face_neighbor_periodic_wrap():
    g = GridConfig(48, 48, 48, 16)  # 3 blocks per axis
    b = BlockId.from_coords(0, 1, 2)
    assert face_neighbor(b, 0, g).ib == 2  # -x wraps
    assert face_neighbor(b, 1, g).ib == 1
    assert face_neighbor(b, 3, g).jb == 2
    assert face_neighbor(b, 5, g).kb == 0  # +z wraps
    # neighbor relation is symmetric through the opposite face
    n = face_neighbor(b, 4, g)
    assert face_neighbor(n, 5, g) == b


def test_decompose_balanced_contiguous():
    g = GridConfig(48, 48, 48, 16)  # 27 blocks
    d = decompose(g, 4)
    assert d.chunk_sizes() == [7, 7, 7, 6]
    codes = [b.morton for b in d.block_ids]
    assert codes == sorted(codes)
    # contiguity: each rank owns a consecutive run of the sorted codes
    owners = [d.owner_of(c) for c in codes]
    assert owners == sorted(owners)


def test_decompose_single_rank_owns_all():
    g = GridConfig(32, 32, 32, 16)
    d = decompose(g, 1)
    assert all(d.owner_of(b.morton) == 0 for b in d.block_ids)
    assert len(d.blocks_of_rank(0)) == 8


def test_decompose_more_ranks_than_blocks():
    g = GridConfig(16, 16, 16, 16)
    with pytest.raises(GridError):
        decompose(g, 2)


def test_block_allocation_shape():
    g = GridConfig(32, 32, 32, 16)
    blk = Block.allocate(BlockId.from_coords(0, 0, 0), 0, 5, g)
    pad = 16 + 2 * NGHOST
    assert blk.data.shape == (5, pad, pad, pad)
    assert blk.interior().shape == (5, 16, 16, 16)
    blk.interior()[:] = 3.0
    assert np.all(blk.data[:, NGHOST:-NGHOST, NGHOST:-NGHOST,
                           NGHOST:-NGHOST] == 3.0)

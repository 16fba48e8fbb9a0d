"""Binary container for TT chains.

Layout (all integers little-endian):

    magic   4 bytes  b"TTC1"
    kind    u8       0 = VectorTT, 1 = MatrixTT, 2 = BlockTT
    N       u32      number of cores
    K       u32      block size (0 unless kind = 2)
    pos     i32      block core position (-1 unless kind = 2)
    modes   N x u32  mode sizes; for MatrixTT 2N x u32 as (I_1, J_1, I_2, ...)
    ranks   (N+1) x u32
    cores   float64 LE, each core raveled column-major, concatenated in order

Orthogonality tags are volatile bookkeeping and are not stored; loaded chains
come back untagged.  The float payload is written verbatim, so a save/load
round trip is bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from .tt import BlockTT, MatrixTT, VectorTT

MAGIC = b"TTC1"
_KIND_CODE = {VectorTT: 0, MatrixTT: 1, BlockTT: 2}


def save_tt(x, path) -> None:
    """Write a VectorTT / MatrixTT / BlockTT to ``path``."""
    kind = _KIND_CODE.get(type(x))
    if kind is None:
        raise TypeError(f"cannot serialize {type(x)!r}")
    n = x.n_cores
    k = x.k if kind == 2 else 0
    pos = x.block_position if kind == 2 else -1
    if kind == 1:
        modes = [s for pair in zip(x.row_sizes, x.col_sizes) for s in pair]
    else:
        modes = list(x.mode_sizes)
    ranks = list(x.ranks)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<BIIi", kind, n, k, pos))
        fh.write(np.asarray(modes, dtype="<u4").tobytes())
        fh.write(np.asarray(ranks, dtype="<u4").tobytes())
        for c in x.cores:
            fh.write(np.asarray(c, dtype="<f8").ravel(order="F").tobytes())


def load_tt(path):
    """Read a chain written by save_tt; the inverse, bit-exactly."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise ValueError("not a TT container (bad magic)")
    kind, n, k, pos = struct.unpack_from("<BIIi", data, 4)
    off = 4 + struct.calcsize("<BIIi")
    n_modes = 2 * n if kind == 1 else n
    modes = np.frombuffer(data, dtype="<u4", count=n_modes, offset=off)
    off += 4 * n_modes
    ranks = np.frombuffer(data, dtype="<u4", count=n + 1, offset=off)
    off += 4 * (n + 1)
    cores = []
    for m in range(n):
        r, r2 = int(ranks[m]), int(ranks[m + 1])
        if kind == 0:
            shape = (r, int(modes[m]), r2)
        elif kind == 1:
            shape = (r, int(modes[2 * m]), int(modes[2 * m + 1]), r2)
        else:
            shape = ((r, k, int(modes[m]), r2) if m == pos
                     else (r, int(modes[m]), r2))
        count = int(np.prod(shape))
        flat = np.frombuffer(data, dtype="<f8", count=count, offset=off)
        off += 8 * count
        cores.append(np.reshape(flat, shape, order="F"))
    if off != len(data):
        raise ValueError("trailing bytes in TT container")
    if kind == 0:
        return VectorTT(cores)
    if kind == 1:
        return MatrixTT(cores)
    return BlockTT(cores, pos)

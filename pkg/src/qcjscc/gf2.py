"""Dense GF(2) vectors and matrices, bit-packed for word-parallel row ops.

Vectors and matrices are plain numpy uint8 arrays with entries in {0, 1}.
Internally, rows are packed into uint64 words so that row XOR (the inner
loop of Gaussian elimination) runs 64 bits at a time; the 4800x4800
inversion needed by the encoder is infeasible bit-by-bit.
"""

from __future__ import annotations

import numpy as np

#: Sentinel shift value denoting the all-zero circulant block.
ZERO = -1


class SingularMatrixError(ValueError):
    """Raised when inverting a singular matrix; carries the rank found."""

    def __init__(self, rank: int):
        self.rank = rank
        super().__init__(f"matrix is singular (rank {rank})")


def _as_bits(a, name="array") -> np.ndarray:
    a = np.asarray(a, dtype=np.uint8)
    if a.size and a.max() > 1:
        raise ValueError(f"{name} entries must be in {{0, 1}}")
    return a


def pack_rows(m: np.ndarray) -> np.ndarray:
    """Pack each row of a binary matrix into uint64 words (LSB-first)."""
    m = np.atleast_2d(np.asarray(m, dtype=np.uint8))
    nwords = (m.shape[1] + 63) // 64
    packed8 = np.packbits(m, axis=1, bitorder="little")
    out = np.zeros((m.shape[0], nwords * 8), dtype=np.uint8)
    out[:, : packed8.shape[1]] = packed8
    return out.view(np.uint64)


def unpack_rows(p: np.ndarray, ncols: int) -> np.ndarray:
    """Inverse of :func:`pack_rows`."""
    bits = np.unpackbits(p.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :ncols].copy()


def mat_vec_mul(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Binary matrix-vector product over GF(2)."""
    m = _as_bits(m, "matrix")
    v = _as_bits(v, "vector").ravel()
    if m.ndim != 2 or m.shape[1] != v.shape[0]:
        raise ValueError(
            f"dimension mismatch: matrix is {m.shape}, vector has length {v.shape[0]}"
        )
    mp = pack_rows(m)
    vp = pack_rows(v[None, :])[0]
    return (np.bitwise_count(mp & vp).sum(axis=1, dtype=np.uint64) & 1).astype(np.uint8)


def mat_mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Binary matrix-matrix product over GF(2)."""
    a = _as_bits(a, "left matrix")
    b = _as_bits(b, "right matrix")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    # Accumulate in float32 BLAS (counts < 2**24 stay exact), reduce mod 2.
    prod = a.astype(np.float32) @ b.astype(np.float32)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def _eliminate(packed: np.ndarray, ncols: int) -> int:
    """In-place Gauss-Jordan on packed rows over the first ncols columns.

    Returns the rank found.
    """
    nrows = packed.shape[0]
    r = 0
    for j in range(ncols):
        if r >= nrows:
            break
        word, bit = j >> 6, np.uint64(j & 63)
        col = (packed[r:, word] >> bit) & np.uint64(1)
        piv = r + int(np.argmax(col))
        if not col[piv - r]:
            continue
        if piv != r:
            packed[[r, piv]] = packed[[piv, r]]
        mask = ((packed[:, word] >> bit) & np.uint64(1)).astype(bool)
        mask[r] = False
        packed[mask] ^= packed[r]
        r += 1
    return r


def gf2_rank(m: np.ndarray) -> int:
    """Rank of a binary matrix over GF(2)."""
    m = _as_bits(m, "matrix")
    return _eliminate(pack_rows(m), m.shape[1])


def gf2_invert(m: np.ndarray) -> np.ndarray:
    """Invert a square binary matrix by Gauss-Jordan with partial pivoting.

    Raises :class:`SingularMatrixError` (carrying the rank) if singular.
    """
    m = _as_bits(m, "matrix")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got {m.shape}")
    n = m.shape[0]
    aug = np.concatenate([m, np.eye(n, dtype=np.uint8)], axis=1)
    packed = pack_rows(aug)
    rank = _eliminate(packed, n)
    if rank < n:
        raise SingularMatrixError(rank)
    return unpack_rows(packed, 2 * n)[:, n:]


def expand_circulant(z: int, shift: int) -> np.ndarray:
    """Expand one circulant block: identity cyclically right-shifted by `shift`.

    Row r has its 1 in column (r + shift) mod z; shift == ZERO gives the
    all-zero z x z block.
    """
    if z < 1:
        raise ValueError("lifting factor must be positive")
    out = np.zeros((z, z), dtype=np.uint8)
    if shift == ZERO:
        return out
    if not 0 <= shift < z:
        raise ValueError(f"shift {shift} outside [0, {z})")
    rows = np.arange(z)
    out[rows, (rows + shift) % z] = 1
    return out

"""Two-stage encoding: compress the sparse source, then solve channel parity.

b = Hs s over GF(2), p = H1^-1 H2 b, c = [p b]. H1^-1 and the combined
parity map P = H1^-1 H2 are precomputed once per code and stored packed
by columns, so encoding a frame is a handful of column XOR reductions.
"""

from __future__ import annotations

import numpy as np

from . import gf2
from .construction import QcCode, expand


class EncoderContext:
    """Immutable per-code encoding state; safe to share across workers."""

    def __init__(self, code: QcCode):
        self.code = code
        hs, hc = expand(code)
        npar = code.n_parity
        h1 = hc[:, :npar]
        h2 = hc[:, npar:]
        h1inv = gf2.gf2_invert(h1)  # construction guarantees invertibility
        # parity map P = H1^-1 H2, built column-by-column from H2's sparse support
        h1inv_cols = gf2.pack_rows(h1inv.T)  # (npar, words) packed columns of H1inv
        pcols = np.zeros((code.n_compressed, h1inv_cols.shape[1]), dtype=np.uint64)
        for j in range(code.n_compressed):
            support = np.flatnonzero(h2[:, j])
            pcols[j] = np.bitwise_xor.reduce(h1inv_cols[support], axis=0)
        self._parity_cols = pcols  # packed columns of P, one row per compressed bit
        self._hs_cols = gf2.pack_rows(hs.T)  # packed columns of Hs
        self.hs = hs
        self.hc = hc
        self.h1inv = h1inv

    def compress(self, s: np.ndarray) -> np.ndarray:
        """b = Hs s; the source compression stage."""
        s = _check_bits(s, self.code.n_source, "source vector")
        return self._xor_columns(self._hs_cols, s, self.code.n_compressed)

    def make_parity(self, b: np.ndarray) -> np.ndarray:
        """p = H1^-1 H2 b; the channel parity stage."""
        b = _check_bits(b, self.code.n_compressed, "compressed vector")
        return self._xor_columns(self._parity_cols, b, self.code.n_parity)

    def encode(self, s: np.ndarray) -> np.ndarray:
        """Full codeword c = [p b] (length n_code, overall rate n_source/n_code)."""
        b = self.compress(s)
        return np.concatenate([self.make_parity(b), b])

    def encode_batch(self, frames: np.ndarray) -> np.ndarray:
        frames = np.asarray(frames, dtype=np.uint8)
        out = np.empty((frames.shape[0], self.code.n_code), dtype=np.uint8)
        for i, s in enumerate(frames):
            out[i] = self.encode(s)
        return out

    @staticmethod
    def _xor_columns(packed_cols, bits, out_len):
        support = np.flatnonzero(bits)
        if support.size == 0:
            return np.zeros(out_len, dtype=np.uint8)
        acc = np.bitwise_xor.reduce(packed_cols[support], axis=0)
        return gf2.unpack_rows(acc[None, :], out_len)[0]


def _check_bits(v, length, name) -> np.ndarray:
    v = np.asarray(v, dtype=np.uint8).ravel()
    if v.shape[0] != length:
        raise ValueError(f"{name} must have length {length}, got {v.shape[0]}")
    if v.size and v.max() > 1:
        raise ValueError(f"{name} entries must be 0/1")
    return v

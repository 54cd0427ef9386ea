"""6-bit saturating fixed-point LLR format and the two-input tanh LUT.

The quantized decoding engine stores every LLR and message as a 6-bit
two's-complement code; check-node products are evaluated by folding a
64x64 lookup table of f(a, b) = 2*atanh(tanh(a/2)*tanh(b/2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FixedFormat:
    """Two's-complement fixed-point format: value = code * 2**-frac_bits."""

    total_bits: int = 6
    frac_bits: int = 2

    def __post_init__(self):
        if self.total_bits < 2 or not 0 <= self.frac_bits < self.total_bits:
            raise ValueError(f"bad fixed-point split {self.total_bits}/{self.frac_bits}")

    @property
    def step(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def min_code(self) -> int:
        return -(1 << (self.total_bits - 1))

    @property
    def max_code(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    @property
    def min_value(self) -> float:
        return self.min_code * self.step

    @property
    def max_value(self) -> float:
        return self.max_code * self.step


Q6 = FixedFormat(total_bits=6, frac_bits=2)


def quantize_to_code(x, fmt: FixedFormat = Q6) -> np.ndarray:
    """Round-to-nearest-even onto the grid, saturating at both ends."""
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        raise ValueError("cannot quantize NaN")
    codes = np.rint(x / fmt.step)
    return np.clip(codes, fmt.min_code, fmt.max_code).astype(np.int32)


def quantize(x, fmt: FixedFormat = Q6):
    """Quantized value(s) on the fixed-point grid."""
    q = quantize_to_code(x, fmt).astype(np.float64) * fmt.step
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(q)
    return q


def _pair_tanh(va: float, vb: float) -> float:
    p = math.tanh(va / 2.0) * math.tanh(vb / 2.0)
    # |p| < 1 strictly for in-range fixed-point values
    return 2.0 * math.atanh(p)


def build_tanh_lut(fmt: FixedFormat = Q6) -> np.ndarray:
    """Full table of the two-input check-node core, indexed by code + 2**(t-1).

    Entry [a + off, b + off] = quantize(2*atanh(tanh(a*step/2)*tanh(b*step/2))),
    evaluated in double precision.
    """
    n = 1 << fmt.total_bits
    off = -fmt.min_code
    lut = np.zeros((n, n), dtype=np.int8)
    for a in range(fmt.min_code, fmt.max_code + 1):
        for b in range(fmt.min_code, fmt.max_code + 1):
            val = _pair_tanh(a * fmt.step, b * fmt.step)
            lut[a + off, b + off] = int(quantize_to_code(val, fmt))
    return lut


def lut_to_hex(lut: np.ndarray, fmt: FixedFormat = Q6) -> str:
    """Serialize a LUT as hex text: one row per line, two hex digits per entry."""
    mask = (1 << fmt.total_bits) - 1
    lines = []
    for row in lut:
        lines.append(" ".join(f"{int(c) & mask:02x}" for c in row))
    return "\n".join(lines) + "\n"


def lut_from_hex(text: str, fmt: FixedFormat = Q6) -> np.ndarray:
    """Parse the hex dump format back into a code-indexed table."""
    n = 1 << fmt.total_bits
    rows = []
    for lineno, line in enumerate(text.strip().splitlines(), start=1):
        entries = line.split()
        if len(entries) != n:
            raise ValueError(f"line {lineno}: expected {n} entries, got {len(entries)}")
        codes = [int(e, 16) for e in entries]
        # sign-extend from total_bits
        signed = [(c ^ (n >> 1)) - (n >> 1) for c in codes]
        rows.append(signed)
    if len(rows) != n:
        raise ValueError(f"expected {n} lines, got {len(rows)}")
    return np.array(rows, dtype=np.int8)

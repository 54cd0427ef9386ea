"""BPSK modulation, AWGN, and LLR demodulation.

Conventions fixed here (every BER point depends on them): bit 0 maps to
+1.0 and bit 1 to -1.0; sigma**2 = 1 / (2 * rate * 10**(ebn0_db/10));
channel LLR is 2*y/sigma**2, positive favouring bit 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelParams:
    ebn0_db: float
    rate: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.ebn0_db):
            raise ValueError("ebn0_db must be finite")
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    @property
    def sigma(self) -> float:
        return float(np.sqrt(1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))))


def modulate(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    return 1.0 - 2.0 * bits.astype(np.float64)


def add_noise(x, params: ChannelParams, rng: np.random.Generator | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if rng is None:
        rng = np.random.default_rng(params.seed)
    return x + params.sigma * rng.standard_normal(x.shape)


def demodulate_llr(y, params: ChannelParams) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    return 2.0 * y / params.sigma**2


def hard_decision(llr) -> np.ndarray:
    """LLR >= 0 decides bit 0."""
    return (np.asarray(llr) < 0).astype(np.uint8)

"""Source-vector interleaving for unequal error protection.

The regular UEP interleaver steers even input positions (assumed to carry
the semantically important bits) into the protected first half of the
frame; the random kind is a seeded Fisher-Yates permutation used for
burst-error spreading.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("none", "regular-uep", "random")


@dataclass(frozen=True)
class InterleaverSpec:
    kind: str = "none"
    n: int = 6400
    seed: int = 0
    protected_region: tuple = field(default=None)  # (start, stop), defaults to first half

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown interleaver kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("frame length must be positive")
        if self.kind == "regular-uep" and self.n % 2:
            raise ValueError("regular-uep needs an even frame length")
        if self.protected_region is None:
            object.__setattr__(self, "protected_region", (0, self.n // 2))


def permutation(spec: InterleaverSpec) -> np.ndarray:
    """Permutation pi such that interleave(s)[i] = s[pi[i]]."""
    if spec.kind == "none":
        return np.arange(spec.n)
    if spec.kind == "regular-uep":
        return np.concatenate([np.arange(0, spec.n, 2), np.arange(1, spec.n, 2)])
    rng = np.random.default_rng(spec.seed)
    return rng.permutation(spec.n)


def interleave(s: np.ndarray, spec: InterleaverSpec) -> np.ndarray:
    s = np.asarray(s)
    if s.shape[-1] != spec.n:
        raise ValueError(f"expected frame length {spec.n}, got {s.shape[-1]}")
    return s[..., permutation(spec)]


def deinterleave(v: np.ndarray, spec: InterleaverSpec) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != spec.n:
        raise ValueError(f"expected frame length {spec.n}, got {v.shape[-1]}")
    return v[..., np.argsort(permutation(spec))]

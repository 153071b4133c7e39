"""Counter-based SplitMix64 streams.

Every replica of an ensemble owns a 64-bit key; its ``k``-th uniform is a
pure function of ``(key, k)``.  The Python class and the numba kernels share
the same arithmetic, so a walk sampled by either route is bit-identical.
"""
from __future__ import annotations

import numpy as np
from numba import njit

GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TO_UNIT = 1.0 / (1 << 53)


def root_key(seed: int) -> int:
    """Scramble an arbitrary integer seed into a 64-bit root key."""
    ss = np.random.SeedSequence(int(seed))
    return int(ss.generate_state(1, np.uint64)[0])


def stream_key(seed: int, index: int = 0) -> int:
    """Key of child stream ``index``: draw ``index + 1`` of the root stream."""
    return _mix((root_key(seed) + (int(index) + 1) * GAMMA) & _MASK)


def stream_keys(seed: int, start: int, count: int) -> np.ndarray:
    return _child_keys(np.uint64(root_key(seed)), start, count)


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Pure-Python stream; ``draws`` counts consumed variates."""

    def __init__(self, key: int):
        self.key = int(key) & _MASK
        self.draws = 0

    @classmethod
    def from_seed(cls, seed: int, index: int = 0) -> "SplitMix64":
        return cls(stream_key(seed, index))

    def next_u64(self) -> int:
        self.draws += 1
        return _mix((self.key + self.draws * GAMMA) & _MASK)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _TO_UNIT


_G = np.uint64(GAMMA)
_NM1 = np.uint64(_M1)
_NM2 = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


@njit(cache=True, inline="always")
def uniform_at(key, counter):
    """Uniform in [0, 1) for draw number ``counter`` (1-based) of ``key``."""
    z = key + np.uint64(counter) * _G
    z = (z ^ (z >> _S30)) * _NM1
    z = (z ^ (z >> _S27)) * _NM2
    z = z ^ (z >> _S31)
    return float(z >> _S11) * _TO_UNIT


@njit(cache=True)
def _child_keys(root, start, count):
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        z = root + np.uint64(start + i + 1) * _G
        z = (z ^ (z >> _S30)) * _NM1
        z = (z ^ (z >> _S27)) * _NM2
        out[i] = z ^ (z >> _S31)
    return out

"""Counter-based random streams built on the SplitMix64 finalizer.

A stream is identified by a single 64-bit seed. Its ``j``-th output is
``mix64(seed + (j + 1) * GOLDEN)``, exactly the SplitMix64 sequence started at
``seed``. Child streams are derived with :func:`substream`, so a replication's
draws depend only on ``(base_seed, cell_index, replication_index)`` and never
on execution order or worker count.

Reference values (for cross-language reproduction)::

    mix64(0)              == 0x0000000000000000
    substream(0, 0)       == 0xE220A8397B1DCDAF
"""

from __future__ import annotations

import numpy as np

__all__ = ["GOLDEN", "mix64", "substream", "substreams", "uniforms"]

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 output finalizer on a Python int (taken mod 2**64)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def substream(seed: int, index: int) -> int:
    """Seed of the ``index``-th child stream of ``seed``."""
    return mix64((seed & MASK64) + (index + 1) * GOLDEN)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= np.uint64(_M1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_M2)
        z ^= z >> np.uint64(31)
    return z


def substreams(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Vectorised :func:`substream` for indices ``start .. start+count-1``."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & MASK64) + idx * np.uint64(GOLDEN)
    return _mix64_array(z)


def uniforms(seeds: np.ndarray | int, count: int) -> np.ndarray:
    """First ``count`` draws on (0, 1] from each stream in ``seeds``.

    Returns an array of shape ``seeds.shape + (count,)``. Each draw keeps the
    top 53 bits of a 64-bit output: ``((x >> 11) + 1) * 2**-53``, so 0 is never
    produced and 1 is.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    idx = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = seeds[..., None] + idx * np.uint64(GOLDEN)
    bits = _mix64_array(z) >> np.uint64(11)
    return (bits.astype(np.float64) + 1.0) * (1.0 / 9007199254740992.0)

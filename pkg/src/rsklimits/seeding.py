"""Deterministic sub-seed derivation for replica-parallel sampling.

Every Monte Carlo driver in this package that runs ``reps`` independent
replicas gives replica ``i`` the generator ``numpy.random.default_rng(
mix_seed(seed, i))``.  The mixing function is pinned here so that results
are reproducible for a given master seed no matter how replicas are
batched or parallelized.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix_seed(seed: int, index: int) -> int:
    """Derive the 64-bit sub-seed for replica ``index`` from a master seed.

    SplitMix64 finalizer applied to ``seed + (index + 1) * GOLDEN mod 2**64``
    where ``GOLDEN = 0x9E3779B97F4A7C15``.
    """
    if index < 0:
        raise ValueError("replica index must be nonnegative")
    z = (int(seed) + (index + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def replica_seeds(seed: int, reps: int) -> list[int]:
    """Sub-seeds for replicas 0..reps-1."""
    return [mix_seed(seed, i) for i in range(reps)]

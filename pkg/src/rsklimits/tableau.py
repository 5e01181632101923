"""RSK shapes of random words and their fluctuation statistics.

Three exact routes to the same combinatorial quantities cross-check each
other: row insertion (rsk_shape), the count-difference maximization
(li_dp, v_r_bruteforce), and a direct search over assignments of
positions to disjoint weakly increasing subsequences.  The Monte Carlo
entry points simulate many words at once and return the centered, scaled
row lengths used by the limit-law tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import multiplicity_structure
from .markov import (TransitionMatrix, WordSample, letter_stream,
                     stationary_distribution)
from .seeding import replica_seeds
from .staircase import (IncrementMatrix, staircase_max_multi,
                        staircase_max_single)

BRUTE_FORCE_MAX_N = 14
BRUTE_FORCE_MAX_M = 5
ASSIGNMENT_MAX_N = 10


@dataclass(frozen=True)
class TableauShape:
    """Row lengths of the insertion tableau; rows[0] is the longest
    weakly increasing subsequence length."""

    rows: np.ndarray
    n: int

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim != 1 or np.any(rows < 0) or np.any(np.diff(rows) > 0):
            raise ValueError("shape rows must be nonincreasing and nonnegative")
        if int(rows.sum()) != self.n:
            raise ValueError("shape must partition the word length")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)


@dataclass(frozen=True)
class ShapeSampleSet:
    """Replicated shape statistics: scaled[i, k] = (R^k - pi_tau(k) n)/sqrt(n)
    and rawV[i, r] = sum of the first r row lengths, per replica i."""

    reps: int
    scaled: np.ndarray
    rawV: np.ndarray


def rsk_shape(word: WordSample) -> TableauShape:
    """Shape of the insertion tableau by row bumping.

    Rows stay weakly increasing: the inserted letter displaces the
    smallest strictly greater letter, which cascades to the next row.
    Only per-row letter counts are kept; the positions never matter for
    the shape.
    """
    m = word.m
    row_counts = [[0] * m for _ in range(m)]
    lengths = [0] * m
    for x in word.letters:
        v = int(x) - 1
        for r in range(m):
            row = row_counts[r]
            bumped = -1
            for letter in range(v + 1, m):
                if row[letter] > 0:
                    bumped = letter
                    break
            row[v] += 1
            if bumped < 0:
                lengths[r] += 1
                break
            row[bumped] -= 1
            v = bumped
    return TableauShape(rows=np.array(lengths, dtype=np.int64), n=word.n)


def _cascade_column(counts: np.ndarray, lengths: np.ndarray,
                    values: np.ndarray, cols: np.ndarray) -> None:
    # One insertion step for every replica at once; counts is
    # (reps, row, letter) and values holds the 0-based inserted letters.
    act = np.arange(counts.shape[0])
    v = values.astype(np.int64, copy=True)
    r = 0
    while act.size:
        block = counts[act, r, :]
        cond = (block > 0) & (cols[None, :] > v[act, None])
        has_bump = cond.any(axis=1)
        stay = act[~has_bump]
        counts[stay, r, v[stay]] += 1
        lengths[stay, r] += 1
        bump = act[has_bump]
        if bump.size:
            y = cond[has_bump].argmax(axis=1)
            counts[bump, r, y] -= 1
            counts[bump, r, v[bump]] += 1
            v[bump] = y
        act = bump
        r += 1


def rsk_rows_batch(letters: np.ndarray, m: int) -> np.ndarray:
    """Row lengths for a batch of equal-length words.

    letters is (reps, n) with 1-based values; returns (reps, m).
    """
    arr = np.asarray(letters, dtype=np.int64)
    reps, n = arr.shape
    counts = np.zeros((reps, m, m), dtype=np.int64)
    lengths = np.zeros((reps, m), dtype=np.int64)
    cols = np.arange(m)
    for t in range(n):
        _cascade_column(counts, lengths, arr[:, t] - 1, cols)
    return lengths


def li_dp(word: WordSample) -> int:
    """Longest weakly increasing subsequence from count differences.

    Abel summation turns the ordered-breakpoint sum of the pairwise count
    differences into a single staircase maximization over the rows
    a^l - a^m (the last row is identically zero, which frees the final
    breakpoint); adding back a^m_n gives the subsequence length.
    """
    m = word.m
    counts = word.counts
    prefix_rows = (counts - counts[:, m - 1:m]).T
    inc = IncrementMatrix(np.diff(prefix_rows, axis=1))
    value = staircase_max_single(inc).value
    return int(counts[-1, m - 1]) + int(round(value))


def v_r_bruteforce(word: WordSample, r: int) -> int:
    """Sum of the first r row lengths by exhaustive breakpoint search."""
    if word.n > BRUTE_FORCE_MAX_N or word.m > BRUTE_FORCE_MAX_M:
        raise ValueError("word too large for exhaustive maximization")
    if not 1 <= r <= word.m:
        raise ValueError("row count out of range")
    one_hot = np.diff(word.counts, axis=0).T
    return int(round(staircase_max_multi(IncrementMatrix(one_hot), r)))


def disjoint_subsequences_oracle(word: WordSample, r: int) -> int:
    """Max total length of r disjoint weakly increasing subsequences.

    Dynamic program over the sorted tuple of last letters of the r
    subsequences (0 = still empty); equivalent to trying every assignment
    of positions to subsequences but polynomial in n.
    """
    if word.n > ASSIGNMENT_MAX_N:
        raise ValueError("word too long for subsequence assignment search")
    if r < 1:
        raise ValueError("need at least one subsequence")
    best: dict[tuple[int, ...], int] = {(0,) * r: 0}
    for x in word.letters:
        x = int(x)
        nxt = dict(best)
        for state, count in best.items():
            tried: set[int] = set()
            for i, last in enumerate(state):
                if last <= x and last not in tried:
                    tried.add(last)
                    ns = tuple(sorted(state[:i] + (x,) + state[i + 1:]))
                    if nxt.get(ns, -1) < count + 1:
                        nxt[ns] = count + 1
        best = nxt
    return max(best.values())


def simulate_shapes(P: TransitionMatrix, n: int, reps: int,
                    seed: int) -> ShapeSampleSet:
    """RSK shapes of reps independent stationary words of length n.

    Replica i consumes its own generator seeded from (seed, i), so
    results are reproducible and independent of batching.
    """
    if n < 1 or reps < 1:
        raise ValueError("need n >= 1 and reps >= 1")
    pi = stationary_distribution(P)
    tau = multiplicity_structure(pi).tau
    m = P.m
    counts = np.zeros((reps, m, m), dtype=np.int64)
    lengths = np.zeros((reps, m), dtype=np.int64)
    cols = np.arange(m)
    seeds = replica_seeds(seed, reps)
    for block in letter_stream(P, "stationary", n, seeds):
        for j in range(block.shape[1]):
            _cascade_column(counts, lengths, block[:, j], cols)
    raw_v = np.cumsum(lengths, axis=1)
    scaled = (lengths - n * pi.pi[tau - 1][None, :]) / np.sqrt(n)
    return ShapeSampleSet(reps=reps, scaled=scaled, rawV=raw_v)


def empirical_t_covariance(P: TransitionMatrix, n: int, reps: int,
                           seed: int) -> np.ndarray:
    """Sample covariance of the centered, scaled letter counts.

    Estimates the asymptotic covariance: each replica contributes
    (a^r_n - pi_r n)/sqrt(n) for every letter r.
    """
    if n < 1 or reps < 2:
        raise ValueError("need n >= 1 and reps >= 2")
    pi = stationary_distribution(P)
    m = P.m
    totals = np.zeros((reps, m), dtype=np.int64)
    seeds = replica_seeds(seed, reps)
    for block in letter_stream(P, "stationary", n, seeds):
        for letter in range(m):
            totals[:, letter] += (block == letter).sum(axis=1)
    t_scaled = (totals - n * pi.pi[None, :]) / np.sqrt(n)
    return np.cov(t_scaled, rowvar=False, ddof=1)


def write_scaled_csv(samples: ShapeSampleSet, path: str) -> None:
    """Export scaled rows as CSV: replica,r1,...,rm at full precision."""
    m = samples.scaled.shape[1]
    header = "replica," + ",".join(f"r{k}" for k in range(1, m + 1))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i in range(samples.reps):
            row = ",".join(f"{x:.17g}" for x in samples.scaled[i])
            fh.write(f"{i},{row}\n")

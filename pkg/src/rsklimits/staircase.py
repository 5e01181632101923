"""Maximization over staircase-ordered breakpoint sets.

The single engine behind both the combinatorial row-length identities
(integer count increments) and the Brownian limit functionals (Gaussian
increments).  A staircase assignment places breakpoints k[j][l] that are
nondecreasing along each row j, with k[j][j-1] = 0 and k[j][m-r+j] = N
forced, and staggered between rows: k[j][l] <= k[j-1][l-1], so the
level-l window of row j closes before the level-l window of row j-1
opens.  The stagger is what makes the selected windows disjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ENUMERATION_BUDGET = 10 ** 8


class IncrementMatrix:
    """m x N increments w plus prefix sums W with W[l][0] = 0.

    Integer input stays integer so word-count maximizations are exact.
    """

    def __init__(self, w: np.ndarray):
        arr = np.asarray(w)
        if arr.ndim != 2:
            raise ValueError("increments must be a 2-D array")
        self.w = arr
        prefix = np.zeros((arr.shape[0], arr.shape[1] + 1), dtype=arr.dtype)
        np.cumsum(arr, axis=1, out=prefix[:, 1:])
        self.prefix = prefix

    @property
    def m(self) -> int:
        return self.w.shape[0]

    @property
    def N(self) -> int:
        return self.w.shape[1]


@dataclass(frozen=True)
class StaircaseAssignment:
    r: int
    breakpoints: np.ndarray  # (r, m+1) integers, row j at index j-1


@dataclass(frozen=True)
class SingleMaxResult:
    value: float
    argmax: StaircaseAssignment


def staircase_max_single(inc: IncrementMatrix) -> SingleMaxResult:
    """Chained maximization over 0 <= k_1 <= ... <= k_{m-1} <= N.

    Maximizes sum_l (W[l][k_l] - W[l][k_{l-1}]) with k_0 = 0, k_m = N.
    Runs the O(mN) suffix recursion; ties in the argmax resolve to the
    lexicographically smallest breakpoint vector.
    """
    m, n = inc.m, inc.N
    w_prefix = inc.prefix
    # suffix[l](k) = best value of rows l..m given the previous breakpoint k
    suffix_best = [None] * (m + 1)
    head = [None] * m  # head[l-1](j) = W[l][j] + suffix[l+1](j)
    last = w_prefix[m - 1][n] - w_prefix[m - 1]
    suffix_best[m] = last
    for level in range(m - 1, 0, -1):
        row = w_prefix[level - 1]
        h = row + suffix_best[level + 1]
        head[level - 1] = h
        suffix_best[level] = np.maximum.accumulate(h[::-1])[::-1] - row
    value = suffix_best[1][0] if m > 1 else w_prefix[0][n]
    breakpoints = np.empty((1, m + 1), dtype=np.int64)
    breakpoints[0, 0] = 0
    breakpoints[0, m] = n
    prev = 0
    for level in range(1, m):
        h = head[level - 1]
        target = np.max(h[prev:])
        prev = prev + int(np.argmax(h[prev:] >= target))
        breakpoints[0, level] = prev
    assignment = StaircaseAssignment(r=1, breakpoints=breakpoints)
    return SingleMaxResult(value=float(value), argmax=assignment)


def staircase_max_multi(inc: IncrementMatrix, r: int) -> float:
    """Exact maximum over the r-row staircase set by pruned enumeration.

    Free breakpoints are visited in (j, l) staircase order; the range of
    each is clipped below by its left neighbor and above by the previous
    row's preceding breakpoint, so infeasible prefixes are never expanded.
    """
    m, n = inc.m, inc.N
    if not 1 <= r <= m:
        raise ValueError("row count must satisfy 1 <= r <= m")
    w_prefix = inc.prefix
    if r == m:
        return float(w_prefix[:, n].sum() - w_prefix[:, 0].sum())
    free = r * (m - r)
    if (n + 1) ** free > ENUMERATION_BUDGET:
        raise ValueError("instance too large for exact multi-row maximization")
    cells = [(j, level) for j in range(1, r + 1)
             for level in range(j, m - r + j)]
    # assigned[j][l] holds k[j][l]; row 0 is an N-valued sentinel (no cap)
    assigned = [[n] * (m + 1) for _ in range(r + 1)]
    for j in range(1, r + 1):
        assigned[j][j - 1] = 0
        assigned[j][m - r + j] = n
    best = -math.inf
    n_cells = len(cells)
    rows = w_prefix

    def recurse(ci: int, acc: float) -> None:
        nonlocal best
        if ci == n_cells:
            if acc > best:
                best = acc
            return
        j, level = cells[ci]
        lo = assigned[j][level - 1]
        hi = assigned[j - 1][level - 1]
        closing = level == m - r + j - 1
        row = rows[level - 1]
        base = row[lo]
        close_row = rows[level] if closing else None
        row_slot = assigned[j]
        for v in range(lo, hi + 1):
            term = row[v] - base
            if closing:
                term = term + close_row[n] - close_row[v]
            row_slot[level] = v
            recurse(ci + 1, acc + term)
        row_slot[level] = n

    recurse(0, 0.0)
    return float(best)


def chained_max_batch(paths: np.ndarray) -> np.ndarray:
    """Single-row staircase value for a batch of prefix-path stacks.

    ``paths`` has shape (B, d, N+1); returns the length-B vector of
    max over 0 <= k_1 <= ... <= k_{d-1} <= N of the chained increments.
    Equivalent to staircase_max_single on each replica, vectorized.
    """
    d = paths.shape[1]
    acc = paths[:, 0, :] - paths[:, 0, :1]
    for level in range(1, d):
        row = paths[:, level, :]
        acc = row + np.maximum.accumulate(acc - row, axis=-1)
    return acc[:, -1]


def complement_max_batch(paths: np.ndarray) -> np.ndarray:
    """Staircase value for r = d-1 rows.

    Each row j has one free breakpoint k_j contributing
    W[j](k_j) - W[j+1](k_j), plus the constant W[j+1](N) - W[j](0); the
    stagger forces k_1 >= k_2 >= ... >= k_{d-1}, a chain solved by a
    running-maximum recursion from the innermost row outward.
    """
    s = paths.shape[1] - 1
    f = paths[:, :-1, :] - paths[:, 1:, :]
    acc = f[:, s - 1, :]
    for j in range(s - 2, -1, -1):
        acc = f[:, j, :] + np.maximum.accumulate(acc, axis=-1)
    const = paths[:, 1:, -1].sum(axis=1) - paths[:, :-1, 0].sum(axis=1)
    return const + acc.max(axis=-1)


def four_two_max_batch(paths: np.ndarray) -> np.ndarray:
    """Staircase value for d = 4 paths, r = 2 rows.

    Free breakpoints k22 <= k11 <= k12, k22 <= k23 <= k12 with k11, k23
    unordered relative to each other.  Splitting on that one comparison
    gives two totally ordered chains, each solvable by running maxima;
    the true maximum is the larger of the two.
    """
    w1 = paths[:, 0, :]
    w2 = paths[:, 1, :]
    w3 = paths[:, 2, :]
    w4 = paths[:, 3, :]
    const = w3[:, -1] + w4[:, -1] - w1[:, 0] - w2[:, 0]
    p = w2 - w3  # at k22
    f = w1 - w2  # at k11
    q = w3 - w4  # at k23
    g = w2 - w3  # at k12
    acc = f + np.maximum.accumulate(p, axis=-1)
    acc = q + np.maximum.accumulate(acc, axis=-1)
    chain_a = (g + np.maximum.accumulate(acc, axis=-1)).max(axis=-1)
    acc = q + np.maximum.accumulate(p, axis=-1)
    acc = f + np.maximum.accumulate(acc, axis=-1)
    chain_b = (g + np.maximum.accumulate(acc, axis=-1)).max(axis=-1)
    return const + np.maximum(chain_a, chain_b)


def staircase_values_batch(paths: np.ndarray, r: int) -> np.ndarray:
    """Batch staircase maxima over (B, d, N+1) prefix paths.

    Uses closed-form vectorized scans where the staircase structure
    decouples (r = 1, r = d-1, r = d, and the d=4, r=2 sweep) and falls
    back to the exact enumerator per replica otherwise.
    """
    b, d, _ = paths.shape
    if not 1 <= r <= d:
        raise ValueError("row count must satisfy 1 <= r <= d")
    if r == d:
        return paths[:, :, -1].sum(axis=1) - paths[:, :, 0].sum(axis=1)
    if r == 1:
        return chained_max_batch(paths)
    if r == d - 1:
        return complement_max_batch(paths)
    if (d, r) == (4, 2):
        return four_two_max_batch(paths)
    out = np.empty(b)
    for i in range(b):
        inc = IncrementMatrix(np.diff(paths[i], axis=1))
        out[i] = staircase_max_multi(inc, r)
    return out

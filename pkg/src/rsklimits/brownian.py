"""Correlated Brownian path bundles and their row functionals.

A bundle carries m paths sampled on the grid k/N whose joint covariance
at time t is t * Sigma, so the r-th prefix-row functional of the chain
can be evaluated directly: a Gaussian head from the paths above the tie
block plus a staircase maximum over the block itself.

Single-breakpoint maxima are also offered in an exact form: the grid
path is augmented with per-cell Brownian-bridge maxima, which recovers
the continuum running maximum in law at any grid size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import (MultiplicityStructure, multiplicity_structure,
                         psd_factor)
from .seeding import mix_seed
from .staircase import staircase_values_batch

ZERO_SUM_TOL = 1e-8
REPLICA_CHUNK = 1024

_erf = np.frompyfunc(math.erf, 1, 1)


class PathBundle:
    """m scaled Brownian paths on the grid k/N with covariance t*Sigma."""

    def __init__(self, paths: np.ndarray, sigma: np.ndarray):
        arr = np.array(paths, dtype=float)
        sig = np.array(sigma, dtype=float)
        if arr.ndim != 2 or arr.shape[1] < 2:
            raise ValueError("paths must be an m x (N+1) matrix")
        if sig.shape != (arr.shape[0], arr.shape[0]):
            raise ValueError("covariance size must match the path count")
        if np.max(np.abs(arr[:, 0])) > ZERO_SUM_TOL:
            raise ValueError("paths must start at 0")
        if np.max(np.abs(sig.sum(axis=1))) <= ZERO_SUM_TOL:
            if np.max(np.abs(arr.sum(axis=0))) > ZERO_SUM_TOL:
                raise ValueError("paths of a zero-row-sum bundle must sum to 0")
        arr.setflags(write=False)
        sig.setflags(write=False)
        self.paths = arr
        self.sigma = sig

    @property
    def m(self) -> int:
        return self.paths.shape[0]

    @property
    def grid_size(self) -> int:
        return self.paths.shape[1] - 1

    @property
    def times(self) -> np.ndarray:
        n = self.grid_size
        return np.arange(n + 1) / n


@dataclass(frozen=True)
class LocalScorePair:
    """Largest increment of a path and the maximum of its absolute value."""

    score: float
    reflected_max: float


def sample_path_bundle(sig, grid_size: int, seed: int) -> PathBundle:
    """Draw one bundle: increments are a PSD factor applied to iid normals."""
    if grid_size < 1:
        raise ValueError("grid size must be at least 1")
    factor = psd_factor(sig)
    m = factor.shape[0]
    rng = np.random.default_rng(int(seed))
    z = rng.standard_normal((m, grid_size))
    inc = (factor @ z) / math.sqrt(grid_size)
    paths = np.concatenate([np.zeros((m, 1)), np.cumsum(inc, axis=1)], axis=1)
    sigma = sig.sigma if hasattr(sig, "sigma") else np.asarray(sig, dtype=float)
    return PathBundle(paths, sigma)


def _block_values(block_paths: np.ndarray, rows: int) -> np.ndarray:
    try:
        return staircase_values_batch(block_paths, rows)
    except ValueError as exc:
        if "too large" in str(exc):
            raise ValueError(
                "staircase grid too large for exact maximization;"
                " reduce the grid size or the row count") from exc
        raise


def _v_levels(paths: np.ndarray, ms: MultiplicityStructure,
              levels: list[int]) -> np.ndarray:
    """Functional values for the requested levels, one column per level.

    ``paths`` has shape (B, m, N+1) in original letter order; rows are
    permuted into descending stationary-probability order before the
    head sums and block maximizations.
    """
    perm = np.asarray(ms.tau, dtype=np.int64) - 1
    ordered = paths[:, perm, :]
    out = np.empty((paths.shape[0], len(levels)))
    for col, r in enumerate(levels):
        mr = int(ms.m_r[r - 1])
        dr = int(ms.d_r[r - 1])
        s = r - mr
        head = ordered[:, :mr, -1].sum(axis=1)
        if s == dr:
            tail = ordered[:, mr:mr + dr, -1].sum(axis=1)
        else:
            tail = _block_values(ordered[:, mr:mr + dr, :], s)
        out[:, col] = head + tail
    return out


def limit_functional_v(bundle: PathBundle, ms: MultiplicityStructure,
                       r: int) -> float:
    """Limit of the scaled r-th prefix row sum, evaluated on one bundle."""
    if len(ms.tau) != bundle.m:
        raise ValueError("multiplicity structure does not match the bundle")
    if not 1 <= r <= bundle.m:
        raise ValueError("row count out of range")
    return float(_v_levels(bundle.paths[None, :, :], ms, [r])[0, 0])


def limit_shape_rows(bundle: PathBundle,
                     ms: MultiplicityStructure) -> np.ndarray:
    """All m scaled row limits: first differences of the level functionals."""
    if len(ms.tau) != bundle.m:
        raise ValueError("multiplicity structure does not match the bundle")
    levels = list(range(1, bundle.m + 1))
    values = _v_levels(bundle.paths[None, :, :], ms, levels)[0]
    return np.diff(values, prepend=0.0)


def d_functional(bundle: PathBundle, r: int) -> float:
    """Staircase maximum over all paths of the bundle with r rows."""
    if not 1 <= r <= bundle.m:
        raise ValueError("row count out of range")
    return float(_block_values(bundle.paths[None, :, :], r)[0])


def h_functional(bundle: PathBundle, r: int) -> float:
    """Centered staircase maximum: subtracts r/m of the endpoint sum."""
    ends = float(bundle.paths[:, -1].sum())
    return d_functional(bundle, r) - (r / bundle.m) * ends


def u_functional(path: np.ndarray, beta: float) -> float:
    """Endpoint-weighted running maximum (beta - 1/2) B(1) + max B."""
    arr = np.asarray(path, dtype=float)
    if arr.ndim != 1 or len(arr) < 2:
        raise ValueError("path must be a vector of at least two grid values")
    return (beta - 0.5) * float(arr[-1]) + float(arr.max())


def local_score_pair(path: np.ndarray) -> LocalScorePair:
    """Largest increment max(B(t2) - B(t1)) and max |B|, one sweep each."""
    arr = np.asarray(path, dtype=float)
    if arr.ndim != 1 or len(arr) < 2:
        raise ValueError("path must be a vector of at least two grid values")
    running_min = np.minimum.accumulate(arr)
    return LocalScorePair(score=float(np.max(arr - running_min)),
                          reflected_max=float(np.max(np.abs(arr))))


def _chunks(reps: int):
    start = 0
    index = 0
    while start < reps:
        yield index, min(REPLICA_CHUNK, reps - start)
        start += REPLICA_CHUNK
        index += 1


def _correlated_paths(factor: np.ndarray, grid_size: int, count: int,
                      rng: np.random.Generator) -> np.ndarray:
    m = factor.shape[0]
    z = rng.standard_normal((count, m, grid_size))
    inc = np.einsum("ij,bjn->bin", factor, z) / math.sqrt(grid_size)
    zero = np.zeros((count, m, 1))
    return np.concatenate([zero, np.cumsum(inc, axis=2)], axis=2)


def sample_functional_values(sig, pi, r: int, grid_size: int, reps: int,
                             seed: int) -> np.ndarray:
    """reps independent draws of the level-r functional for one chain."""
    values = sample_shape_rows(sig, pi, grid_size, reps, seed,
                               levels=[int(r)])
    return values[:, 0]


def sample_shape_rows(sig, pi, grid_size: int, reps: int, seed: int,
                      levels: list[int] | None = None) -> np.ndarray:
    """Joint functional draws, every level evaluated on the same bundle.

    Returns the level values themselves when ``levels`` is given;
    otherwise returns the m row limits (first differences over r).
    """
    if grid_size < 1:
        raise ValueError("grid size must be at least 1")
    if reps < 1:
        raise ValueError("need reps >= 1")
    factor = psd_factor(sig)
    m = factor.shape[0]
    ms = multiplicity_structure(pi)
    if len(ms.tau) != m:
        raise ValueError("pi length must match the covariance size")
    wanted = levels if levels is not None else list(range(1, m + 1))
    for r in wanted:
        if not 1 <= r <= m:
            raise ValueError("row count out of range")
    out = np.empty((reps, len(wanted)))
    start = 0
    for index, count in _chunks(reps):
        rng = np.random.default_rng(mix_seed(seed, index))
        paths = _correlated_paths(factor, grid_size, count, rng)
        out[start:start + count] = _v_levels(paths, ms, wanted)
        start += count
    if levels is not None:
        return out
    return np.diff(out, axis=1, prepend=0.0)


def _standard_paths(m: int, grid_size: int, count: int,
                    rng: np.random.Generator) -> np.ndarray:
    inc = rng.standard_normal((count, m, grid_size)) / math.sqrt(grid_size)
    zero = np.zeros((count, m, 1))
    return np.concatenate([zero, np.cumsum(inc, axis=2)], axis=2)


def sample_d_values(m: int, r: int, grid_size: int, reps: int,
                    seed: int) -> np.ndarray:
    """Staircase maxima of m independent standard paths, r rows."""
    if not 1 <= r <= m:
        raise ValueError("row count out of range")
    if grid_size < 1 or reps < 1:
        raise ValueError("need grid size >= 1 and reps >= 1")
    out = np.empty(reps)
    start = 0
    for index, count in _chunks(reps):
        rng = np.random.default_rng(mix_seed(seed, index))
        paths = _standard_paths(m, grid_size, count, rng)
        out[start:start + count] = _block_values(paths, r)
        start += count
    return out


def sample_h_values(m: int, r: int, grid_size: int, reps: int,
                    seed: int) -> np.ndarray:
    """Centered staircase maxima of m independent standard paths."""
    if not 1 <= r <= m:
        raise ValueError("row count out of range")
    if grid_size < 1 or reps < 1:
        raise ValueError("need grid size >= 1 and reps >= 1")
    out = np.empty(reps)
    start = 0
    for index, count in _chunks(reps):
        rng = np.random.default_rng(mix_seed(seed, index))
        paths = _standard_paths(m, grid_size, count, rng)
        ends = paths[:, :, -1].sum(axis=1)
        values = _block_values(paths, r)
        out[start:start + count] = values - (r / m) * ends
        start += count
    return out


def _bridge_max(z: np.ndarray, step_var: float,
                rng: np.random.Generator) -> np.ndarray:
    """Exact continuum maximum of the paths whose grid values are z.

    Conditionally on the endpoints of each grid cell, the in-cell
    maximum of a Brownian bridge has an explicit law; drawing it per
    cell and maximizing reproduces the continuum running maximum
    exactly, independent of grid resolution.
    """
    if step_var <= 0.0:
        return z.max(axis=-1)
    left = z[:, :-1]
    right = z[:, 1:]
    u = 1.0 - rng.random(left.shape)
    disc = (right - left) ** 2 - 2.0 * step_var * np.log(u)
    cell_max = 0.5 * (left + right + np.sqrt(disc))
    return cell_max.max(axis=-1)


def block_functional_pair(block, grid_size: int, reps: int,
                          seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draws of (first, second) level functionals for a 2x2 tie block.

    The first functional is the endpoint of the lower path plus the
    running maximum of the difference path; that maximum is sampled
    with per-cell bridge draws so the pair is exact in law.
    """
    mat = block.sigma if hasattr(block, "sigma") else np.asarray(
        block, dtype=float)
    if mat.shape != (2, 2):
        raise ValueError("block must be a 2x2 covariance")
    factor = psd_factor(mat)
    if grid_size < 1 or reps < 1:
        raise ValueError("need grid size >= 1 and reps >= 1")
    diff_var = float(mat[0, 0] - 2.0 * mat[0, 1] + mat[1, 1])
    diff_var = max(diff_var, 0.0)
    v1 = np.empty(reps)
    v2 = np.empty(reps)
    start = 0
    for index, count in _chunks(reps):
        rng = np.random.default_rng(mix_seed(seed, index))
        paths = _correlated_paths(factor, grid_size, count, rng)
        z = paths[:, 0, :] - paths[:, 1, :]
        peak = _bridge_max(z, diff_var / grid_size, rng)
        v1[start:start + count] = paths[:, 1, -1] + peak
        v2[start:start + count] = paths[:, 0, -1] + paths[:, 1, -1]
        start += count
    return v1, v2


def endpoint_max_pairs(grid_size: int, reps: int, seed: int,
                       sigma: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Draws of (B(1), max B) for one scaled path, maximum exact in law."""
    if grid_size < 1 or reps < 1:
        raise ValueError("need grid size >= 1 and reps >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    ends = np.empty(reps)
    peaks = np.empty(reps)
    start = 0
    step_var = sigma * sigma / grid_size
    for index, count in _chunks(reps):
        rng = np.random.default_rng(mix_seed(seed, index))
        inc = rng.standard_normal((count, grid_size)) * math.sqrt(step_var)
        z = np.concatenate([np.zeros((count, 1)), np.cumsum(inc, axis=1)],
                           axis=1)
        ends[start:start + count] = z[:, -1]
        peaks[start:start + count] = _bridge_max(z, step_var, rng)
        start += count
    return ends, peaks


def local_score_samples(grid_size: int, reps: int,
                        seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Score and reflected-maximum draws from one set of standard paths."""
    if grid_size < 1 or reps < 1:
        raise ValueError("need grid size >= 1 and reps >= 1")
    scores = np.empty(reps)
    reflected = np.empty(reps)
    start = 0
    for index, count in _chunks(reps):
        rng = np.random.default_rng(mix_seed(seed, index))
        inc = rng.standard_normal((count, grid_size)) / math.sqrt(grid_size)
        z = np.concatenate([np.zeros((count, 1)), np.cumsum(inc, axis=1)],
                           axis=1)
        scores[start:start + count] = np.max(
            z - np.minimum.accumulate(z, axis=1), axis=1)
        reflected[start:start + count] = np.max(np.abs(z), axis=1)
        start += count
    return scores, reflected


def chi3_cdf(x) -> np.ndarray:
    """CDF of the length of a standard 3-dimensional Gaussian vector."""
    arr = np.asarray(x, dtype=float)
    pos = np.maximum(arr, 0.0)
    values = np.asarray(_erf(pos / math.sqrt(2.0)), dtype=float)
    values = values - math.sqrt(2.0 / math.pi) * pos * np.exp(-0.5 * pos * pos)
    values = np.where(arr < 0, 0.0, values)
    return float(values) if values.ndim == 0 else values


def two_letter_limit_cdf(a: float, y) -> np.ndarray:
    """Limit CDF of the scaled longest weakly increasing run, two letters.

    For the symmetric two-letter chain with switch probability a, the
    scaled length converges to sigma_a times a chi(3) variable with
    sigma_a = sqrt((1 - a) / a) / 2.
    """
    if not 0.0 < a < 1.0:
        raise ValueError("switch probability must lie in (0, 1)")
    sigma_a = 0.5 * math.sqrt((1.0 - a) / a)
    return chi3_cdf(np.asarray(y, dtype=float) / sigma_a)

"""Hermitian random-matrix spectrum samplers tied to the row limits.

Two entry-variance conventions appear, always as an explicit argument:
density exp(-Tr M^2) uses diagonal variance 1/2, and the unit-variance
traceless 2x2 identity uses diagonal variance 2 so that all three free
entries are standard normal.  The limit-shape comparison uses diagonal
variance 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import multiplicity_structure, psd_factor
from .seeding import mix_seed

DIAG_VARIANCE_SQUARED_DENSITY = 0.5
DIAG_VARIANCE_LIMIT_SHAPE = 1.0
DIAG_VARIANCE_UNIT = 2.0
TRACE_TOL = 1e-9
EIG_CHUNK = 200_000


@dataclass(frozen=True)
class SpectrumSample:
    """Eigenvalues of one sampled matrix, sorted descending."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.eigenvalues, dtype=float)
        if arr.ndim != 1 or len(arr) < 1:
            raise ValueError("eigenvalues must be a nonempty vector")
        if np.any(np.diff(arr) > 0):
            raise ValueError("eigenvalues must be sorted descending")
        arr.setflags(write=False)
        object.__setattr__(self, "eigenvalues", arr)

    @property
    def m(self) -> int:
        return len(self.eigenvalues)


def _hermitian_batch(m: int, count: int, rng: np.random.Generator,
                     diag_variance: float, traceless: bool) -> np.ndarray:
    diag = rng.normal(0.0, np.sqrt(diag_variance), (count, m))
    if traceless:
        diag = diag - diag.mean(axis=1, keepdims=True)
    mats = np.zeros((count, m, m), dtype=complex)
    idx = np.arange(m)
    mats[:, idx, idx] = diag
    if m > 1:
        rows, cols = np.triu_indices(m, k=1)
        scale = np.sqrt(diag_variance / 2.0)
        re = rng.normal(0.0, scale, (count, len(rows)))
        im = rng.normal(0.0, scale, (count, len(rows)))
        mats[:, rows, cols] = re + 1j * im
        mats[:, cols, rows] = re - 1j * im
    return mats


def gue_spectra_batch(m: int, reps: int, seed: int,
                      diag_variance: float = DIAG_VARIANCE_SQUARED_DENSITY,
                      traceless: bool = False) -> np.ndarray:
    """reps spectra as a (reps, m) matrix, rows sorted descending."""
    if m < 1 or (traceless and m < 2):
        raise ValueError("matrix size out of range")
    if reps < 1:
        raise ValueError("need reps >= 1")
    out = np.empty((reps, m))
    start = 0
    index = 0
    while start < reps:
        count = min(EIG_CHUNK, reps - start)
        rng = np.random.default_rng(mix_seed(seed, index))
        mats = _hermitian_batch(m, count, rng, diag_variance, traceless)
        out[start:start + count] = np.linalg.eigvalsh(mats)[:, ::-1]
        start += count
        index += 1
    return out


def sample_gue_spectrum(
        m: int, seed: int,
        diag_variance: float = DIAG_VARIANCE_SQUARED_DENSITY
) -> SpectrumSample:
    """One spectrum with density exp(-Tr M^2 / (2 * diag_variance))."""
    return SpectrumSample(gue_spectra_batch(m, 1, seed, diag_variance)[0])


def sample_traceless_gue_spectrum(
        m: int, seed: int,
        diag_variance: float = DIAG_VARIANCE_SQUARED_DENSITY
) -> SpectrumSample:
    """One spectrum with the diagonal conditioned on zero sum.

    Mean subtraction of the diagonal draws is the exact conditional law
    for iid Gaussians, so the eigenvalues sum to zero up to rounding.
    """
    spectrum = gue_spectra_batch(m, 1, seed, diag_variance, traceless=True)[0]
    return SpectrumSample(spectrum)


def block_conjecture_spectra(pi, sig, reps: int, seed: int) -> np.ndarray:
    """Spectra of the direct-sum matrix over the stationary tie blocks.

    The diagonal is jointly Gaussian with the reordered chain
    covariance; each two-letter tie block receives an independent
    complex off-diagonal entry whose component variance interpolates
    the block variances and covariance.
    """
    if reps < 1:
        raise ValueError("need reps >= 1")
    ms = multiplicity_structure(pi)
    if int(np.max(ms.d_r)) > 2:
        raise ValueError("conjecture sampler limited to multiplicity <= 2")
    sigma = sig.sigma if hasattr(sig, "sigma") else np.asarray(sig, float)
    perm = np.asarray(ms.tau, dtype=np.int64) - 1
    sig_t = sigma[np.ix_(perm, perm)]
    factor = psd_factor(sig_t)
    m = factor.shape[0]
    blocks: list[tuple[int, int]] = []
    r = 1
    while r <= m:
        start_row = int(ms.m_r[r - 1])
        size = int(ms.d_r[r - 1])
        blocks.append((start_row, size))
        r = start_row + size + 1
    out = np.empty((reps, m))
    done = 0
    index = 0
    while done < reps:
        count = min(EIG_CHUNK, reps - done)
        rng = np.random.default_rng(mix_seed(seed, index))
        diag = rng.standard_normal((count, m)) @ factor.T
        eigs = np.empty((count, m))
        for start_row, size in blocks:
            if size == 1:
                eigs[:, start_row] = diag[:, start_row]
                continue
            a = diag[:, start_row]
            b = diag[:, start_row + 1]
            v = (sig_t[start_row, start_row]
                 - 2.0 * sig_t[start_row, start_row + 1]
                 + sig_t[start_row + 1, start_row + 1]) / 4.0
            v = max(float(v), 0.0)
            y = rng.normal(0.0, np.sqrt(v), count)
            z = rng.normal(0.0, np.sqrt(v), count)
            radius = np.sqrt(((a - b) / 2.0) ** 2 + y * y + z * z)
            eigs[:, start_row] = (a + b) / 2.0 + radius
            eigs[:, start_row + 1] = (a + b) / 2.0 - radius
        eigs.sort(axis=1)
        out[done:done + count] = eigs[:, ::-1]
        done += count
        index += 1
    return out


def sample_block_conjecture(pi, sig, seed: int) -> SpectrumSample:
    """One draw from the tie-block direct-sum construction."""
    return SpectrumSample(block_conjecture_spectra(pi, sig, 1, seed)[0])


def _block_params(sig2) -> tuple[float, float, float]:
    mat = sig2.sigma if hasattr(sig2, "sigma") else np.asarray(sig2, float)
    if mat.shape != (2, 2):
        raise ValueError("block must be a 2x2 covariance")
    if abs(mat[0, 1] - mat[1, 0]) > 1e-10:
        raise ValueError("block covariance must be symmetric")
    if np.linalg.eigvalsh(mat).min() < -1e-9:
        raise ValueError("block covariance not positive semidefinite")
    return float(mat[0, 0]), float(mat[0, 1]), float(mat[1, 1])


def hat_parameters(sig2) -> tuple[float, float, float]:
    """(Var W1, Var W2, Cov) for the half-sum and half-difference."""
    s1, cross, s2 = _block_params(sig2)
    return ((s1 + 2.0 * cross + s2) / 4.0,
            (s1 - 2.0 * cross + s2) / 4.0,
            (s1 - s2) / 4.0)


def beta_parameter(sig2) -> float:
    """Dimensionless endpoint weight of the single-path reduction."""
    s1, cross, s2 = _block_params(sig2)
    denom = 2.0 * (s1 - 2.0 * cross + s2)
    if denom <= 0.0:
        return 0.0
    return (s1 - s2) / denom


def two_by_two_pairs(sig2, reps: int, seed: int) -> tuple[np.ndarray,
                                                          np.ndarray]:
    """reps draws of (largest eigenvalue, eigenvalue sum) for a 2x2 block.

    Built from four Gaussians: the correlated half-sum/half-difference
    pair of the diagonal plus two independent off-diagonal components
    sharing the half-difference variance.
    """
    if reps < 1:
        raise ValueError("need reps >= 1")
    var1, var2, cov = hat_parameters(sig2)
    hat = np.array([[var1, cov], [cov, var2]])
    factor = psd_factor(hat)
    lam1 = np.empty(reps)
    pair_sum = np.empty(reps)
    done = 0
    index = 0
    while done < reps:
        count = min(EIG_CHUNK, reps - done)
        rng = np.random.default_rng(mix_seed(seed, index))
        w12 = rng.standard_normal((count, 2)) @ factor.T
        w3 = rng.normal(0.0, np.sqrt(var2), count)
        w4 = rng.normal(0.0, np.sqrt(var2), count)
        lam1[done:done + count] = w12[:, 0] + np.sqrt(
            w12[:, 1] ** 2 + w3 * w3 + w4 * w4)
        pair_sum[done:done + count] = 2.0 * w12[:, 0]
        done += count
        index += 1
    return lam1, pair_sum


def two_by_two_pair_sampler(sig2, seed: int) -> tuple[float, float]:
    """One draw of (largest eigenvalue, eigenvalue sum) for a 2x2 block."""
    lam1, pair_sum = two_by_two_pairs(sig2, 1, seed)
    return float(lam1[0]), float(pair_sum[0])


def perturbed_lambda1_batch(rho: float, reps: int, seed: int) -> np.ndarray:
    """Largest eigenvalue under a trace perturbation of strength rho.

    Mixes an independent standard normal with the unit-convention
    traceless 2x2 top eigenvalue using weights sqrt((1 + rho) / 2) and
    sqrt((1 - rho) / 2).
    """
    if not -1.0 <= rho <= 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    if reps < 1:
        raise ValueError("need reps >= 1")
    base = gue_spectra_batch(2, reps, seed, DIAG_VARIANCE_UNIT,
                             traceless=True)[:, 0]
    rng = np.random.default_rng(mix_seed(seed, 1_000_003))
    g = rng.standard_normal(reps)
    return np.sqrt((1.0 + rho) / 2.0) * g + np.sqrt((1.0 - rho) / 2.0) * base


def perturbed_lambda1(rho: float, seed: int) -> float:
    return float(perturbed_lambda1_batch(rho, 1, seed)[0])


def write_spectra_csv(path: str, spectra: np.ndarray) -> None:
    """CSV with header replica,l1,...,lm and round-trip-safe floats."""
    arr = np.asarray(spectra, dtype=float)
    if arr.ndim != 2:
        raise ValueError("spectra must be a reps x m matrix")
    header = "replica," + ",".join(f"l{k}" for k in range(1, arr.shape[1] + 1))
    with open(path, "w", encoding="ascii") as handle:
        handle.write(header + "\n")
        for i, row in enumerate(arr, start=1):
            cells = ",".join(f"{x:.17g}" for x in row)
            handle.write(f"{i},{cells}\n")

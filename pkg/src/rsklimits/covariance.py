"""Asymptotic covariance of centered letter counts and its structure.

The centered counts (a^1_n - pi_1 n, ..., a^m_n - pi_m n)/sqrt(n) of a
stationary, irreducible, aperiodic chain converge jointly to a Gaussian
vector; this module computes its covariance matrix exactly from the
spectral decomposition, specializes it for circulant chains, classifies
when a circulant chain reproduces the uniform iid limit, interpolates
between a chain and its iid counterpart, and exposes the multiplicity
bookkeeping that drives the limit functionals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .markov import (StationaryDistribution, TransitionMatrix, cyclic_chain,
                     spectral_decomposition, validate_chain)

SYMMETRY_TOL = 1e-10
ROW_SUM_TOL = 1e-9
PSD_TOL = 1e-9
IMAG_RESIDUE_TOL = 1e-9

PiLike = Union[StationaryDistribution, Sequence[float], np.ndarray]


def _pi_vector(pi: PiLike) -> np.ndarray:
    vec = pi.pi if isinstance(pi, StationaryDistribution) else pi
    arr = np.asarray(vec, dtype=float)
    if arr.ndim != 1 or len(arr) < 1:
        raise ValueError("pi must be a vector")
    if np.any(arr < 0) or abs(arr.sum() - 1.0) > 1e-9:
        raise ValueError("pi must be a probability vector")
    return arr


class CovarianceMatrix:
    """Symmetric PSD matrix with zero row sums (the counts sum to n)."""

    def __init__(self, sigma: np.ndarray):
        arr = np.array(sigma, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("covariance must be square")
        if np.max(np.abs(arr - arr.T)) > SYMMETRY_TOL:
            raise ValueError("covariance must be symmetric")
        arr = (arr + arr.T) / 2.0
        if np.max(np.abs(arr.sum(axis=1))) > ROW_SUM_TOL:
            raise ValueError("covariance rows must sum to 0")
        if np.linalg.eigvalsh(arr).min() < -PSD_TOL:
            raise ValueError("covariance must be positive semidefinite")
        arr.setflags(write=False)
        self._sigma = arr

    @property
    def m(self) -> int:
        return self._sigma.shape[0]

    @property
    def sigma(self) -> np.ndarray:
        return self._sigma

    def component_sigmas(self) -> np.ndarray:
        """Componentwise standard deviations sqrt(sigma_rr)."""
        return np.sqrt(np.diag(self._sigma))

    def __repr__(self) -> str:
        return f"CovarianceMatrix(m={self.m})"


@dataclass(frozen=True)
class MultiplicityStructure:
    """Sorted-probability bookkeeping for the row limit functionals.

    tau is 1-based: tau[i-1] is the letter with the i-th largest
    stationary probability (ties broken by ascending letter index).
    For each rank r, d_r is the size of the tied block containing r and
    m_r counts the ranks with strictly larger probability.
    """

    tau: np.ndarray
    nu: np.ndarray
    m_r: np.ndarray
    d_r: np.ndarray
    tol: float


@dataclass(frozen=True)
class CyclicSpectrum:
    """Eigen-data of a circulant chain: gamma_j = lambda_j/(1-lambda_j),
    cosine weights beta, and the Toeplitz basis M^(1)..M^(m)."""

    gamma: np.ndarray  # gamma[j-2] = gamma_j for j = 2..m
    beta: np.ndarray   # beta[j] = cos(2 pi j / m) for j = 0..m
    M: np.ndarray      # (m, m, m); M[j-1] = M^(j)


@dataclass(frozen=True)
class CyclicIidResult:
    equivalent: bool
    scale: float | None
    max_spread: float


@dataclass(frozen=True)
class FactorCondition:
    feasible: bool
    interval: tuple[float, float] | None


def asymptotic_covariance(P: TransitionMatrix) -> CovarianceMatrix:
    """Covariance of the limiting Gaussian of centered counts.

    Assembled as Pi + Pi A + A^T Pi where A = S_inv D S from the
    normalized spectral decomposition.
    """
    spec = spectral_decomposition(P)
    pi = spec.S[0].real
    a = spec.S_inv @ spec.D @ spec.S
    pi_diag = np.diag(pi)
    sigma = pi_diag + pi_diag @ a + a.T @ pi_diag
    if np.max(np.abs(sigma.imag)) >= IMAG_RESIDUE_TOL:
        raise ValueError("non-real covariance")
    return CovarianceMatrix(sigma.real)


def iid_covariance(pi: PiLike) -> CovarianceMatrix:
    """Single-trial multinomial covariance diag(pi) - pi pi^T."""
    vec = _pi_vector(pi)
    return CovarianceMatrix(np.diag(vec) - np.outer(vec, vec))


def correlation_matrix(sig: CovarianceMatrix) -> np.ndarray:
    sds = sig.component_sigmas()
    if np.any(sds <= 0.0):
        raise ValueError("degenerate component")
    corr = sig.sigma / np.outer(sds, sds)
    np.fill_diagonal(corr, 1.0)
    return corr


def cyclic_spectrum(a: Sequence[float] | np.ndarray) -> CyclicSpectrum:
    """Gamma/beta/Toeplitz data of the circulant chain generated by a."""
    vec = np.asarray(a, dtype=float)
    m = len(vec)
    j = np.arange(m)
    omega = np.exp(2j * np.pi / m)
    lam = (vec[None, :] * omega ** (np.outer(j, j))).sum(axis=1)
    gamma = lam[1:] / (1.0 - lam[1:])
    beta = np.cos(2.0 * np.pi * np.arange(m + 1) / m)
    toeplitz = np.empty((m, m, m))
    toeplitz[0] = np.full((m, m), -1.0 / (m - 1))
    np.fill_diagonal(toeplitz[0], 1.0)
    dist = np.abs(np.arange(m)[:, None] - np.arange(m)[None, :])
    for jj in range(2, m + 1):
        toeplitz[jj - 1] = np.cos(2.0 * np.pi * (jj - 1) * dist / m)
    return CyclicSpectrum(gamma=gamma, beta=beta, M=toeplitz)


def cyclic_covariance(a: Sequence[float] | np.ndarray) -> CovarianceMatrix:
    """Covariance of a circulant chain via its eigenvalue weights.

    Splits by parity: the middle eigenvalue of an even-size circulant is
    real and enters with half the weight of the conjugate pairs.
    """
    chain = cyclic_chain(a)
    diag = validate_chain(chain)
    if not (diag.irreducible and diag.aperiodic):
        raise ValueError("not aperiodic-irreducible")
    spec = cyclic_spectrum(np.asarray(a, dtype=float))
    m = chain.m
    sigma = ((m - 1) / m ** 2) * spec.M[0]
    if m % 2 == 1:
        half = (m - 1) // 2
        for jj in range(2, half + 2):
            sigma = sigma + (4.0 / m ** 2) * spec.gamma[jj - 2].real * spec.M[jj - 1]
    else:
        half = m // 2
        for jj in range(2, half + 1):
            sigma = sigma + (4.0 / m ** 2) * spec.gamma[jj - 2].real * spec.M[jj - 1]
        sigma = sigma + (2.0 / m ** 2) * spec.gamma[half - 1].real * spec.M[half]
    return CovarianceMatrix(sigma)


def cyclic_iid_test(a: Sequence[float] | np.ndarray,
                    tol: float = 1e-9) -> CyclicIidResult:
    """Is the circulant chain's covariance a rescaled uniform-iid one?

    Equivalence holds iff all Re(gamma_j) coincide; the scale is then
    1 + 2*gamma.
    """
    spec = cyclic_spectrum(np.asarray(a, dtype=float))
    real_parts = spec.gamma.real
    center = float(real_parts.mean())
    spread = float(np.max(np.abs(real_parts - center)))
    if spread <= tol:
        return CyclicIidResult(equivalent=True, scale=1.0 + 2.0 * center,
                               max_spread=spread)
    return CyclicIidResult(equivalent=False, scale=None, max_spread=spread)


def interpolated_covariance(sigma0: CovarianceMatrix, pi: PiLike,
                            delta: float) -> CovarianceMatrix:
    """Covariance of the lazy blend (1-delta) I + delta P0.

    Equals (Sigma_0 + (1-delta) Sigma_pi)/delta where Sigma_pi is the iid
    covariance for the shared stationary distribution.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    sigma_pi = iid_covariance(pi)
    return CovarianceMatrix((sigma0.sigma + (1.0 - delta) * sigma_pi.sigma)
                            / delta)


def psd_factor(sig: CovarianceMatrix | np.ndarray,
               tol: float = 1e-10) -> np.ndarray:
    """Spectral square root C with C C^T = Sigma.

    Accepts a CovarianceMatrix or any symmetric PSD array.  Columns are
    ordered by descending eigenvalue; eigenvalues in [-tol, 0) are
    clamped to 0 (chain covariances are singular by construction).
    """
    mat = sig.sigma if isinstance(sig, CovarianceMatrix) else np.asarray(
        sig, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("covariance must be square")
    if np.max(np.abs(mat - mat.T)) > SYMMETRY_TOL:
        raise ValueError("covariance must be symmetric")
    w, v = np.linalg.eigh(mat)
    if w.min() < -tol:
        raise ValueError("not positive semidefinite")
    order = np.argsort(w)[::-1]
    w = np.clip(w[order], 0.0, None)
    return v[:, order] * np.sqrt(w)[None, :]


def multiplicity_structure(pi: PiLike,
                           tol: float = 1e-9) -> MultiplicityStructure:
    """Sort probabilities descending and group ties within tol.

    Ties are chained by adjacent gaps <= tol; letters inside a tied block
    keep their original ascending order.
    """
    vec = _pi_vector(pi)
    m = len(vec)
    order = np.lexsort((np.arange(m), -vec))
    groups: list[list[int]] = [[int(order[0])]]
    for idx in order[1:]:
        if vec[groups[-1][-1]] - vec[idx] <= tol:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    tau: list[int] = []
    m_r = np.empty(m, dtype=np.int64)
    d_r = np.empty(m, dtype=np.int64)
    for group in groups:
        group.sort()
        start = len(tau)
        for rank in range(start, start + len(group)):
            m_r[rank] = start
            d_r[rank] = len(group)
        tau.extend(group)
    tau_arr = np.array(tau, dtype=np.int64) + 1
    nu = np.cumsum(vec[tau_arr - 1])
    return MultiplicityStructure(tau=tau_arr, nu=nu, m_r=m_r, d_r=d_r,
                                 tol=tol)


def structured_factor_condition(variances: Sequence[float] | np.ndarray,
                                gamma: float, d1: int) -> FactorCondition:
    """Feasibility of the equal-row factor shape for a leading tied block.

    Decides whether a factor C with constant off-diagonal column entries
    on the first d1 rows can reproduce the given block variances, given
    the residual weight gamma carried by the remaining columns.  Feasible
    iff mean(var^2) - mean(var)^2 <= (mean(var) - gamma)^2/(d1 - 1); the
    admissible b^2 then fills the returned interval.
    """
    if d1 < 2:
        raise ValueError("block size must be at least 2")
    v = np.asarray(variances, dtype=float)
    if v.ndim != 1 or len(v) != d1 or np.any(v <= 0):
        raise ValueError("variances must be d1 positive reals")
    if gamma < 0:
        raise ValueError("residual weight must be nonnegative")
    mean_sq = float(np.mean(v))
    mean_quad = float(np.mean(v ** 2))
    gap = mean_sq - gamma
    excess = mean_quad - mean_sq ** 2
    if excess > gap ** 2 / (d1 - 1):
        return FactorCondition(feasible=False, interval=None)
    disc = np.sqrt(gap ** 2 - (d1 - 1) * excess)
    scale = d1 / (2.0 * (d1 - 1))
    return FactorCondition(feasible=True,
                           interval=(scale * (gap - disc),
                                     scale * (gap + disc)))


@dataclass(frozen=True)
class TwoLetterForms:
    mu: float
    sigma2: float
    lambda2: float
    sigma_tilde2: float


def two_letter_forms(a: float, b: float) -> TwoLetterForms:
    """Closed forms for the two-letter chain with off-diagonals a, b.

    mu and sigma2 are the mean and variance of the single-step count
    difference under stationarity; sigma_tilde2 is the variance constant
    of its functional CLT, sigma2 (1+lambda2)/(1-lambda2).
    """
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise ValueError("transition probabilities must lie in [0, 1]")
    s = a + b
    if s == 0.0 or s == 2.0:
        raise ValueError("degenerate two-letter chain")
    mu = (b - a) / s
    sigma2 = 4.0 * a * b / s ** 2
    lambda2 = 1.0 - s
    sigma_tilde2 = sigma2 * (1.0 + lambda2) / (1.0 - lambda2)
    return TwoLetterForms(mu=mu, sigma2=sigma2, lambda2=lambda2,
                          sigma_tilde2=sigma_tilde2)

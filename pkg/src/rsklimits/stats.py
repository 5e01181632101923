"""Empirical-distribution utilities: KS tests, covariance, summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KsReport:
    """KS statistic with its asymptotic p-value and the sample sizes.

    n2 is 0 for a one-sample test; the effective size behind the
    p-value is n1*n2/(n1+n2) for two samples and n1 otherwise.
    """

    statistic: float
    p_value: float
    n1: int
    n2: int


def kolmogorov_sf(lam: float) -> float:
    """Tail of the Kolmogorov distribution, P(K > lam).

    The alternating series converges fast for large arguments; small
    arguments use the theta-transformed series for the CDF instead.
    """
    if lam <= 0.0:
        return 1.0
    if lam < 1.18:
        t = math.pi * math.pi / (8.0 * lam * lam)
        total = sum(math.exp(-((2 * k - 1) ** 2) * t) for k in range(1, 20))
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / lam * total))
    total = 0.0
    for k in range(1, 101):
        term = math.exp(-2.0 * k * k * lam * lam)
        total += -term if k % 2 == 0 else term
        if term < 1e-16:
            break
    return min(1.0, max(0.0, 2.0 * total))


def kolmogorov_critical(alpha: float) -> float:
    """lam with P(K > lam) = alpha, by bisection."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    lo, hi = 1e-3, 10.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if kolmogorov_sf(mid) > alpha:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def ks_critical_value(alpha: float, n1: int, n2: int = 0) -> float:
    """Critical statistic at level alpha for the given sample sizes."""
    if n1 < 1 or n2 < 0:
        raise ValueError("sample sizes out of range")
    n_eff = n1 if n2 == 0 else n1 * n2 / (n1 + n2)
    return kolmogorov_critical(alpha) / math.sqrt(n_eff)


def ks_two_sample(xs, ys) -> KsReport:
    """Sup distance between two empirical CDFs."""
    a = np.sort(np.asarray(xs, dtype=float))
    b = np.sort(np.asarray(ys, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("samples must be nonempty")
    grid = np.concatenate([a, b])
    grid.sort(kind="mergesort")
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    stat = float(np.max(np.abs(fa - fb)))
    n_eff = len(a) * len(b) / (len(a) + len(b))
    return KsReport(statistic=stat,
                    p_value=kolmogorov_sf(math.sqrt(n_eff) * stat),
                    n1=len(a), n2=len(b))


def ks_one_sample(xs, cdf) -> KsReport:
    """Sup distance between the empirical CDF and a monotone reference.

    The reference is evaluated at the sample points only; at a shared
    atom the full jump against the empirical left limit is counted.
    """
    a = np.sort(np.asarray(xs, dtype=float))
    n = len(a)
    if n == 0:
        raise ValueError("samples must be nonempty")
    ref = np.asarray(cdf(a), dtype=float)
    if ref.shape != a.shape:
        raise ValueError("cdf handle must return one value per sample point")
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    stat = float(max(np.max(hi - ref), np.max(ref - lo)))
    stat = min(max(stat, 0.0), 1.0)
    return KsReport(statistic=stat,
                    p_value=kolmogorov_sf(math.sqrt(n) * stat),
                    n1=n, n2=0)


def empirical_cov(samples) -> np.ndarray:
    """Unbiased sample covariance of a reps x m matrix."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise ValueError("need at least two replicas")
    return np.atleast_2d(np.cov(arr, rowvar=False, ddof=1))


def summarize(xs) -> dict[str, float]:
    """Mean, unbiased variance, and the percentiles q01 through q99.

    Percentiles use linear interpolation between order statistics, so
    the summary is deterministic for a given sample.
    """
    arr = np.asarray(xs, dtype=float)
    if arr.ndim != 1 or len(arr) < 2:
        raise ValueError("need at least two replicas")
    out = {"mean": float(arr.mean()), "var": float(arr.var(ddof=1))}
    levels = np.arange(1, 100) / 100.0
    values = np.quantile(arr, levels, method="linear")
    for k, v in zip(range(1, 100), values):
        out[f"q{k:02d}"] = float(v)
    return out

"""Finite-alphabet Markov chains.

Transition-matrix validation and classification, stationary distributions,
the normalized spectral decomposition used by the covariance formulas, and
random-word sampling over the ordered alphabet {1, ..., m}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

ROW_SUM_TOL = 1e-12
CYCLIC_TOL = 1e-12
STATIONARY_RESIDUAL_TOL = 1e-10


class TransitionMatrix:
    """Row-stochastic m x m matrix over an ordered m-letter alphabet.

    ``p[r][s]`` is the probability of moving from letter r+1 to letter s+1.
    Rows must sum to 1 within 1e-12 and entries must lie in [0, 1].
    """

    def __init__(self, p: Sequence[Sequence[float]] | np.ndarray):
        arr = np.array(p, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("transition matrix must be square")
        if arr.shape[0] < 2:
            raise ValueError("alphabet size must be at least 2")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("transition probabilities must lie in [0, 1]")
        row_sums = arr.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOL):
            raise ValueError("every row must sum to 1 within 1e-12")
        arr.setflags(write=False)
        self._p = arr

    @property
    def m(self) -> int:
        return self._p.shape[0]

    @property
    def p(self) -> np.ndarray:
        """The matrix itself (read-only view)."""
        return self._p

    def __repr__(self) -> str:
        return f"TransitionMatrix(m={self.m})"


@dataclass(frozen=True)
class ChainDiagnostics:
    irreducible: bool
    aperiodic: bool
    doubly_stochastic: bool
    cyclic: bool
    period: int


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray


@dataclass(frozen=True)
class SpectralData:
    """Diagonalization P = S_inv @ diag(eigenvalues) @ S.

    Rows of S are left eigenvectors; the first row is the stationary
    distribution, which forces the first column of S_inv to be all ones.
    D is the diagonal matrix diag(-1/2, l2/(1-l2), ..., lm/(1-lm)) that
    feeds the asymptotic covariance assembly.
    """

    eigenvalues: np.ndarray
    S: np.ndarray
    S_inv: np.ndarray
    D: np.ndarray


class WordSample:
    """A sampled word X_1..X_n with its running letter counts.

    ``counts[k][r]`` is the number of occurrences of letter r+1 among the
    first k letters.  X_0 (the chain's start letter) is drawn but excluded
    from the counts.
    """

    def __init__(self, letters: np.ndarray, counts: np.ndarray,
                 pi: np.ndarray, start_letter: int):
        self.letters = letters
        self.counts = counts
        self.pi = pi
        self.start_letter = start_letter

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def m(self) -> int:
        return self.counts.shape[1]

    def centered_counts(self) -> np.ndarray:
        """(n+1) x m array of counts[k][r] - pi_r * k; rows sum to 0."""
        k = np.arange(self.counts.shape[0], dtype=float)
        return self.counts - np.outer(k, self.pi)

    def count_differences(self) -> np.ndarray:
        """(n+1) x (m-1) array of counts[k][r] - counts[k][r+1]."""
        return self.counts[:, :-1] - self.counts[:, 1:]


def _reachable(adj: np.ndarray, start: int) -> np.ndarray:
    m = adj.shape[0]
    seen = np.zeros(m, dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.nonzero(adj[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    nxt.append(int(v))
        frontier = nxt
    return seen


def _period_from_state_zero(adj: np.ndarray) -> int:
    # gcd of cycle lengths in the part of the graph reachable from state 1,
    # via BFS levels: every edge u->v contributes depth[u] + 1 - depth[v].
    m = adj.shape[0]
    depth = np.full(m, -1, dtype=int)
    depth[0] = 0
    frontier = [0]
    order = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.nonzero(adj[u])[0]:
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    nxt.append(int(v))
                    order.append(int(v))
        frontier = nxt
    g = 0
    for u in order:
        for v in np.nonzero(adj[u])[0]:
            g = math.gcd(g, depth[u] + 1 - depth[v])
    return abs(g) if g != 0 else 1


def validate_chain(P: TransitionMatrix) -> ChainDiagnostics:
    """Classify a chain: irreducibility, period, double stochasticity, cyclicity."""
    p = P.p
    m = P.m
    adj = p > 0.0
    forward = _reachable(adj, 0)
    backward = _reachable(adj.T, 0)
    irreducible = bool(forward.all() and backward.all())
    period = _period_from_state_zero(adj)
    doubly = bool(np.all(np.abs(p.sum(axis=0) - 1.0) <= ROW_SUM_TOL))
    shifted = np.roll(np.roll(p, -1, axis=0), -1, axis=1)
    cyclic = bool(np.all(np.abs(p - shifted) <= CYCLIC_TOL))
    return ChainDiagnostics(
        irreducible=irreducible,
        aperiodic=(period == 1),
        doubly_stochastic=doubly,
        cyclic=cyclic,
        period=period,
    )


def stationary_distribution(P: TransitionMatrix) -> StationaryDistribution:
    """Solve pi P = pi, sum(pi) = 1 for an irreducible chain."""
    if not validate_chain(P).irreducible:
        raise ValueError("no unique stationary distribution")
    m = P.m
    a = np.vstack([P.p.T - np.eye(m), np.ones((1, m))])
    b = np.zeros(m + 1)
    b[m] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    residual = np.max(np.abs(pi @ P.p - pi))
    if residual > STATIONARY_RESIDUAL_TOL:
        raise ValueError("no unique stationary distribution")
    pi.setflags(write=False)
    return StationaryDistribution(pi=pi)


def spectral_decomposition(P: TransitionMatrix) -> SpectralData:
    """Eigen-structure of P normalized so the first row of S is pi.

    Eigenvalues are ordered with 1 first, then by descending modulus,
    breaking ties by descending real part, then descending imaginary part.
    """
    m = P.m
    eigvals, left_cols = np.linalg.eig(P.p.T)
    top = int(np.argmin(np.abs(eigvals - 1.0)))
    rest = [i for i in range(m) if i != top]
    rest.sort(key=lambda i: (-np.abs(eigvals[i]),
                             -eigvals[i].real, -eigvals[i].imag))
    order = [top] + rest
    lam = eigvals[order]
    if np.abs(lam[1]) >= 1.0 - 1e-12:
        raise ValueError("not aperiodic-irreducible")
    s = left_cols[:, order].T.astype(complex)
    # scale the top eigenvector into a probability vector
    s[0] = s[0] / s[0].sum()
    if np.linalg.cond(s) > 1e12:
        raise ValueError("near-defective transition matrix")
    lam = lam.astype(complex)
    lam[0] = 1.0
    s_inv = np.linalg.inv(s)
    d = np.diag(np.concatenate(([-0.5], lam[1:] / (1.0 - lam[1:]))))
    return SpectralData(eigenvalues=lam, S=s, S_inv=s_inv, D=d)


def cyclic_chain(a: Sequence[float] | np.ndarray) -> TransitionMatrix:
    """Circulant chain generated by a probability vector a.

    Row i+1 is row i shifted right by one position, so the first row reads
    (a_1, a_m, ..., a_3, a_2) and the first column is a itself.
    """
    vec = np.asarray(a, dtype=float)
    if vec.ndim != 1 or len(vec) < 2:
        raise ValueError("generator must be a vector of length >= 2")
    if np.any(vec < 0.0) or abs(vec.sum() - 1.0) > ROW_SUM_TOL:
        raise ValueError("generator must be a probability vector")
    m = len(vec)
    idx = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
    return TransitionMatrix(vec[idx])


def cyclic_generator(P: TransitionMatrix) -> np.ndarray:
    """First column of a circulant matrix, i.e. the vector that generates it."""
    return np.array(P.p[:, 0])


StartSpec = Union[str, int]


def _start_letter(P: TransitionMatrix, start: StartSpec,
                  rng: np.random.Generator) -> tuple[int, np.ndarray]:
    pi = stationary_distribution(P).pi
    if isinstance(start, str):
        if start != "stationary":
            raise ValueError("start must be 'stationary' or a letter index")
        cum = np.cumsum(pi)
        x0 = int(np.searchsorted(cum, rng.random(), side="right"))
        return min(x0, P.m - 1), pi
    k = int(start)
    if not 1 <= k <= P.m:
        raise ValueError("start letter out of range")
    return k - 1, pi


def sample_word(P: TransitionMatrix, start: StartSpec, n: int,
                seed: int) -> WordSample:
    """Sample X_1..X_n from the chain, deterministically in the seed.

    ``start`` is either the string "stationary" (X_0 drawn from pi) or a
    1-based letter index k (X_0 = letter k).  Counts cover X_1..X_n only.
    """
    if n < 1:
        raise ValueError("word length must be at least 1")
    rng = np.random.default_rng(seed)
    x0, pi = _start_letter(P, start, rng)
    cum = np.cumsum(P.p, axis=1)
    u = rng.random(n)
    letters = np.empty(n, dtype=np.int64)
    x = x0
    for i in range(n):
        x = int(np.searchsorted(cum[x], u[i], side="right"))
        if x >= P.m:
            x = P.m - 1
        letters[i] = x
    one_hot = np.zeros((n, P.m), dtype=np.int64)
    one_hot[np.arange(n), letters] = 1
    counts = np.zeros((n + 1, P.m), dtype=np.int64)
    np.cumsum(one_hot, axis=0, out=counts[1:])
    return WordSample(letters=letters + 1, counts=counts, pi=pi,
                      start_letter=x0 + 1)


def word_from_letters(letters: Sequence[int] | np.ndarray, m: int,
                      pi: np.ndarray | None = None) -> WordSample:
    """Wrap explicit 1-based letters as a WordSample.

    pi defaults to uniform; it only matters for centering, not for any of
    the combinatorial operations.
    """
    arr = np.asarray(letters, dtype=np.int64)
    if arr.ndim != 1 or len(arr) < 1:
        raise ValueError("letters must be a nonempty vector")
    if np.any(arr < 1) or np.any(arr > m):
        raise ValueError("letters must lie in 1..m")
    n = len(arr)
    one_hot = np.zeros((n, m), dtype=np.int64)
    one_hot[np.arange(n), arr - 1] = 1
    counts = np.zeros((n + 1, m), dtype=np.int64)
    np.cumsum(one_hot, axis=0, out=counts[1:])
    if pi is None:
        pi = np.full(m, 1.0 / m)
    return WordSample(letters=arr, counts=counts, pi=np.asarray(pi, float),
                      start_letter=int(arr[0]))


def letter_stream(P: TransitionMatrix, start: StartSpec, n: int,
                  seeds: Sequence[int],
                  time_chunk: int = 2048) -> Iterator[np.ndarray]:
    """Stream letters for many replicas at once, chunked along time.

    Yields (len(seeds), chunk) arrays of 0-based letters.  Replica i consumes
    exactly the uniform stream of ``default_rng(seeds[i])`` in the same order
    as :func:`sample_word`, so batching never changes the sampled words.
    """
    if n < 1:
        raise ValueError("word length must be at least 1")
    gens = [np.random.default_rng(s) for s in seeds]
    b = len(gens)
    m = P.m
    pi = stationary_distribution(P).pi
    if isinstance(start, str):
        if start != "stationary":
            raise ValueError("start must be 'stationary' or a letter index")
        cum_pi = np.cumsum(pi)
        u0 = np.array([g.random() for g in gens])
        x = np.minimum(np.searchsorted(cum_pi, u0, side="right"), m - 1)
        x = x.astype(np.int64)
    else:
        k = int(start)
        if not 1 <= k <= m:
            raise ValueError("start letter out of range")
        x = np.full(b, k - 1, dtype=np.int64)
    cum = np.cumsum(P.p, axis=1)
    done = 0
    u = np.empty((b, time_chunk))
    while done < n:
        t = min(time_chunk, n - done)
        for i, g in enumerate(gens):
            u[i, :t] = g.random(t)
        block = np.empty((b, t), dtype=np.int64)
        for j in range(t):
            rows = cum[x]
            x = np.minimum((rows <= u[:, j][:, None]).sum(axis=1), m - 1)
            block[:, j] = x
        yield block
        done += t


def read_transition_matrix(path: str) -> TransitionMatrix:
    """Read a matrix file: first line m, then m rows of m numbers."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ValueError("empty matrix file")
    try:
        m = int(tokens[0])
    except ValueError as exc:
        raise ValueError("first line must be the alphabet size") from exc
    values = tokens[1:]
    if len(values) != m * m:
        raise ValueError(f"expected {m * m} entries after the size line, "
                         f"found {len(values)}")
    try:
        arr = np.array([float(v) for v in values], dtype=float)
    except ValueError as exc:
        raise ValueError("matrix entries must be decimal numbers") from exc
    return TransitionMatrix(arr.reshape(m, m))

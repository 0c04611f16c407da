"""Sensing matrices, sparse signals, coherence and isometry constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, islice
from typing import Iterable, Sequence

import numpy as np

from .densela import as_matrix, as_vector, jacobi_eig_batched, max_norm
from .errors import CapExceededError, DimensionError, InvalidMatrixError, NormalizationError
from .rng import Xorshift64Star
from .tolerances import MIN_SIGNAL_MAGNITUDE, RIC_MAX_SUPPORTS, TIE_RTOL, UNIT_NORM_ATOL, ZERO_COLUMN_ATOL

_RIC_CHUNK = 16_384


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SensingMatrix:
    """An m x n measurement operator whose columns have unit l2 norm.

    Construction rejects non-unit columns; use :func:`normalize_columns` to
    scale a raw matrix first.
    """

    phi: np.ndarray

    def __post_init__(self):
        phi = as_matrix(self.phi, "phi")
        norms = np.sqrt(np.sum(phi * phi, axis=0))
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_ATOL)
        if bad.size:
            j = int(bad[0])
            raise NormalizationError(f"column {j} has norm {norms[j]:.17g}, expected 1")
        object.__setattr__(self, "phi", _frozen(phi))

    @property
    def m(self) -> int:
        return self.phi.shape[0]

    @property
    def n(self) -> int:
        return self.phi.shape[1]

    def columns(self, indices: Sequence[int]) -> np.ndarray:
        return self.phi[:, self._check_indices(indices)]

    def measure(self, x: "SparseSignal | np.ndarray") -> np.ndarray:
        """y = Phi x."""
        if isinstance(x, SparseSignal):
            if x.n != self.n:
                raise DimensionError(f"signal length {x.n} does not match n = {self.n}")
            return self.phi[:, list(x.support)] @ x.values
        x = as_vector(x, "x")
        if x.shape[0] != self.n:
            raise DimensionError(f"signal length {x.shape[0]} does not match n = {self.n}")
        return self.phi @ x

    def _check_indices(self, indices: Iterable[int]) -> list[int]:
        idx = [int(i) for i in indices]
        if not idx:
            raise InvalidMatrixError("index set is empty")
        if len(set(idx)) != len(idx):
            raise InvalidMatrixError(f"index set {idx} has repeated entries")
        for i in idx:
            if not 0 <= i < self.n:
                raise InvalidMatrixError(f"column index {i} out of range for n = {self.n}")
        return idx


@dataclass(frozen=True)
class SparseSignal:
    """A K-sparse vector stored as (support, values); every stored value is nonzero."""

    n: int
    support: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        support = tuple(int(i) for i in self.support)
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if self.n < 1:
            raise InvalidMatrixError("ambient dimension must be positive")
        if len(support) != values.shape[0]:
            raise InvalidMatrixError(f"{len(support)} support indices but {values.shape[0]} values")
        if not support:
            raise InvalidMatrixError("a sparse signal needs at least one nonzero entry")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise InvalidMatrixError(f"support {support} is not strictly increasing")
        if support[0] < 0 or support[-1] >= self.n:
            raise InvalidMatrixError(f"support {support} out of range for n = {self.n}")
        if not np.all(np.isfinite(values)) or np.any(values == 0.0):
            raise InvalidMatrixError("support values must be finite and nonzero")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", _frozen(values))

    @property
    def K(self) -> int:
        return len(self.support)

    @classmethod
    def from_dense(cls, x) -> "SparseSignal":
        x = as_vector(x, "x")
        support = np.flatnonzero(x)
        return cls(x.shape[0], tuple(support.tolist()), x[support])

    def dense(self) -> np.ndarray:
        out = np.zeros(self.n)
        out[list(self.support)] = self.values
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class CoherenceReport:
    mu: float
    argpair: tuple[int, int]
    gram_offdiag_max: float = field(repr=False)


def normalize_columns(raw) -> SensingMatrix:
    raw = as_matrix(raw, "raw")
    norms = np.sqrt(np.sum(raw * raw, axis=0))
    zero = np.flatnonzero(norms <= ZERO_COLUMN_ATOL)
    if zero.size:
        raise NormalizationError(f"column {int(zero[0])} is zero and cannot be normalized")
    return SensingMatrix(raw / norms)


def coherence(phi: SensingMatrix) -> CoherenceReport:
    """Largest absolute inner product between distinct columns.

    ``mu`` and ``argpair`` come from an explicit pass over column pairs; pairs
    within ``TIE_RTOL`` of the maximum count as tied and the lexicographically
    smallest one is reported.  ``gram_offdiag_max`` is recomputed
    independently from the full Gram matrix as a cross-check.
    """
    a = phi.phi
    n = a.shape[1]
    if n < 2:
        raise InvalidMatrixError("coherence needs at least two columns")
    rows = [np.abs(a[:, i + 1:].T @ a[:, i]) for i in range(n - 1)]
    mu = max(float(r.max()) for r in rows)
    floor = mu - TIE_RTOL * mu
    pair = next((i, i + 1 + int(np.flatnonzero(r >= floor)[0])) for i, r in enumerate(rows) if r.max() >= floor)
    g = a.T @ a
    np.fill_diagonal(g, 0.0)
    return CoherenceReport(mu=mu, argpair=pair, gram_offdiag_max=max_norm(g))


def gram(phi: SensingMatrix, indices: Sequence[int]) -> np.ndarray:
    """Phi_I' Phi_I for the columns listed in ``indices`` (in that order)."""
    sub = phi.columns(indices)
    return sub.T @ sub


def ric_bruteforce(phi: SensingMatrix, K: int) -> float:
    """Restricted isometry constant delta_K by enumerating supports.

    Only supports of size exactly K are visited: by eigenvalue interlacing a
    principal submatrix of a K x K Gram block has its spectrum inside the
    block's, so smaller supports never raise the maximum.
    """
    n = phi.n
    if not 1 <= K <= n:
        raise InvalidMatrixError(f"sparsity K = {K} must lie in [1, {n}]")
    count = math.comb(n, K)
    if count > RIC_MAX_SUPPORTS:
        raise CapExceededError(
            f"C({n}, {K}) = {count} supports exceeds the cap of {RIC_MAX_SUPPORTS}; "
            "use a smaller n or K"
        )
    g = phi.phi.T @ phi.phi
    delta = 0.0
    supports = combinations(range(n), K)
    while True:
        chunk = np.fromiter(
            (i for s in islice(supports, _RIC_CHUNK) for i in s), dtype=np.intp
        ).reshape(-1, K)
        if chunk.shape[0] == 0:
            break
        blocks = g[chunk[:, :, None], chunk[:, None, :]]
        w = jacobi_eig_batched(blocks)
        delta = max(delta, float(w[:, 0].max()) - 1.0, 1.0 - float(w[:, -1].min()))
    return delta


def welch_bound(m: int, n: int) -> float:
    """Lower bound on the coherence of any m x n frame with unit-norm columns."""
    if m < 1 or n < 2:
        raise InvalidMatrixError("welch_bound needs m >= 1 and n >= 2")
    if n <= m:
        raise InvalidMatrixError(f"welch_bound needs n > m, got m = {m}, n = {n}")
    return math.sqrt((n - m) / (m * (n - 1)))


def _as_rng(seed_or_rng: int | Xorshift64Star) -> Xorshift64Star:
    if isinstance(seed_or_rng, Xorshift64Star):
        return seed_or_rng
    return Xorshift64Star(int(seed_or_rng))


def gaussian_ensemble(m: int, n: int, seed: int | Xorshift64Star) -> SensingMatrix:
    """i.i.d. standard normal entries (filled row by row), then column-normalized.

    ``seed`` may be an integer or a generator whose stream continues.
    """
    if m < 1 or n < 1:
        raise InvalidMatrixError("dimensions must be positive")
    rng = _as_rng(seed)
    return normalize_columns(rng.normals(m * n).reshape(m, n))


def random_sparse_signal(n: int, K: int, seed: int | Xorshift64Star) -> SparseSignal:
    """Exactly K-sparse signal with a uniform random support.

    The support is drawn without replacement and sorted; values are standard
    normals assigned in support order, redrawing any with magnitude below
    ``MIN_SIGNAL_MAGNITUDE``.
    """
    if not 1 <= K <= n:
        raise InvalidMatrixError(f"sparsity K = {K} must lie in [1, {n}]")
    rng = _as_rng(seed)
    support = sorted(rng.sample_without_replacement(n, K))
    values = []
    while len(values) < K:
        v = rng.normal()
        if abs(v) >= MIN_SIGNAL_MAGNITUDE:
            values.append(v)
    return SparseSignal(n, tuple(support), np.array(values))

"""Small dense linear-algebra kernel.

Matrices and vectors are plain float64 numpy arrays (C order, i.e. row-major).
The routines that matter for the analysis are written out here: Householder
least squares and cyclic Jacobi for symmetric eigenproblems.  Everything
validates its inputs at the boundary and never mutates them.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import AsymmetryError, DimensionError, InvalidMatrixError, RankDeficiencyError
from .tolerances import JACOBI_MAX_SWEEPS, JACOBI_OFFDIAG_RTOL, PIVOT_RTOL, SYMMETRY_ATOL


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and copy ``a`` into a 2-D float64 array."""
    arr = np.array(a, dtype=np.float64, order="C", copy=True)
    if arr.ndim != 2:
        raise InvalidMatrixError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidMatrixError(f"{name} must be nonempty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrixError(f"{name} has non-finite entries")
    return arr


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.array(v, dtype=np.float64, copy=True)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise InvalidMatrixError(f"{name} must be a nonempty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrixError(f"{name} has non-finite entries")
    return arr


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def householder_qr(a) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR factorization ``A = Q R`` of an m x n matrix with m >= n.

    Reflectors use the sign choice that avoids cancellation; no pivoting.
    """
    r = as_matrix(a)
    m, n = r.shape
    if n > m:
        raise DimensionError(f"householder_qr needs rows >= cols, got {r.shape}")
    reflectors = _triangularize(r, None)
    q = np.eye(m, n)
    for j in range(n - 1, -1, -1):
        v = reflectors[j]
        if v is not None:
            q[j:, :] -= 2.0 * np.outer(v, v @ q[j:, :])
    return q, np.triu(r[:n, :])


def _triangularize(r: np.ndarray, rhs: np.ndarray | None) -> list[np.ndarray | None]:
    """Overwrite ``r`` with R (and ``rhs`` with Q'rhs); return unit reflectors."""
    m, n = r.shape
    reflectors: list[np.ndarray | None] = []
    for j in range(min(n, m)):
        x = r[j:, j]
        normx = math.sqrt(float(x @ x))
        if normx == 0.0:
            reflectors.append(None)
            continue
        v = x.copy()
        v[0] += normx if x[0] >= 0.0 else -normx
        v /= math.sqrt(float(v @ v))
        r[j:, j:] -= 2.0 * np.outer(v, v @ r[j:, j:])
        r[j + 1:, j] = 0.0
        if rhs is not None:
            rhs[j:] -= 2.0 * v * (v @ rhs[j:])
        reflectors.append(v)
    return reflectors


def least_squares(a, b) -> np.ndarray:
    """Minimize ``||A x - b||_2`` for full-column-rank A via Householder QR.

    Raises RankDeficiencyError naming the first column whose pivot falls below
    ``PIVOT_RTOL`` times the largest pivot.
    """
    r = as_matrix(a, "A")
    rhs = as_vector(b, "b")
    m, n = r.shape
    if rhs.shape[0] != m:
        raise DimensionError(f"A has {m} rows but b has length {rhs.shape[0]}")
    if n > m:
        raise RankDeficiencyError(f"A has more columns ({n}) than rows ({m})", column=m)
    _triangularize(r, rhs)
    pivots = np.abs(np.diag(r))
    largest = float(pivots.max())
    for j in range(n):
        if largest == 0.0 or pivots[j] < PIVOT_RTOL * largest:
            raise RankDeficiencyError(
                f"column {j} is numerically dependent on the preceding columns "
                f"(pivot {pivots[j]:.3e}, largest {largest:.3e})",
                column=j,
            )
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (rhs[i] - r[i, i + 1:n] @ x[i + 1:]) / r[i, i]
    return x


def sym_eig(s) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``S = U diag(w) U'`` of a symmetric matrix.

    Eigenvalues come back sorted in descending order with the columns of ``U``
    permuted to match.
    """
    s = as_matrix(s, "S")
    if s.shape[0] != s.shape[1]:
        raise DimensionError(f"sym_eig needs a square matrix, got {s.shape}")
    asym = float(np.max(np.abs(s - s.T)))
    if asym > SYMMETRY_ATOL:
        raise AsymmetryError(f"matrix is not symmetric (max |S - S'| = {asym:.3e})")
    w, u = jacobi_eig_batched(s[np.newaxis], vectors=True)
    return w[0], u[0]


def jacobi_eig_batched(stack: np.ndarray, vectors: bool = False):
    """Cyclic Jacobi on a stack of symmetric matrices, shape (B, n, n).

    Each sweep visits every (p, q) pair once, rotating all B matrices at the
    same time.  Sweeps continue until every matrix has off-diagonal Frobenius
    mass at most ``JACOBI_OFFDIAG_RTOL * ||S||_F`` or the sweep cap is hit.
    Returns eigenvalues (B, n) sorted descending, plus eigenvectors (B, n, n)
    if requested.  The input is symmetrized but otherwise trusted.
    """
    a = np.array(stack, dtype=np.float64, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionError(f"expected a (B, n, n) stack, got {a.shape}")
    a = 0.5 * (a + np.swapaxes(a, 1, 2))
    nb, n, _ = a.shape
    v = np.broadcast_to(np.eye(n), (nb, n, n)).copy() if vectors else None
    target = JACOBI_OFFDIAG_RTOL * np.sqrt(np.einsum("bij,bij->b", a, a))
    offmask = ~np.eye(n, dtype=bool)

    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(a[:, offmask] ** 2, axis=1)) if n > 1 else np.zeros(nb)
        if np.all(off <= target):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                active = apq != 0.0
                if not active.any():
                    continue
                safe = np.where(active, apq, 1.0)
                # theta may overflow for negligible apq; t -> 0 is then the right limit
                with np.errstate(over="ignore"):
                    theta = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
                    t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = (t * c)[:, None]
                c = c[:, None]
                colp = a[:, :, p].copy()
                colq = a[:, :, q]
                a[:, :, p] = c * colp - s * colq
                a[:, :, q] = s * colp + c * colq
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :]
                a[:, p, :] = c * rowp - s * rowq
                a[:, q, :] = s * rowp + c * rowq
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                if v is not None:
                    vp = v[:, :, p].copy()
                    vq = v[:, :, q]
                    v[:, :, p] = c * vp - s * vq
                    v[:, :, q] = s * vp + c * vq

    w = np.diagonal(a, axis1=1, axis2=2).copy()
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    if v is None:
        return w
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v


def spectral_norm(a) -> float:
    """Largest singular value, as the root of the top eigenvalue of A'A."""
    a = as_matrix(a)
    top = float(jacobi_eig_batched((a.T @ a)[np.newaxis])[0, 0])
    return math.sqrt(max(top, 0.0))


def max_norm(a) -> float:
    return float(np.max(np.abs(as_matrix(a))))

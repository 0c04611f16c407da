"""Recovery conditions, their numerical checks, and the boundary counterexample.

The incoherence condition for OMP is ``mu < 1/(2K-1)``.  This module
evaluates it (and two isometry-constant conditions) for a concrete matrix,
checks the supporting inequalities against brute-force oracles, and builds a
matrix sitting exactly on the boundary where two different K-sparse signals
produce the same measurements.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .densela import as_vector, max_norm, spectral_norm, sym_eig
from .errors import CapExceededError, ConstructionError, InvalidMatrixError
from .matrixio import write_matrix
from .omp import RecoveryResult, omp_recover, recovery_matches
from .sensing import SensingMatrix, SparseSignal, coherence, gram, ric_bruteforce
from .tolerances import (
    COUNTEREXAMPLE_ATOL,
    COUNTEREXAMPLE_MAX_K,
    INEQUALITY_SLACK,
    THRESHOLD_MARGIN,
    ZERO_EIGENVALUE_RTOL,
)


def mu_threshold(K: int) -> float:
    if K < 1:
        raise InvalidMatrixError(f"sparsity K = {K} must be at least 1")
    return 1.0 / (2 * K - 1)


def incoherence_condition(mu: float, K: int) -> bool:
    """True iff mu < 1/(2K-1), with values within THRESHOLD_MARGIN of the
    threshold counted as on the boundary (and therefore failing)."""
    return mu < mu_threshold(K) - THRESHOLD_MARGIN


@dataclass(frozen=True)
class GuaranteeReport:
    K: int
    mu: float
    mu_threshold: float
    theorem1_holds: bool
    delta_bruteforce: float | None = None  # delta_K
    delta_Kplus1: float | None = None
    rip_davenport_holds: bool | None = None  # delta_{K+1} < 1/(3 sqrt K)
    rip_wangshim_holds: bool | None = None   # delta_{K+1} < 1/(sqrt K + 1)
    lemma3_slack: float | None = None        # (K-1) mu - delta_K
    ric_note: str | None = None


def evaluate_guarantees(phi: SensingMatrix, K: int, with_ric: bool = False) -> GuaranteeReport:
    """Coherence and isometry-constant recovery conditions for sparsity K.

    Isometry constants are brute-forced only with ``with_ric``; when the
    enumeration cap is exceeded the delta fields stay None and ``ric_note``
    says why.
    """
    mu = coherence(phi).mu
    report = dict(K=K, mu=mu, mu_threshold=mu_threshold(K), theorem1_holds=incoherence_condition(mu, K))
    if with_ric:
        try:
            delta_k = ric_bruteforce(phi, K)
            report.update(delta_bruteforce=delta_k, lemma3_slack=(K - 1) * mu - delta_k)
        except CapExceededError as exc:
            report["ric_note"] = str(exc)
        if K + 1 <= phi.n:
            try:
                d1 = ric_bruteforce(phi, K + 1)
                report.update(
                    delta_Kplus1=d1,
                    rip_davenport_holds=d1 < 1.0 / (3.0 * math.sqrt(K)),
                    rip_wangshim_holds=d1 < 1.0 / (math.sqrt(K) + 1.0),
                )
            except CapExceededError as exc:
                report["ric_note"] = str(exc)
        else:
            report["ric_note"] = f"delta_{K + 1} undefined for n = {phi.n}"
    return GuaranteeReport(**report)


def check_lemma2(phi: SensingMatrix, indices, u, delta: float) -> tuple[bool, bool]:
    """Two-sided bound (1-delta)||u|| <= ||Phi_I' Phi_I u|| <= (1+delta)||u||.

    ``delta`` should be the isometry constant of order |I|; it must be < 1.
    """
    if delta >= 1.0:
        raise InvalidMatrixError(f"bound needs delta < 1, got {delta}")
    g = gram(phi, indices)
    u = as_vector(u, "u")
    if u.shape[0] != g.shape[0]:
        raise InvalidMatrixError(f"u has length {u.shape[0]}, support has size {g.shape[0]}")
    unorm = float(np.linalg.norm(u))
    gu = float(np.linalg.norm(g @ u))
    lower_ok = (1.0 - delta) * unorm - INEQUALITY_SLACK <= gu
    upper_ok = gu <= (1.0 + delta) * unorm + INEQUALITY_SLACK
    return lower_ok, upper_ok


@dataclass(frozen=True)
class GramDecomposition:
    A: np.ndarray
    a_maxnorm: float
    bound: float       # 1 + (K-1) mu
    gram_norm: float   # ||Phi_T' Phi_T||_2
    mu: float

    @property
    def holds(self) -> bool:
        return self.gram_norm <= self.bound + INEQUALITY_SLACK and self.a_maxnorm <= self.mu + 1e-10


def check_lemma3_decomposition(phi: SensingMatrix, support, mu: float | None = None) -> GramDecomposition:
    """Split Phi_T' Phi_T = (1-mu) I + A and bound its spectral norm."""
    g = gram(phi, support)
    if mu is None:
        mu = coherence(phi).mu
    K = g.shape[0]
    a = g - (1.0 - mu) * np.eye(K)
    return GramDecomposition(
        A=a,
        a_maxnorm=max_norm(a),
        bound=1.0 + (K - 1) * mu,
        gram_norm=spectral_norm(g),
        mu=mu,
    )


@dataclass(frozen=True)
class CounterexampleBundle:
    K: int
    phi: SensingMatrix
    z: np.ndarray
    x1: SparseSignal
    x2: SparseSignal
    eigenvalues: np.ndarray
    rank: int
    mu: float
    gram_error: float
    null_residual: float
    ambiguity_gap: float

    def sidecar(self) -> dict:
        return {
            "K": self.K,
            "mu": self.mu,
            "null_residual": self.null_residual,
            "ambiguity_gap": self.ambiguity_gap,
            "x1": self.x1.dense().tolist(),
            "x2": self.x2.dense().tolist(),
        }

    def save(self, out_dir) -> tuple[Path, Path]:
        """Write ``counterexample_K{K}.txt`` (matrix) and ``.json`` (sidecar)."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        mpath = out / f"counterexample_K{self.K}.txt"
        jpath = out / f"counterexample_K{self.K}.json"
        write_matrix(mpath, self.phi.phi)
        jpath.write_text(json.dumps(self.sidecar(), indent=2) + "\n", encoding="utf-8")
        return mpath, jpath


def boundary_gram(K: int) -> np.ndarray:
    """2K x 2K matrix with unit diagonal and every off-diagonal -1/(2K-1)."""
    n = 2 * K
    g = np.full((n, n), -1.0 / (2 * K - 1))
    np.fill_diagonal(g, 1.0)
    return g


def construct_counterexample(K: int, trimmed: bool = True) -> CounterexampleBundle:
    """Boundary matrix with coherence exactly 1/(2K-1) and a K-sparse ambiguity.

    The target Gram matrix has row sums 1 + (2K-1) * (-1/(2K-1)) = 0, so it is
    singular with the all-ones null direction.  Factoring it as U diag(w) U'
    and taking Phi = sqrt(diag(w)) U' gives unit columns with the prescribed
    inner products.  The null vector z splits into x1 (first K entries) and
    x2 = -(last K entries), so Phi x1 = Phi x2.

    ``trimmed`` drops the zero-eigenvalue row, giving a (2K-1) x 2K matrix;
    otherwise the square 2K x 2K factor with one zero row is returned.
    """
    if not 1 <= K <= COUNTEREXAMPLE_MAX_K:
        raise InvalidMatrixError(f"K = {K} outside [1, {COUNTEREXAMPLE_MAX_K}]")
    g = boundary_gram(K)
    w, u = sym_eig(g)
    zero = w < ZERO_EIGENVALUE_RTOL * w[0]
    if int(zero.sum()) != 1:
        raise ConstructionError(f"expected one zero eigenvalue, found {int(zero.sum())}: {w[zero]}")
    keep = ~zero if trimmed else np.ones_like(zero)
    scale = np.sqrt(np.where(zero, 0.0, w))
    raw = (scale[:, None] * u.T)[keep]
    phi = SensingMatrix(raw)

    z = u[:, np.flatnonzero(zero)[0]].copy()
    if z[np.flatnonzero(z)[0]] < 0:
        z = -z
    x1 = SparseSignal(2 * K, tuple(range(K)), z[:K])
    x2 = SparseSignal(2 * K, tuple(range(K, 2 * K)), -z[K:])

    mu = coherence(phi).mu
    gram_error = max_norm(phi.phi.T @ phi.phi - g)
    null_residual = float(np.linalg.norm(phi.phi @ z))
    gap = float(np.linalg.norm(phi.measure(x1) - phi.measure(x2)))
    bundle = CounterexampleBundle(
        K=K, phi=phi, z=z, x1=x1, x2=x2, eigenvalues=w, rank=int((~zero).sum()),
        mu=mu, gram_error=gram_error, null_residual=null_residual, ambiguity_gap=gap,
    )
    checks = {
        "gram_error": gram_error,
        "null_residual": null_residual,
        "ambiguity_gap": gap,
        "coherence offset": abs(mu - mu_threshold(K)),
    }
    for name, value in checks.items():
        if not value <= COUNTEREXAMPLE_ATOL:
            raise ConstructionError(f"{name} = {value:.3e} exceeds {COUNTEREXAMPLE_ATOL}")
    return bundle


@dataclass(frozen=True)
class FailureReport:
    K: int
    measurement_gap: float
    measurements_identical: bool
    result_from_x1: RecoveryResult
    result_from_x2: RecoveryResult
    outcome_x1: str  # "x1", "x2" or "neither"
    outcome_x2: str

    @property
    def x1_recovered(self) -> bool:
        return self.outcome_x1 == "x1"

    @property
    def x2_recovered(self) -> bool:
        return self.outcome_x2 == "x2"

    @property
    def some_signal_missed(self) -> bool:
        return not (self.x1_recovered and self.x2_recovered)


def _label(result: RecoveryResult, bundle: CounterexampleBundle) -> str:
    if recovery_matches(result, bundle.x1):
        return "x1"
    if recovery_matches(result, bundle.x2):
        return "x2"
    return "neither"


def demonstrate_failure(bundle: CounterexampleBundle) -> FailureReport:
    """Run OMP on both measurements of the ambiguous pair and label the outcomes."""
    y1 = bundle.phi.measure(bundle.x1)
    y2 = bundle.phi.measure(bundle.x2)
    gap = float(np.linalg.norm(y1 - y2))
    r1 = omp_recover(bundle.phi, y1, bundle.K)
    r2 = omp_recover(bundle.phi, y2, bundle.K)
    return FailureReport(
        K=bundle.K,
        measurement_gap=gap,
        measurements_identical=gap <= COUNTEREXAMPLE_ATOL,
        result_from_x1=r1,
        result_from_x2=r2,
        outcome_x1=_label(r1, bundle),
        outcome_x2=_label(r2, bundle),
    )

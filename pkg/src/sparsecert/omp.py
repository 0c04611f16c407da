"""Orthogonal Matching Pursuit with a full per-iteration trace.

Each of the K iterations runs four steps:

1. Identify: ``t = argmax_j |<r, phi_j>|`` over *all* n columns.
2. Augment: add ``t`` to the support.
3. Estimate: least squares of ``y`` on the selected columns.
4. Update: ``r = y - Phi_T xhat_T``.

Tie-breaking: correlations within ``TIE_RTOL`` (relative) of the maximum are
treated as tied, and the lowest column index wins.  Exact ties are real at the
coherence boundary 1/(2K-1), and this rule keeps the choice independent of
rounding noise (and of rescaling ``y``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .densela import as_vector, least_squares
from .errors import DimensionError, InvalidMatrixError, RankDeficiencyError
from .sensing import SensingMatrix, SparseSignal, coherence
from .tolerances import EARLY_EXIT_RTOL, RECOVERY_RTOL, TIE_RTOL


@dataclass(frozen=True)
class IterationRecord:
    k: int
    correlations: np.ndarray
    selected: int
    support_so_far: tuple[int, ...]  # selection order
    estimate: np.ndarray             # aligned with support_so_far
    residual: np.ndarray
    residual_norm: float

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "selected": self.selected,
            "support": list(self.support_so_far),
            "estimate": self.estimate.tolist(),
            "residual_norm": self.residual_norm,
            "correlations": self.correlations.tolist(),
            "residual": self.residual.tolist(),
        }


@dataclass(frozen=True)
class RecoveryResult:
    support: tuple[int, ...]  # sorted
    estimate: np.ndarray      # length n, zero off the support
    trace: tuple[IterationRecord, ...]
    residual_norm: float
    # max |final re-solve - last Estimate step|; zero in exact arithmetic
    output_agreement: float

    @property
    def selection_order(self) -> tuple[int, ...]:
        return tuple(rec.selected for rec in self.trace)


def select_index(correlations: np.ndarray) -> int:
    """Lowest index whose correlation is within TIE_RTOL of the maximum."""
    top = float(correlations.max())
    return int(np.flatnonzero(correlations >= top - TIE_RTOL * top)[0])


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def omp_recover(phi: SensingMatrix, y, K: int, early_exit: bool = False) -> RecoveryResult:
    """Run exactly K OMP iterations on measurements ``y``.

    With ``early_exit`` the loop also stops once the residual norm drops to
    ``EARLY_EXIT_RTOL * ||y||``; it is off by default.

    Raises RankDeficiencyError (with ``support`` set) if the selected columns
    become linearly dependent, including the degenerate case where an index
    would be selected twice.
    """
    y = as_vector(y, "y")
    m, n = phi.m, phi.n
    if y.shape[0] != m:
        raise DimensionError(f"measurement length {y.shape[0]} does not match m = {m}")
    if not 1 <= K <= min(m, n):
        raise InvalidMatrixError(f"sparsity K = {K} must lie in [1, {min(m, n)}]")

    a = phi.phi
    ynorm = float(np.linalg.norm(y))
    r = y
    support: list[int] = []
    xhat = np.zeros(0)
    trace = []
    for k in range(1, K + 1):
        corr = np.abs(a.T @ r)
        t = select_index(corr)
        if t in support:
            raise RankDeficiencyError(
                f"iteration {k} re-selected column {t}; the residual carries no new direction",
                column=len(support),
                support=tuple(support + [t]),
            )
        support.append(t)
        try:
            xhat = least_squares(a[:, support], y)
        except RankDeficiencyError as exc:
            raise RankDeficiencyError(
                f"columns {support} are numerically dependent: {exc}",
                column=exc.column,
                support=tuple(support),
            ) from exc
        r = y - a[:, support] @ xhat
        rnorm = float(np.linalg.norm(r))
        trace.append(IterationRecord(
            k=k,
            correlations=_frozen(corr),
            selected=t,
            support_so_far=tuple(support),
            estimate=_frozen(xhat.copy()),
            residual=_frozen(r.copy()),
            residual_norm=rnorm,
        ))
        if early_exit and rnorm <= EARLY_EXIT_RTOL * ynorm:
            break

    final_support = sorted(support)
    final = least_squares(a[:, final_support], y)
    by_index = dict(zip(support, xhat))
    agreement = max(abs(v - by_index[i]) for i, v in zip(final_support, final))
    estimate = np.zeros(n)
    estimate[final_support] = final
    return RecoveryResult(
        support=tuple(final_support),
        estimate=_frozen(estimate),
        trace=tuple(trace),
        residual_norm=float(np.linalg.norm(y - a[:, final_support] @ final)),
        output_agreement=float(agreement),
    )


def recovery_matches(result: RecoveryResult, x: SparseSignal) -> bool:
    """Same support and values within RECOVERY_RTOL * max(1, ||x||)."""
    if result.support != x.support:
        return False
    err = float(np.max(np.abs(result.estimate - x.dense())))
    return err <= RECOVERY_RTOL * max(1.0, x.norm())


def exact_recovery(phi: SensingMatrix, x: SparseSignal) -> tuple[bool, RecoveryResult]:
    """Measure ``x`` noiselessly, run OMP with K = |supp(x)|, compare."""
    result = omp_recover(phi, phi.measure(x), x.K)
    return recovery_matches(result, x), result


@dataclass(frozen=True)
class FirstIterationDiagnostics:
    """First-iteration correlation bounds for y = Phi x.

    ``lower`` bounds the best correlation from below; ``offsupport_bound``
    bounds every off-support correlation from above.  When (K-1) mu >= 1 the
    lower bound is vacuous (nonpositive).  ``offsupport_max`` is None when the
    support covers every column.
    """

    K: int
    mu: float
    lower: float
    max_corr: float
    offsupport_max: float | None
    offsupport_bound: float
    vacuous: bool

    @property
    def separated(self) -> bool:
        return self.lower > self.offsupport_bound


def first_iteration_diagnostics(phi: SensingMatrix, x: SparseSignal, mu: float | None = None) -> FirstIterationDiagnostics:
    if x.n != phi.n:
        raise DimensionError(f"signal length {x.n} does not match n = {phi.n}")
    if mu is None:
        mu = coherence(phi).mu
    K = x.K
    xnorm = x.norm()
    corr = np.abs(phi.phi.T @ phi.measure(x))
    off = np.ones(phi.n, dtype=bool)
    off[list(x.support)] = False
    lower = (1.0 - (K - 1) * mu) * xnorm / math.sqrt(K)
    return FirstIterationDiagnostics(
        K=K,
        mu=mu,
        lower=lower,
        max_corr=float(corr.max()),
        offsupport_max=float(corr[off].max()) if off.any() else None,
        offsupport_bound=math.sqrt(K) * mu * xnorm,
        vacuous=(K - 1) * mu >= 1.0,
    )

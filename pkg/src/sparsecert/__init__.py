"""Orthogonal Matching Pursuit with numerical checks of its coherence guarantee."""

from .guarantees import (
    CounterexampleBundle,
    GuaranteeReport,
    check_lemma2,
    check_lemma3_decomposition,
    construct_counterexample,
    demonstrate_failure,
    evaluate_guarantees,
    incoherence_condition,
)
from .omp import RecoveryResult, exact_recovery, first_iteration_diagnostics, omp_recover
from .sensing import (
    SensingMatrix,
    SparseSignal,
    coherence,
    gaussian_ensemble,
    gram,
    normalize_columns,
    random_sparse_signal,
    ric_bruteforce,
    welch_bound,
)

__version__ = "0.1.0"

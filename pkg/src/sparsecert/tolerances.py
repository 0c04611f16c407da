"""Numerical tolerances used across the package.

Every threshold lives here so the analysis code and the tests agree on one
number.  Relative tolerances are scaled by the quantity named in the comment.
"""

# densela
SYMMETRY_ATOL = 1e-12          # max |S[i,j] - S[j,i]| accepted by sym_eig
JACOBI_OFFDIAG_RTOL = 1e-12    # stop when off-diagonal Frobenius mass <= rtol * ||S||_F
JACOBI_MAX_SWEEPS = 100
PIVOT_RTOL = 1e-12             # R[j,j] below rtol * max pivot -> rank deficient

# sensing
UNIT_NORM_ATOL = 1e-10         # column norms of a SensingMatrix
ZERO_COLUMN_ATOL = 1e-12       # normalize_columns refuses columns below this
RIC_MAX_SUPPORTS = 200_000     # C(n, K) cap for the brute-force isometry constant
MIN_SIGNAL_MAGNITUDE = 1e-6    # random sparse signals redraw values below this

# omp
TIE_RTOL = 1e-12               # correlations within rtol * max count as tied
EARLY_EXIT_RTOL = 1e-12        # optional stop when ||r|| <= rtol * ||y||
RECOVERY_RTOL = 1e-8           # exact recovery: max|xhat - x| <= rtol * max(1, ||x||)
OUTPUT_AGREEMENT_ATOL = 1e-12  # final re-solve vs last Estimate step

# guarantees
THRESHOLD_MARGIN = 1e-12       # mu must sit this far below 1/(2K-1) to count
INEQUALITY_SLACK = 1e-9        # two-sided norm bounds
CHAIN_SLACK = 1e-10            # first-iteration correlation bounds
ZERO_EIGENVALUE_RTOL = 1e-10   # relative to the largest eigenvalue
COUNTEREXAMPLE_ATOL = 1e-9     # null residual, ambiguity gap, gram error, coherence
COUNTEREXAMPLE_MAX_K = 64

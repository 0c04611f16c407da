import numpy as np
import pytest

from sparsecert.densela import householder_qr
from sparsecert.rng import Xorshift64Star
from sparsecert.sensing import SensingMatrix, normalize_columns


def sylvester_hadamard(m: int) -> np.ndarray:
    h = np.ones((1, 1))
    while h.shape[0] < m:
        h = np.block([[h, h], [h, -h]])
    assert h.shape[0] == m
    return h


def random_orthogonal(m: int, rng: Xorshift64Star) -> np.ndarray:
    q, r = householder_qr(rng.normals(m * m).reshape(m, m))
    return q * np.sign(np.diag(r))


def planted_near_orthogonal(m: int, eps: float, rng: Xorshift64Star) -> SensingMatrix:
    """Square matrix close to a random orthogonal one; coherence O(eps)."""
    q = random_orthogonal(m, rng)
    return normalize_columns(q + eps * rng.normals(m * m).reshape(m, m))


def planted_two_bases(m: int, rng: Xorshift64Star) -> SensingMatrix:
    """Rotated [I | H/sqrt(m)] with shuffled, sign-flipped columns; coherence 1/sqrt(m)."""
    q = random_orthogonal(m, rng)
    raw = q @ np.hstack([np.eye(m), sylvester_hadamard(m) / np.sqrt(m)])
    perm = rng.sample_without_replacement(2 * m, 2 * m)
    signs = np.array([1.0 if rng.uniform() < 0.5 else -1.0 for _ in range(2 * m)])
    return normalize_columns(raw[:, perm] * signs)


def ric_oracle(phi: SensingMatrix, K: int) -> float:
    """delta_K over all supports of size <= K using LAPACK eigenvalues."""
    from itertools import combinations

    g = phi.phi.T @ phi.phi
    best = 0.0
    for size in range(1, K + 1):
        for s in combinations(range(phi.n), size):
            w = np.linalg.eigvalsh(g[np.ix_(s, s)])
            best = max(best, w[-1] - 1.0, 1.0 - w[0])
    return best


@pytest.fixture
def rng():
    return Xorshift64Star(20240611)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

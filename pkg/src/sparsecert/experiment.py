"""Monte-Carlo phase-transition experiments for OMP.

Trial ``i`` of sparsity ``K`` draws everything (matrix first, then signal)
from one generator seeded with ``derive_seed(seed, K, i)``, so any cell or
trial can be reproduced on its own.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import RankDeficiencyError, SparseCertError
from .guarantees import incoherence_condition
from .omp import exact_recovery
from .rng import Xorshift64Star, derive_seed
from .sensing import SensingMatrix, coherence, gaussian_ensemble, random_sparse_signal

ENSEMBLES = ("gaussian", "identity")
CSV_HEADER = ("K", "trials", "successes", "mean_mu", "theorem1_fraction")


class ConfigError(SparseCertError, ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    m: int
    n: int
    k_range: tuple[int, int]
    trials: int
    seed: int
    ensemble: str
    output_path: str

    def __post_init__(self):
        for name in ("m", "n", "trials", "seed"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
        if self.m < 1 or self.n < 1:
            raise ConfigError("m and n must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        kr = self.k_range
        if (not isinstance(kr, (list, tuple)) or len(kr) != 2
                or not all(isinstance(k, int) and not isinstance(k, bool) for k in kr)):
            raise ConfigError(f"k_range must be a pair of integers, got {kr!r}")
        lo, hi = kr
        if not 1 <= lo <= hi <= min(self.m, self.n):
            raise ConfigError(f"k_range {list(kr)} must lie within [1, {min(self.m, self.n)}]")
        object.__setattr__(self, "k_range", (lo, hi))
        if self.ensemble not in ENSEMBLES:
            raise ConfigError(f"ensemble must be one of {ENSEMBLES}, got {self.ensemble!r}")
        if self.ensemble == "identity" and self.m != self.n:
            raise ConfigError("the identity ensemble needs m == n")
        if not isinstance(self.output_path, str) or not self.output_path:
            raise ConfigError("output_path must be a nonempty string")

    @classmethod
    def from_dict(cls, data) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        expected = {f.name for f in fields(cls)}
        missing = expected - data.keys()
        extra = data.keys() - expected
        if missing or extra:
            raise ConfigError(f"config fields mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)


@dataclass(frozen=True)
class PhaseCell:
    K: int
    success_count: int
    trials: int
    mean_mu: float
    theorem1_fraction: float
    covered_successes: int  # successes among trials whose matrix met the condition

    def row(self) -> tuple:
        return (self.K, self.trials, self.success_count, self.mean_mu, self.theorem1_fraction)


def _draw_matrix(cfg: ExperimentConfig, rng: Xorshift64Star) -> SensingMatrix:
    if cfg.ensemble == "identity":
        return SensingMatrix(np.eye(cfg.m))
    return gaussian_ensemble(cfg.m, cfg.n, rng)


def run_cell(cfg: ExperimentConfig, K: int) -> PhaseCell:
    successes = 0
    covered = 0
    covered_successes = 0
    mus = []
    for i in range(cfg.trials):
        rng = Xorshift64Star(derive_seed(cfg.seed, K, i))
        phi = _draw_matrix(cfg, rng)
        x = random_sparse_signal(cfg.n, K, rng)
        mu = coherence(phi).mu if cfg.n >= 2 else 0.0
        try:
            ok, _ = exact_recovery(phi, x)
        except RankDeficiencyError:
            ok = False
        mus.append(mu)
        successes += ok
        if incoherence_condition(mu, K):
            covered += 1
            covered_successes += ok
    return PhaseCell(
        K=K,
        success_count=successes,
        trials=cfg.trials,
        mean_mu=float(np.mean(mus)),
        theorem1_fraction=covered / cfg.trials,
        covered_successes=covered_successes,
    )


def run_phase(cfg: ExperimentConfig) -> list[PhaseCell]:
    lo, hi = cfg.k_range
    return [run_cell(cfg, K) for K in range(lo, hi + 1)]


def format_csv(cells: list[PhaseCell]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for cell in cells:
        writer.writerow(cell.row())
    return buf.getvalue()

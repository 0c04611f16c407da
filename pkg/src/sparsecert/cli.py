"""Command-line front end.

Exit codes: 0 ok, 2 bad input (parse, dimensions, config, I/O), 3 column
normalization, 4 rank deficiency, 5 counterexample construction.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .errors import (
    CapExceededError,
    ConstructionError,
    DimensionError,
    InvalidMatrixError,
    MatrixFormatError,
    NormalizationError,
    RankDeficiencyError,
)
from .experiment import ConfigError, ExperimentConfig, format_csv, run_phase
from .guarantees import construct_counterexample, demonstrate_failure, incoherence_condition, mu_threshold
from .matrixio import read_matrix
from .omp import omp_recover
from .sensing import SensingMatrix, coherence, normalize_columns, ric_bruteforce, welch_bound

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NORMALIZATION = 3
EXIT_RANK = 4
EXIT_CONSTRUCTION = 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_sensing(path: str, normalize: bool) -> SensingMatrix:
    try:
        raw = read_matrix(path)
    except MatrixFormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from None
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}", EXIT_INPUT) from None
    try:
        return normalize_columns(raw) if normalize else SensingMatrix(raw)
    except NormalizationError as exc:
        hint = "" if normalize else " (pass --normalize to rescale)"
        raise CliError(f"{path}: {exc}{hint}", EXIT_NORMALIZATION) from None


def _load_vector(path: str) -> np.ndarray:
    try:
        a = read_matrix(path)
    except MatrixFormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from None
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}", EXIT_INPUT) from None
    if 1 not in a.shape:
        raise CliError(f"{path}: expected a single row or column, got {a.shape[0]}x{a.shape[1]}", EXIT_INPUT)
    return a.reshape(-1)


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload))
    else:
        print("\n".join(lines))


def cmd_coherence(args) -> int:
    phi = _load_sensing(args.matrix, args.normalize)
    try:
        rep = coherence(phi)
    except InvalidMatrixError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    welch = welch_bound(phi.m, phi.n) if phi.n > phi.m else None
    if rep.mu > 0:
        # small slack so that mu = 1/(2K-1) up to rounding lands on K
        k_max = max(1, math.ceil((1.0 / rep.mu + 1.0) / 2.0 - 1e-9))
        k_max = min(k_max, min(phi.m, phi.n))
    else:
        k_max = min(phi.m, phi.n)
    verdicts = {K: incoherence_condition(rep.mu, K) for K in range(1, k_max + 1)}
    payload = {
        "m": phi.m,
        "n": phi.n,
        "mu": rep.mu,
        "argpair": list(rep.argpair),
        "welch_bound": welch,
        "verdicts": [{"K": K, "threshold": mu_threshold(K), "holds": ok} for K, ok in verdicts.items()],
    }
    lines = [
        f"m = {phi.m}, n = {phi.n}",
        f"mu = {rep.mu:.17g} at columns {rep.argpair}",
        f"welch bound = {welch:.17g}" if welch is not None else "welch bound = n/a (n <= m)",
    ]
    lines += [f"K = {K}: mu < {mu_threshold(K):.6g} -> {'yes' if ok else 'no'}" for K, ok in verdicts.items()]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_run(args) -> int:
    phi = _load_sensing(args.matrix, args.normalize)
    v = _load_vector(args.signal)
    if args.measurements:
        y = v
    else:
        if v.shape[0] != phi.n:
            raise CliError(f"signal length {v.shape[0]} does not match n = {phi.n}", EXIT_INPUT)
        y = phi.phi @ v
    try:
        res = omp_recover(phi, y, args.K, early_exit=args.early_exit)
    except (DimensionError, InvalidMatrixError) as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    except RankDeficiencyError as exc:
        raise CliError(f"rank deficiency on support {list(exc.support or ())}: {exc}", EXIT_RANK) from None
    if args.trace:
        for rec in res.trace:
            print(json.dumps(rec.to_json()))
    values = [float(res.estimate[i]) for i in res.support]
    payload = {"support": list(res.support), "values": values, "residual_norm": res.residual_norm}
    lines = [
        f"support = {list(res.support)}",
        "values = " + " ".join(f"{x:.17g}" for x in values),
        f"residual_norm = {res.residual_norm:.17g}",
    ]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_ric(args) -> int:
    phi = _load_sensing(args.matrix, args.normalize)
    try:
        delta = ric_bruteforce(phi, args.K)
    except (CapExceededError, InvalidMatrixError) as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    mu = coherence(phi).mu if phi.n >= 2 else 0.0
    payload = {"K": args.K, "delta": delta, "mu": mu, "coherence_bound": (args.K - 1) * mu}
    lines = [f"delta_{args.K} = {delta:.17g}", f"(K-1) mu = {(args.K - 1) * mu:.17g}"]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    try:
        bundle = construct_counterexample(args.K, trimmed=not args.square)
    except InvalidMatrixError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    except ConstructionError as exc:
        raise CliError(f"construction failed: {exc}", EXIT_CONSTRUCTION) from None
    try:
        mpath, jpath = bundle.save(args.out_dir)
    except OSError as exc:
        raise CliError(f"cannot write to {args.out_dir}: {exc.strerror or exc}", EXIT_INPUT) from None
    report = demonstrate_failure(bundle)
    payload = {
        "K": bundle.K,
        "mu": bundle.mu,
        "rank": bundle.rank,
        "null_residual": bundle.null_residual,
        "ambiguity_gap": bundle.ambiguity_gap,
        "omp_from_x1": report.outcome_x1,
        "omp_from_x2": report.outcome_x2,
        "matrix_file": str(mpath),
        "sidecar_file": str(jpath),
    }
    lines = [
        f"K = {bundle.K}: Phi is {bundle.phi.m}x{bundle.phi.n}, rank {bundle.rank}",
        f"mu = {round(bundle.mu, 12)!r} (threshold 1/(2K-1) = {round(mu_threshold(bundle.K), 12)!r})",
        f"null_residual = {bundle.null_residual:.3e}",
        f"ambiguity_gap = {bundle.ambiguity_gap:.3e}",
        f"OMP on Phi x1 recovered: {report.outcome_x1}",
        f"OMP on Phi x2 recovered: {report.outcome_x2}",
        f"wrote {mpath} and {jpath}",
    ]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_phase(args) -> int:
    try:
        cfg = ExperimentConfig.load(args.config)
        if args.seed is not None:
            cfg = ExperimentConfig(**{**cfg.__dict__, "seed": args.seed})
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    text = format_csv(run_phase(cfg))
    if cfg.output_path == "-":
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {cfg.output_path}: {exc.strerror or exc}", EXIT_INPUT) from None
    if args.json:
        print(json.dumps({"output_path": cfg.output_path}))
    else:
        print(f"wrote {cfg.output_path}")
    return EXIT_OK


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the experiment seed (u64)")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    p.add_argument("--normalize", action="store_true", default=argparse.SUPPRESS,
                   help="rescale matrix columns to unit norm instead of rejecting them")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(
        prog="sparsecert",
        description="OMP recovery, coherence audits and boundary counterexamples.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coherence", parents=[common], help="coherence and per-K incoherence verdicts")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("run", parents=[common], help="recover a sparse signal with OMP")
    p.add_argument("matrix")
    p.add_argument("signal", help="signal x (n values) as a single-row or single-column matrix file")
    p.add_argument("K", type=int)
    p.add_argument("--trace", action="store_true", help="print one JSON line per iteration")
    p.add_argument("--measurements", action="store_true", help="treat the vector file as y instead of x")
    p.add_argument("--early-exit", action="store_true", help="stop once the residual vanishes")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ric", parents=[common], help="brute-force restricted isometry constant")
    p.add_argument("matrix")
    p.add_argument("K", type=int)
    p.set_defaults(func=cmd_ric)

    p = sub.add_parser("counterexample", parents=[common], help="boundary matrix where recovery is ambiguous")
    p.add_argument("K", type=int)
    p.add_argument("out_dir")
    p.add_argument("--square", action="store_true", help="keep the zero row (2K x 2K)")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("phase", parents=[common], help="Monte-Carlo recovery rates per sparsity")
    p.add_argument("config", help="JSON experiment config")
    p.set_defaults(func=cmd_phase)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", None), ("json", False), ("normalize", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

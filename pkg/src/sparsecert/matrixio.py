"""Plain-text matrix files.

Format (UTF-8): first line ``m n``, then m lines of n space-separated decimal
floats.  Values are written with 17 significant digits so that a read after a
write reproduces every double exactly.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .densela import as_matrix
from .errors import MatrixFormatError


def format_matrix(a) -> str:
    a = as_matrix(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    lines.extend(" ".join(f"{v:.17g}" for v in row) for row in a)
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = text.splitlines()
    # ignore trailing blank lines only; anything else must be exact
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MatrixFormatError("empty file", line=1)
    header = lines[0].split()
    if len(header) != 2:
        raise MatrixFormatError("header must be 'm n'", line=1)
    try:
        m, n = int(header[0]), int(header[1])
    except ValueError:
        raise MatrixFormatError("header dimensions must be integers", line=1) from None
    if m < 1 or n < 1:
        raise MatrixFormatError("dimensions must be positive", line=1)
    if len(lines) - 1 != m:
        # point at the first missing or first surplus row
        where = len(lines) + 1 if len(lines) - 1 < m else m + 2
        raise MatrixFormatError(f"expected {m} data rows, found {len(lines) - 1}", line=where)
    out = np.empty((m, n))
    for i, line in enumerate(lines[1:]):
        fields = line.split()
        if len(fields) != n:
            raise MatrixFormatError(f"expected {n} values, found {len(fields)}", line=i + 2)
        for j, tok in enumerate(fields):
            try:
                v = float(tok)
            except ValueError:
                raise MatrixFormatError(f"cannot parse {tok!r} as a number", line=i + 2) from None
            if not math.isfinite(v):
                raise MatrixFormatError(f"non-finite value {tok!r}", line=i + 2)
            out[i, j] = v
    return out


def write_matrix(path, a) -> None:
    Path(path).write_text(format_matrix(a), encoding="utf-8")


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text(encoding="utf-8"))

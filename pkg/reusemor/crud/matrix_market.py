"""
Matrix Market coordinate files.

Reader: `%%MatrixMarket matrix coordinate real general|symmetric`, 1-based
triples, symmetric files mirrored, duplicates summed. Errors name the
offending line. Writer: general coordinate form, row-major, values in
shortest round-trip decimal.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from reusemor.core.errors import MatrixIOError
from reusemor.linalg.sparse import as_csr


logger = logging.getLogger(__name__)

HEADER = "%%MatrixMarket matrix coordinate real general"
SYMMETRIES = ("general", "symmetric")


def _parse_header(line: str, path: str) -> str:
    tokens = line.strip().split()
    if len(tokens) != 5 or tokens[0] != "%%MatrixMarket":
        raise MatrixIOError(f"expected a '%%MatrixMarket' banner, got {line.strip()!r}", path=path, line=1)
    obj, fmt, field, symmetry = (t.lower() for t in tokens[1:])
    if obj != "matrix" or fmt != "coordinate" or field != "real":
        raise MatrixIOError(f"only 'matrix coordinate real' files are supported, got {line.strip()!r}", path=path, line=1)
    if symmetry not in SYMMETRIES:
        raise MatrixIOError(f"unsupported symmetry {symmetry!r}", path=path, line=1)
    return symmetry


def _ints(tokens: list[str], count: int, what: str, path: str, lineno: int) -> list[int]:
    if len(tokens) != count:
        raise MatrixIOError(f"{what}: expected {count} fields, got {len(tokens)}", path=path, line=lineno)
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise MatrixIOError(f"{what}: non-integer field in {' '.join(tokens)!r}", path=path, line=lineno)


def read_matrix_market(path: str | Path) -> sp.csr_matrix:
    p = str(path)
    try:
        with open(p, "rb") as fh:
            raw = fh.read()
    except OSError as e:
        raise MatrixIOError(f"cannot read file: {e.strerror or e}", path=p)
    try:
        lines = raw.decode("utf-8").splitlines()
    except UnicodeDecodeError as e:
        line = raw.count(b"\n", 0, e.start) + 1
        raise MatrixIOError(f"not UTF-8 text (byte 0x{raw[e.start]:02x})", path=p, line=line)
    if not lines:
        raise MatrixIOError("empty file", path=p, line=1)
    symmetry = _parse_header(lines[0], p)

    body = ((k, ln.strip()) for k, ln in enumerate(lines[1:], start=2))
    body = ((k, ln) for k, ln in body if ln and not ln.startswith("%"))
    size = next(body, None)
    if size is None:
        raise MatrixIOError("missing size line", path=p, line=len(lines))
    n_rows, n_cols, nnz = _ints(size[1].split(), 3, "size line", p, size[0])
    if n_rows < 0 or n_cols < 0 or nnz < 0:
        raise MatrixIOError("negative size", path=p, line=size[0])
    if symmetry == "symmetric" and n_rows != n_cols:
        raise MatrixIOError(f"symmetric matrix must be square, got {n_rows}x{n_cols}", path=p, line=size[0])

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    k = 0
    for lineno, ln in body:
        if k >= nnz:
            raise MatrixIOError(f"more entries than the declared {nnz}", path=p, line=lineno)
        tokens = ln.split()
        if len(tokens) != 3:
            raise MatrixIOError(f"entry: expected 'row col value', got {ln!r}", path=p, line=lineno)
        i, j = _ints(tokens[:2], 2, "entry", p, lineno)
        try:
            v = float(tokens[2])
        except ValueError:
            raise MatrixIOError(f"entry: bad value {tokens[2]!r}", path=p, line=lineno)
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise MatrixIOError(f"entry ({i}, {j}) outside {n_rows}x{n_cols}", path=p, line=lineno)
        rows[k], cols[k], vals[k] = i - 1, j - 1, v
        k += 1
    if k != nnz:
        raise MatrixIOError(f"expected {nnz} entries, found {k}", path=p, line=len(lines))

    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    A = as_csr(sp.coo_matrix((vals, (rows, cols)), shape=(n_rows, n_cols)))
    logger.debug(f"read {p}: {n_rows}x{n_cols}, {A.nnz} stored entries ({symmetry})")
    return A


def write_matrix_market(path: str | Path, A, *, comment: str | None = None) -> Path:
    """Writes A (sparse or dense) as a general coordinate file; zeros are skipped."""
    p = Path(path)
    M = as_csr(A)
    M.eliminate_zeros()
    M = M.tocoo()
    order = np.lexsort((M.col, M.row))
    out = [HEADER]
    if comment:
        out.extend(f"% {c}" for c in comment.splitlines())
    out.append(f"{M.shape[0]} {M.shape[1]} {M.nnz}")
    out.extend(f"{M.row[k] + 1} {M.col[k] + 1} {float(M.data[k])!r}" for k in order)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text("\n".join(out) + "\n", encoding="utf-8")
    except OSError as e:
        raise MatrixIOError(f"cannot write file: {e.strerror or e}", path=str(p))
    return p

"""Textual matrix interchange format.

Header line: "ROWS COLS" for a GF(2) matrix or "ROWS COLS M" for a matrix
over GF(2^M) with the default modulus. One row per following line, entries
as lowercase hex integers separated by single spaces. Round-trips are
bit-exact.
"""

from __future__ import annotations

import io
import os

from .bitmatrix import BitMatrix
from .errors import ValidationError
from .gf import GfField, GfMatrix


def matrix_to_text(mat) -> str:
    out = io.StringIO()
    if isinstance(mat, BitMatrix):
        out.write(f"{mat.rows} {mat.cols}\n")
        dense = mat.to_dense()
        for i in range(mat.rows):
            out.write(" ".join("1" if v else "0" for v in dense[i]))
            out.write("\n")
    elif isinstance(mat, GfMatrix):
        out.write(f"{mat.rows} {mat.cols} {mat.field.m}\n")
        for i in range(mat.rows):
            out.write(" ".join(format(int(v), "x") for v in mat.entries[i]))
            out.write("\n")
    else:
        raise ValidationError(f"cannot serialize {type(mat).__name__}")
    return out.getvalue()


def matrix_from_text(text: str):
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ValidationError("line 1: missing matrix header")
    head = lines[0].split()
    if len(head) not in (2, 3):
        raise ValidationError("line 1: header must be 'ROWS COLS' or 'ROWS COLS M'")
    try:
        dims = [int(tok) for tok in head]
    except ValueError:
        raise ValidationError("line 1: header fields must be integers") from None
    rows, cols = dims[0], dims[1]
    m = dims[2] if len(dims) == 3 else None
    if rows < 0 or cols < 0:
        raise ValidationError("line 1: dimensions must be nonnegative")
    body = lines[1:1 + rows]
    if len(body) < rows:
        raise ValidationError(f"line {len(lines)}: expected {rows} rows, found {len(body)}")
    entries = []
    for i, line in enumerate(body):
        toks = line.split()
        if len(toks) != cols:
            raise ValidationError(f"line {i + 2}: expected {cols} entries, found {len(toks)}")
        try:
            vals = [int(tok, 16) for tok in toks]
        except ValueError:
            raise ValidationError(f"line {i + 2}: entries must be hex integers") from None
        entries.append(vals)
    if m is None:
        for i, row in enumerate(entries):
            for v in row:
                if v not in (0, 1):
                    raise ValidationError(f"line {i + 2}: GF(2) entries must be 0 or 1")
        return BitMatrix.from_dense(entries) if rows else BitMatrix.zeros(rows, cols)
    field = GfField(m)
    for i, row in enumerate(entries):
        for v in row:
            if not 0 <= v < field.order:
                raise ValidationError(f"line {i + 2}: entry {v:#x} outside GF(2^{m})")
    import numpy as np
    arr = np.array(entries, dtype=np.int64).reshape(rows, cols)
    return GfMatrix(field, arr)


def save_matrix(mat, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(matrix_to_text(mat))

def load_matrix(path: str | os.PathLike):
    with open(path) as fh:
        return matrix_from_text(fh.read())

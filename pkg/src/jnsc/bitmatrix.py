"""Dense GF(2) matrices with bit-packed rows.

Storage is row-major, 64 entries per word, little-endian within a word:
entry (i, j) lives at bit (j & 63) of word (i, j >> 6). Vectors at API
boundaries are plain numpy uint8 arrays of 0/1 values; the row-vector
convention v @ M is used throughout the package.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrixError, ValidationError

_WORD = 64


def _words_for(cols: int) -> int:
    return (cols + _WORD - 1) >> 6


def pack_rows(dense: np.ndarray) -> np.ndarray:
    """Pack a (rows, cols) 0/1 array into (rows, words) uint64."""
    dense = np.asarray(dense)
    if dense.ndim == 1:
        dense = dense[None, :]
    r, c = dense.shape
    w = _words_for(c)
    padded = np.zeros((r, w * _WORD), dtype=np.uint8)
    padded[:, :c] = dense.astype(np.uint8) & 1
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(r, w)

def unpack_rows(words: np.ndarray, cols: int) -> np.ndarray:
    """Inverse of pack_rows; returns a (rows, cols) uint8 array."""
    as_bytes = np.ascontiguousarray(words).view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :cols]


class BitMatrix:
    """A rows x cols matrix over GF(2)."""

    __slots__ = ("rows", "cols", "words")

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        if rows < 0 or cols < 0:
            raise ValidationError("matrix dimensions must be nonnegative")
        self.rows = rows
        self.cols = cols
        w = _words_for(cols)
        if words is None:
            self.words = np.zeros((rows, w), dtype=np.uint64)
        else:
            if words.shape != (rows, w):
                raise ValidationError(f"expected word array of shape {(rows, w)}")
            self.words = words

    # construction -----------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        m = cls(n, n)
        idx = np.arange(n)
        m.words[idx, idx >> 6] = np.uint64(1) << (idx & 63).astype(np.uint64)
        return m

    @classmethod
    def from_dense(cls, dense) -> "BitMatrix":
        dense = np.atleast_2d(np.asarray(dense))
        r, c = dense.shape
        return cls(r, c, pack_rows(dense))

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator,
               density: float = 0.5) -> "BitMatrix":
        """Sample entries i.i.d. Bernoulli(density)."""
        if density == 0.5:
            w = _words_for(cols)
            words = rng.integers(0, 2 ** 64, size=(rows, w), dtype=np.uint64)
            m = cls(rows, cols, words)
            m._mask_tail()
            return m
        dense = (rng.random((rows, cols)) < density).astype(np.uint8)
        return cls.from_dense(dense)

    def _mask_tail(self) -> None:
        rem = self.cols & 63
        if rem and self.words.shape[1]:
            self.words[:, -1] &= np.uint64((1 << rem) - 1)

    # entry access ------------------------------------------------------

    def get(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i}, {j}) out of range for {self.rows}x{self.cols}")
        return int((self.words[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1))

    def set(self, i: int, j: int, value: int) -> None:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i}, {j}) out of range for {self.rows}x{self.cols}")
        bit = np.uint64(1) << np.uint64(j & 63)
        if value & 1:
            self.words[i, j >> 6] |= bit
        else:
            self.words[i, j >> 6] &= ~bit

    # basics -------------------------------------------------------------

    def to_dense(self) -> np.ndarray:
        return unpack_rows(self.words, self.cols)

    def copy(self) -> "BitMatrix":
        return BitMatrix(self.rows, self.cols, self.words.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (self.rows == other.rows and self.cols == other.cols
                and bool(np.array_equal(self.words, other.words)))

    __hash__ = None

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    @property
    def nnz(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    @property
    def density(self) -> float:
        size = self.rows * self.cols
        return self.nnz / size if size else 0.0

    def row_weights(self) -> np.ndarray:
        return np.bitwise_count(self.words).sum(axis=1).astype(np.int64)

    def col_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=0, dtype=np.int64)

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    def select_columns(self, idx) -> "BitMatrix":
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.cols):
            raise IndexError("column selection out of range")
        return BitMatrix.from_dense(self.to_dense()[:, idx])

    # algebra --------------------------------------------------------------

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if not isinstance(other, BitMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValidationError(
                f"shape mismatch: {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        left = self.to_dense().astype(bool)
        out = np.zeros((self.rows, other.words.shape[1]), dtype=np.uint64)
        for i in range(self.rows):
            sel = left[i]
            if sel.any():
                out[i] = np.bitwise_xor.reduce(other.words[sel], axis=0)
        return BitMatrix(self.rows, other.cols, out)

    def vecmat(self, v: np.ndarray) -> np.ndarray:
        """Row-vector product v @ self; v has length self.rows."""
        v = np.asarray(v)
        if v.shape != (self.rows,):
            raise ValidationError(f"vector length {v.shape} does not match {self.rows} rows")
        sel = v.astype(bool)
        if not sel.any():
            return np.zeros(self.cols, dtype=np.uint8)
        packed = np.bitwise_xor.reduce(self.words[sel], axis=0)
        return unpack_rows(packed[None, :], self.cols)[0]

    # elimination ------------------------------------------------------------

    def _eliminate(self, aug: np.ndarray | None = None, full: bool = False):
        """In-place-on-copy row elimination.

        Returns (rank, pivot_cols, words, aug) where words is the reduced
        copy of self.words and aug received the same row operations.
        """
        work = self.words.copy()
        aug = None if aug is None else aug.copy()
        pivot_cols = []
        r = 0
        for c in range(self.cols):
            if r == self.rows:
                break
            wi = c >> 6
            sh = np.uint64(c & 63)
            colbits = (work[r:, wi] >> sh) & np.uint64(1)
            nz = np.nonzero(colbits)[0]
            if nz.size == 0:
                continue
            p = r + int(nz[0])
            if p != r:
                work[[r, p]] = work[[p, r]]
                if aug is not None:
                    aug[[r, p]] = aug[[p, r]]
            if full:
                mask = ((work[:, wi] >> sh) & np.uint64(1)).astype(bool)
                mask[r] = False
            else:
                mask = np.zeros(self.rows, dtype=bool)
                below = ((work[r + 1:, wi] >> sh) & np.uint64(1)).astype(bool)
                mask[r + 1:] = below
            if mask.any():
                work[mask] ^= work[r]
                if aug is not None:
                    aug[mask] ^= aug[r]
            pivot_cols.append(c)
            r += 1
        return r, pivot_cols, work, aug

    def rank(self) -> int:
        r, _, _, _ = self._eliminate()
        return r

    def solve(self, b: np.ndarray) -> np.ndarray | None:
        """Solve self @ x = b for the column vector x.

        Returns a uint8 vector with free variables set to zero, or None
        when the system is inconsistent.
        """
        b = np.asarray(b).astype(np.uint8) & 1
        if b.shape != (self.rows,):
            raise ValidationError(f"rhs length {b.shape} does not match {self.rows} rows")
        rank, pivot_cols, work, aug = self._eliminate(aug=b[:, None].astype(np.uint64),
                                                      full=True)
        rhs = aug[:, 0] & 1
        if rank < self.rows and rhs[rank:].any():
            return None
        x = np.zeros(self.cols, dtype=np.uint8)
        for row, c in enumerate(pivot_cols):
            x[c] = rhs[row]
        return x

    def invert(self) -> "BitMatrix":
        if self.rows != self.cols:
            raise ValidationError("only square matrices can be inverted")
        ident = BitMatrix.identity(self.rows)
        rank, pivot_cols, work, aug = self._eliminate(aug=ident.words, full=True)
        if rank < self.rows:
            raise SingularMatrixError(f"rank {rank} < {self.rows}")
        # rows are in pivot-column order already since every column got a pivot
        return BitMatrix(self.rows, self.cols, aug)

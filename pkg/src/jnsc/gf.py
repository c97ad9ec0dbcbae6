"""Binary extension fields GF(2^m), small dense matrices over them, and
their expansion to GF(2) block matrices.

Field elements are ints in [0, 2^m) encoding polynomial coefficients,
bit r holding the coefficient of x^r. A symbol maps to bits in that same
order, so bits(s @ M) = bits(s) @ binary_expand(M) under the row-vector
convention.
"""

from __future__ import annotations

import numpy as np

from .bitmatrix import BitMatrix
from .errors import SingularMatrixError, ValidationError

# lexicographically smallest irreducible polynomial per degree
MIN_IRREDUCIBLE = {
    1: 0x2, 2: 0x7, 3: 0xB, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x83, 8: 0x11B,
    9: 0x203, 10: 0x409, 11: 0x805, 12: 0x1009, 13: 0x201B, 14: 0x4021,
    15: 0x8003, 16: 0x1002B,
}

MAX_DEGREE = 16


def _poly_deg(p: int) -> int:
    return p.bit_length() - 1

def _poly_mod(a: int, b: int) -> int:
    db = _poly_deg(b)
    while a and _poly_deg(a) >= db:
        a ^= b << (_poly_deg(a) - db)
    return a

def _poly_mul_mod(a: int, b: int, poly: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> _poly_deg(poly):
            a ^= poly
    return out

def is_irreducible(poly: int) -> bool:
    """Exhaustive trial division by every polynomial of degree 1..deg/2."""
    m = _poly_deg(poly)
    if m < 1:
        return False
    for d in range(2, 1 << (m // 2 + 1)):
        if _poly_deg(d) >= 1 and _poly_mod(poly, d) == 0:
            return False
    return True


class GfField:
    """GF(2^m) with a fixed irreducible modulus, m <= 16."""

    __slots__ = ("m", "poly", "order", "_log", "_exp")

    def __init__(self, m: int, poly: int | None = None):
        if not 1 <= m <= MAX_DEGREE:
            raise ValidationError(f"extension degree must be in 1..{MAX_DEGREE}, got {m}")
        if poly is None:
            poly = MIN_IRREDUCIBLE[m]
        if _poly_deg(poly) != m:
            raise ValidationError(f"modulus degree {_poly_deg(poly)} does not match m={m}")
        if not is_irreducible(poly):
            raise ValidationError(f"modulus {poly:#x} is reducible")
        self.m = m
        self.poly = poly
        self.order = 1 << m
        self._log, self._exp = self._build_tables()

    def _build_tables(self):
        q = self.order
        if q == 2:
            log = np.array([0, 0], dtype=np.int64)
            exp = np.array([1, 1], dtype=np.int64)
            return log, exp
        # find a multiplicative generator by direct order check
        for g in range(2, q):
            seen = 1
            a = g
            while a != 1:
                a = _poly_mul_mod(a, g, self.poly)
                seen += 1
            if seen == q - 1:
                break
        else:
            raise ValidationError("no generator found; modulus is not irreducible")
        log = np.zeros(q, dtype=np.int64)
        exp = np.zeros(2 * (q - 1), dtype=np.int64)
        a = 1
        for i in range(q - 1):
            exp[i] = a
            exp[i + q - 1] = a
            log[a] = i
            a = _poly_mul_mod(a, g, self.poly)
        return log, exp

    def check(self, a):
        """Validate that a scalar or array holds field elements; returns it."""
        arr = np.asarray(a)
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise ValidationError(f"value outside GF(2^{self.m})")
        return a

    def mul(self, a, b):
        """Field product of scalars or arrays, numpy broadcasting rules."""
        aa = np.asarray(a, dtype=np.int64)
        bb = np.asarray(b, dtype=np.int64)
        if aa.ndim == 0 and bb.ndim == 0:
            if aa == 0 or bb == 0:
                return 0
            return int(self._exp[self._log[aa] + self._log[bb]])
        av, bv = np.broadcast_arrays(aa, bb)
        out = np.zeros(av.shape, dtype=np.int64)
        nz = (av != 0) & (bv != 0)
        out[nz] = self._exp[self._log[av[nz]] + self._log[bv[nz]]]
        return out

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return int(self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)])

    def mul_vec(self, a: int, v: np.ndarray) -> np.ndarray:
        """Scalar times vector of field elements."""
        if a == 0:
            return np.zeros_like(v)
        out = np.zeros_like(v)
        nz = v != 0
        out[nz] = self._exp[self._log[a] + self._log[v[nz]]]
        return out

    def __eq__(self, other):
        return (isinstance(other, GfField)
                and self.m == other.m and self.poly == other.poly)

    __hash__ = None

    def __repr__(self):
        return f"GfField(m={self.m}, poly={self.poly:#x})"


class GfMatrix:
    """Dense matrix over a GfField, entries stored as int64 codes."""

    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field: GfField, entries):
        entries = np.atleast_2d(np.asarray(entries, dtype=np.int64))
        if entries.size and (entries.min() < 0 or entries.max() >= field.order):
            raise ValidationError("entry out of field range")
        self.field = field
        self.rows, self.cols = entries.shape
        self.entries = entries

    @classmethod
    def zeros(cls, field: GfField, rows: int, cols: int) -> "GfMatrix":
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, field: GfField, n: int) -> "GfMatrix":
        return cls(field, np.eye(n, dtype=np.int64))

    @classmethod
    def random(cls, field: GfField, rows: int, cols: int,
               rng: np.random.Generator) -> "GfMatrix":
        return cls(field, rng.integers(0, field.order, size=(rows, cols), dtype=np.int64))

    def copy(self) -> "GfMatrix":
        return GfMatrix(self.field, self.entries.copy())

    def __eq__(self, other):
        if not isinstance(other, GfMatrix):
            return NotImplemented
        return (self.field == other.field
                and bool(np.array_equal(self.entries, other.entries)))

    __hash__ = None

    def __repr__(self):
        return f"GfMatrix({self.rows}x{self.cols} over GF(2^{self.field.m}))"

    def __matmul__(self, other: "GfMatrix") -> "GfMatrix":
        if not isinstance(other, GfMatrix):
            return NotImplemented
        if self.field != other.field or self.cols != other.rows:
            raise ValidationError("matrix product mismatch")
        f = self.field
        out = np.zeros((self.rows, other.cols), dtype=np.int64)
        for i in range(self.rows):
            for k in range(self.cols):
                a = int(self.entries[i, k])
                if a:
                    out[i] ^= f.mul_vec(a, other.entries[k])
        return GfMatrix(f, out)

    def vecmat(self, s: np.ndarray) -> np.ndarray:
        """Row-vector product s @ self over the field."""
        s = np.asarray(s, dtype=np.int64)
        if s.shape != (self.rows,):
            raise ValidationError("vector length does not match row count")
        f = self.field
        out = np.zeros(self.cols, dtype=np.int64)
        for i in range(self.rows):
            if s[i]:
                out ^= f.mul_vec(int(s[i]), self.entries[i])
        return out

    def _echelon_pivot_cols(self) -> list[int]:
        f = self.field
        work = self.entries.copy()
        pivots = []
        r = 0
        for c in range(self.cols):
            if r == self.rows:
                break
            nz = np.nonzero(work[r:, c])[0]
            if nz.size == 0:
                continue
            p = r + int(nz[0])
            if p != r:
                work[[r, p]] = work[[p, r]]
            work[r] = f.mul_vec(f.inv(int(work[r, c])), work[r])
            for i in range(self.rows):
                if i != r and work[i, c]:
                    work[i] ^= f.mul_vec(int(work[i, c]), work[r])
            pivots.append(c)
            r += 1
        return pivots

    def rank(self) -> int:
        return len(self._echelon_pivot_cols())

    def independent_columns(self) -> list[int]:
        """Greedy left-to-right maximal independent column set."""
        return self._echelon_pivot_cols()

    def select_columns(self, idx) -> "GfMatrix":
        return GfMatrix(self.field, self.entries[:, np.asarray(idx, dtype=np.int64)])


def binary_expand(mat: GfMatrix) -> BitMatrix:
    """Replace each entry a by its m x m multiplication matrix over GF(2).

    Block row r within an entry holds the bits of x^r * a mod the field
    modulus, so bits(s @ M) = bits(s) @ binary_expand(M) and the rank is
    multiplied by m exactly.
    """
    f = mat.field
    m = f.m
    dense = np.zeros((mat.rows * m, mat.cols * m), dtype=np.uint8)
    for i in range(mat.rows):
        for j in range(mat.cols):
            a = int(mat.entries[i, j])
            if not a:
                continue
            for r in range(m):
                prod = f.mul(a, 1 << r)
                for c in range(m):
                    dense[i * m + r, j * m + c] = (prod >> c) & 1
    return BitMatrix.from_dense(dense)


def bits_to_symbols(bits: np.ndarray, m: int) -> np.ndarray:
    """Group bits little-endian into field element codes, m bits each."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size % m:
        raise ValidationError("bit length is not a multiple of the symbol size")
    groups = bits.reshape(-1, m)
    return (groups << np.arange(m, dtype=np.int64)).sum(axis=1)

def symbols_to_bits(symbols: np.ndarray, m: int) -> np.ndarray:
    symbols = np.asarray(symbols, dtype=np.int64)
    out = np.zeros((symbols.size, m), dtype=np.uint8)
    for r in range(m):
        out[:, r] = (symbols >> r) & 1
    return out.reshape(-1)

"""Randomized rate-distortion encoding with a linear codebook.

A blocklength-n code is the column span of an n x nR generator matrix.
Encoding a word b picks a random maximal independent row set I of the
generator, solves the restricted system exactly so the codeword agrees
with b on I, and keeps the disagreement elsewhere as distortion. Repeated
draws keep the best codeword; a doubling enumerator provides the exact
nearest codeword for small dimensions.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import residual_solve, residual_trials
from .bitmatrix import BitMatrix, unpack_rows
from .errors import RankDeficientError, TooLargeError, ValidationError
from .sparsify import RngLike, _as_seed, _pack_vector, _packed_columns

NEAREST_MAX_DIM = 20


@dataclass(frozen=True)
class LinearCode:
    """Linear code given by the column span of a full-column-rank generator."""

    generator: BitMatrix

    def __post_init__(self):
        if self.generator.rank() < self.generator.cols:
            raise RankDeficientError(
                f"generator must have full column rank {self.generator.cols}")

    @property
    def n(self) -> int:
        return self.generator.rows

    @property
    def dim(self) -> int:
        return self.generator.cols

    @property
    def rate(self) -> float:
        return self.generator.cols / self.generator.rows

    @classmethod
    def random(cls, n: int, dim: int, rng: RngLike, max_attempts: int = 100) -> "LinearCode":
        """Uniform random generator matrix, resampled until full column rank."""
        if not 0 < dim <= n:
            raise ValidationError(f"need 0 < dim <= n, got dim={dim} n={n}")
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(_as_seed(rng))
        for _ in range(max_attempts):
            cand = BitMatrix.random(n, dim, gen)
            if cand.rank() == dim:
                return cls(cand)
        raise RankDeficientError(
            f"no full-rank {n}x{dim} generator in {max_attempts} draws")


class EncodeResult(NamedTuple):
    codeword: np.ndarray
    coeffs: np.ndarray
    distortion: int


def _coerce_word(b, n: int) -> np.ndarray:
    b = np.asarray(b, dtype=np.uint8).reshape(-1)
    if b.size != n:
        raise ValidationError(f"word has {b.size} bits, expected {n}")
    return b


def _sequential_perms(gen: np.random.Generator, draws: int, n: int) -> np.ndarray:
    # one permutation per draw, generated in order so draw prefixes nest
    perms = np.empty((draws, n), dtype=np.int64)
    for t in range(draws):
        perms[t] = gen.permutation(n)
    return perms


def rd_encode_multi(code: LinearCode, b, draws: int, rng: RngLike) -> EncodeResult:
    """Best-of-`draws` randomized encodings of b; earliest draw wins ties."""
    if draws < 1:
        raise ValidationError(f"draws must be >= 1, got {draws}")
    n = code.n
    b = _coerce_word(b, n)
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(_as_seed(rng))
    cols = _packed_columns(code.generator)
    target = _pack_vector(b)
    perms = _sequential_perms(gen, draws, n)
    _, best_trial = residual_trials(cols, target, perms, n)
    coeffs_packed, residual_packed, weight = residual_solve(
        cols, target, perms[best_trial], n)
    coeffs = unpack_rows(coeffs_packed.reshape(1, -1), code.dim)[0]
    residual = unpack_rows(residual_packed.reshape(1, -1), n)[0]
    return EncodeResult(codeword=b ^ residual, coeffs=coeffs, distortion=int(weight))


def rd_encode(code: LinearCode, b, rng: RngLike) -> EncodeResult:
    """One randomized encoding pass.

    Solves the generator restricted to a random maximal independent row
    set, so the codeword matches b exactly there and distortion is at
    most n - dim.
    """
    return rd_encode_multi(code, b, 1, rng)


def nearest_codeword_exhaustive(code: LinearCode, b) -> EncodeResult:
    """Exact minimum-distortion codeword by enumerating all 2^dim of them.

    Ties go to the smallest coefficient vector read as a little-endian
    integer. Capped at dim <= NEAREST_MAX_DIM.
    """
    if code.dim > NEAREST_MAX_DIM:
        raise TooLargeError(
            f"exhaustive search needs dim <= {NEAREST_MAX_DIM}, got {code.dim}")
    n = code.n
    b = _coerce_word(b, n)
    cols = _packed_columns(code.generator)
    residuals = np.empty((1 << code.dim, cols.shape[1]), dtype=np.uint64)
    residuals[0] = _pack_vector(b)
    size = 1
    for i in range(code.dim):
        np.bitwise_xor(residuals[:size], cols[i], out=residuals[size:2 * size])
        size *= 2
    weights = np.bitwise_count(residuals).sum(axis=1)
    best = int(np.argmin(weights))  # first minimum = smallest coefficient mask
    coeffs = np.zeros(code.dim, dtype=np.uint8)
    for i in range(code.dim):
        coeffs[i] = (best >> i) & 1
    residual = unpack_rows(residuals[best].reshape(1, -1), n)[0]
    return EncodeResult(codeword=b ^ residual, coeffs=coeffs,
                        distortion=int(weights[best]))

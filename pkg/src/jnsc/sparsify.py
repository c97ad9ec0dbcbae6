"""GF(2) matrix sparsification by randomized column replacement.

The core routine sweeps the columns of a full-column-rank matrix A and
tries to replace each column a_j by a_j xor A_{-j} x for a combination x
found by randomized least-unsatisfied search: shuffle the rows, greedily
collect a maximal independent row set, solve exactly on those rows, and
keep the sparsest residual seen. Replacements are unit-diagonal column
operations, so the accumulated transform P stays invertible and A @ P
tracks the working matrix bit for bit.

Also provides the binary rate-distortion quantities (entropy, distortion
rate curve, the finite-length achievability margin) used to calibrate how
far a given density sits from the information-theoretic floor.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ._kernels import residual_solve, residual_trials
from .bitmatrix import BitMatrix, pack_rows, unpack_rows
from .errors import RankDeficientError, TooLargeError, ValidationError

RngLike = Union[int, np.integer, np.random.Generator]

EXHAUSTIVE_MAX_COLS = 16


def binary_entropy(p: float) -> float:
    """Base-2 entropy of a Bernoulli(p) bit, with h(0) = h(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def distortion_rate(rate: float) -> float:
    """Distortion floor for a uniform binary source compressed to `rate`.

    Inverts rate = 1 - h(d) for d in [0, 1/2] by bisection to 1e-12.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValidationError(f"rate must lie in [0, 1], got {rate}")
    if rate == 1.0:
        return 0.0
    if rate == 0.0:
        return 0.5
    target = 1.0 - rate
    lo, hi = 0.0, 0.5
    # h is increasing on [0, 1/2]; keep h(lo) <= target <= h(hi)
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def density_achievable(n: int, k: int, distortion: float) -> bool:
    """Whether n - k parity columns can reach `distortion` at blocklength n.

    Evaluates (n - k)/n >= 1 - h(distortion) + 2*log2(n)/n + 1/n, the
    finite-length margin over the asymptotic rate-distortion condition.
    """
    if n <= 0 or k < 0 or k > n:
        raise ValidationError(f"need 0 <= k <= n with n > 0, got n={n} k={k}")
    if not 0.0 <= distortion <= 0.5:
        raise ValidationError(f"distortion must lie in [0, 1/2], got {distortion}")
    rhs = 1.0 - binary_entropy(distortion) + 2.0 * math.log2(n) / n + 1.0 / n
    return (n - k) / n >= rhs


@dataclass(frozen=True)
class RatePoint:
    """A point on the binary distortion-rate curve."""

    rate: float
    distortion: float

    @classmethod
    def at_rate(cls, rate: float) -> "RatePoint":
        return cls(rate, distortion_rate(rate))


@dataclass
class SparsifyResult:
    """Outcome of a sparsification run.

    transform is the invertible column-operation product P, sparsified the
    working matrix A @ P, density = nnz(sparsified) / (rows * cols).
    pass_densities records the density after each full sweep.
    """

    transform: BitMatrix
    sparsified: BitMatrix
    density: float
    trials_used: int
    seed: Optional[int]
    pass_densities: list = field(default_factory=list)


def _as_seed(rng: RngLike) -> int:
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**63 - 1))
    raise ValidationError(f"rng must be an int seed or numpy Generator, got {type(rng)!r}")


def _packed_columns(mat: BitMatrix) -> np.ndarray:
    # (cols, words-per-column) layout expected by the compiled kernels
    return mat.transpose().words.copy()


def _columns_to_matrix(cols: np.ndarray, nrows: int) -> BitMatrix:
    dense = unpack_rows(cols, nrows)
    return BitMatrix.from_dense(dense.T)


def _pack_vector(bits: np.ndarray) -> np.ndarray:
    return pack_rows(np.asarray(bits, dtype=np.uint8).reshape(1, -1))[0]


def _trial_perms(rng: np.random.Generator, trials: int, n: int) -> np.ndarray:
    base = np.tile(np.arange(n, dtype=np.int64), (trials, 1))
    return rng.permuted(base, axis=1)


def min_unsatisfy_randomized(A: BitMatrix, b, trials: int,
                             rng: RngLike) -> tuple[np.ndarray, int]:
    """Sparse approximate solve: minimize the weight of A x xor b over x.

    Runs `trials` randomized exact solves on greedy independent row sets
    and returns the best (x, residual_weight) seen. The all-zero x is
    always a candidate, so residual_weight <= nnz(b); ties keep x = 0 or
    the earliest winning trial.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    b = np.asarray(b, dtype=np.uint8).reshape(-1)
    if b.size != A.rows:
        raise ValidationError(f"b has {b.size} entries, expected {A.rows}")
    zero_weight = int(b.sum())
    if A.cols == 0 or zero_weight == 0:
        return np.zeros(A.cols, dtype=np.uint8), zero_weight
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(_as_seed(rng))
    cols = _packed_columns(A)
    target = _pack_vector(b)
    perms = _trial_perms(gen, trials, A.rows)
    best_weight, best_trial = residual_trials(cols, target, perms, A.rows)
    if best_weight >= zero_weight:
        return np.zeros(A.cols, dtype=np.uint8), zero_weight
    coeffs, _, weight = residual_solve(cols, target, perms[best_trial], A.rows)
    x = unpack_rows(coeffs.reshape(1, -1), A.cols)[0]
    return x, int(weight)


def _column_weights(cols: np.ndarray) -> np.ndarray:
    return np.bitwise_count(cols).sum(axis=1).astype(np.int64)


def _apply_combination(pcols: np.ndarray, j: int, picks: np.ndarray) -> None:
    # column op: P_j += sum of the picked transform columns (indices skip j)
    for s in np.flatnonzero(picks):
        src = s if s < j else s + 1
        pcols[j] ^= pcols[src]


def sparsify(A: BitMatrix, trials_per_column: int, passes: int, rng: RngLike,
             trace: Optional[list] = None) -> SparsifyResult:
    """Iterated randomized column sparsification.

    Sweeps the columns `passes` times; column j is replaced when some
    trial finds a strictly lighter a_j xor A_{-j} x. The RNG stream for
    (sweep, column) is derived from the master seed alone, so results are
    reproducible for a given (seed, trials_per_column, passes) regardless
    of execution order. When `trace` is a list, one row
    (sweep, column, weight_before, weight_after, cumulative_density) is
    appended per column visit; indices are zero-based.
    """
    if trials_per_column < 1:
        raise ValidationError(f"trials_per_column must be >= 1, got {trials_per_column}")
    if passes < 1:
        raise ValidationError(f"passes must be >= 1, got {passes}")
    n, K = A.rows, A.cols
    if A.rank() < K:
        raise RankDeficientError(f"matrix rank below column count {K}")
    seed = _as_seed(rng)
    cols = _packed_columns(A)
    weights = _column_weights(cols)
    pcols = _packed_columns(BitMatrix.identity(K))
    trials_used = 0
    pass_densities = []
    cells = float(n * K)
    for sweep in range(passes):
        for j in range(K):
            stream = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(sweep, j)))
            perms = _trial_perms(stream, trials_per_column, n)
            others = np.delete(cols, j, axis=0)
            before = int(weights[j])
            best_weight, best_trial = residual_trials(others, cols[j], perms, n)
            trials_used += trials_per_column
            if best_weight < before:
                coeffs, residual, new_weight = residual_solve(
                    others, cols[j], perms[best_trial], n)
                picks = unpack_rows(coeffs.reshape(1, -1), K - 1)[0]
                cols[j] = residual
                weights[j] = new_weight
                _apply_combination(pcols, j, picks)
            if trace is not None:
                trace.append((sweep, j, before, int(weights[j]),
                              float(weights.sum()) / cells))
        pass_densities.append(float(weights.sum()) / cells)
    transform = _columns_to_matrix(pcols, K)
    sparsified = _columns_to_matrix(cols, n)
    assert transform.rank() == K  # unit-diagonal column ops cannot lose rank
    return SparsifyResult(transform=transform, sparsified=sparsified,
                          density=pass_densities[-1], trials_used=trials_used,
                          seed=seed, pass_densities=pass_densities)


def _span_residuals(others: np.ndarray, target: np.ndarray) -> np.ndarray:
    """All 2^K residuals target xor (combination of others), doubling trick.

    Row index x, read as a little-endian bit mask over the rows of
    `others`, gives the residual for that combination.
    """
    K, W = others.shape
    out = np.empty((1 << K, W), dtype=np.uint64)
    out[0] = target
    size = 1
    for i in range(K):
        np.bitwise_xor(out[:size], others[i], out=out[size:2 * size])
        size *= 2
    return out


def sparsify_exhaustive(A: BitMatrix) -> SparsifyResult:
    """Exact per-column sparsification, swept until no column improves.

    Each column's best replacement is found by enumerating all 2^(K-1)
    combinations of the other columns, so K = cols is capped at
    EXHAUSTIVE_MAX_COLS. Ties prefer the incumbent column, then the
    smallest combination mask.
    """
    n, K = A.rows, A.cols
    if K > EXHAUSTIVE_MAX_COLS:
        raise TooLargeError(
            f"exhaustive search needs cols <= {EXHAUSTIVE_MAX_COLS}, got {K}")
    if A.rank() < K:
        raise RankDeficientError(f"matrix rank below column count {K}")
    cols = _packed_columns(A)
    weights = _column_weights(cols)
    pcols = _packed_columns(BitMatrix.identity(K))
    trials_used = 0
    pass_densities = []
    cells = float(n * K)
    changed = True
    while changed:
        changed = False
        for j in range(K):
            others = np.delete(cols, j, axis=0)
            residuals = _span_residuals(others, cols[j])
            trials_used += residuals.shape[0]
            rw = np.bitwise_count(residuals).sum(axis=1)
            best = int(np.argmin(rw))  # first minimum = smallest mask
            if best != 0 and int(rw[best]) < int(weights[j]):
                picks = np.zeros(K - 1, dtype=np.uint8)
                for i in range(K - 1):
                    picks[i] = (best >> i) & 1
                cols[j] = residuals[best]
                weights[j] = int(rw[best])
                _apply_combination(pcols, j, picks)
                changed = True
        pass_densities.append(float(weights.sum()) / cells)
    transform = _columns_to_matrix(pcols, K)
    sparsified = _columns_to_matrix(cols, n)
    assert transform.rank() == K
    return SparsifyResult(transform=transform, sparsified=sparsified,
                          density=pass_densities[-1], trials_used=trials_used,
                          seed=None, pass_densities=pass_densities)


def gauss_baseline(A: BitMatrix) -> SparsifyResult:
    """Column-reduce A so one row per column carries a lone pivot 1.

    Jordan-style elimination by column operations only: the pivot rows
    form the identity pattern and the other rows keep whatever the
    elimination leaves behind.
    """
    n, K = A.rows, A.cols
    cols = _packed_columns(A)
    pcols = _packed_columns(BitMatrix.identity(K))
    used = np.zeros(n, dtype=bool)
    one = np.uint64(1)
    for j in range(K):
        pivot = -1
        for r in range(n):
            if not used[r] and (cols[j, r >> 6] >> np.uint64(r & 63)) & one:
                pivot = r
                break
        if pivot < 0:
            raise RankDeficientError(f"matrix rank below column count {K}")
        used[pivot] = True
        hi, sh = pivot >> 6, np.uint64(pivot & 63)
        hit = ((cols[:, hi] >> sh) & one).astype(bool)
        hit[j] = False
        cols[hit] ^= cols[j]
        pcols[hit] ^= pcols[j]
    transform = _columns_to_matrix(pcols, K)
    sparsified = _columns_to_matrix(cols, n)
    density = float(np.bitwise_count(cols).sum()) / float(n * K)
    return SparsifyResult(transform=transform, sparsified=sparsified,
                          density=density, trials_used=0, seed=None,
                          pass_densities=[density])


def independent_column_transform(A: BitMatrix, rng: RngLike) -> BitMatrix:
    """Unit-diagonal transform with per-column combinations chosen independently.

    Every column j gets the combination from a single randomized solve
    against the original matrix (no sequencing of earlier replacements),
    embedded as column j = e_j + x. The result is not guaranteed
    invertible; callers check its rank.
    """
    n, K = A.rows, A.cols
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(_as_seed(rng))
    cols = _packed_columns(A)
    pdense = np.eye(K, dtype=np.uint8)
    for j in range(K):
        others = np.delete(cols, j, axis=0)
        perm = gen.permutation(n).astype(np.int64)
        coeffs, _, _ = residual_solve(others, cols[j], perm, n)
        picks = unpack_rows(coeffs.reshape(1, -1), K - 1)[0]
        for s in np.flatnonzero(picks):
            src = s if s < j else s + 1
            pdense[src, j] ^= 1
    return BitMatrix.from_dense(pdense)

"""Syndrome source coding with side information, and joint network designs.

A length-n source word x is compressed to the syndrome x @ H for a tall
parity-check matrix H (columns are checks). A terminal holding side
information y = x xor e recovers e from its syndrome by belief
propagation and outputs x_hat = y xor e_hat. The joint designer builds a
broadcast network code, replicates each terminal's transfer matrix across
enough network uses, and sparsifies H times that transfer so every
terminal decodes against its own parity-check matrix of near-minimal
density.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._kernels import bp_flood, flip_repair
from .bitmatrix import BitMatrix
from .errors import (InfeasibleRateError, RankDeficientError, TooLargeError,
                     ValidationError)
from .netcode import BroadcastCode, NetworkSpec, build_broadcast_code, maxflow, transfer_bits
from .sparsify import RngLike, _as_seed, distortion_rate, sparsify

BP_MAX_ITER_DEFAULT = 50


@dataclass(frozen=True)
class BscModel:
    """Binary symmetric channel tying the side information to the source."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise ValidationError(f"crossover must lie in [0, 1/2], got {self.p}")

    def conditional_entropy(self) -> float:
        """Bits of source uncertainty left given the side information."""
        from .sparsify import binary_entropy

        return binary_entropy(self.p)

    def sample_noise(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return (rng.random(n) < self.p).astype(np.uint8)


def sample_sparse_H(n: int, k: int, lam: float, rng: RngLike,
                    max_resamples: int = 100) -> BitMatrix:
    """n x (n-k) parity-check with i.i.d. Bernoulli(lam/n) entries.

    Resamples until the columns are independent; persistent rank failure
    means lam is too small for this blocklength.
    """
    if n < 1 or k < 0 or k >= n:
        raise ValidationError(f"need 0 <= k < n, got n={n} k={k}")
    if not 1.0 <= lam <= n / 2:
        raise ValidationError(f"lambda must lie in [1, n/2], got {lam}")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(_as_seed(rng))
    cols = n - k
    for _ in range(max_resamples):
        dense = (gen.random((n, cols)) < lam / n).astype(np.uint8)
        H = BitMatrix.from_dense(dense)
        if H.rank() == cols:
            return H
    raise RankDeficientError(
        f"no full-column-rank sample in {max_resamples} draws; lambda too small")


def structured_ldpc(n: int, rng: RngLike, swaps: int = 100_000) -> BitMatrix:
    """Regular parity-check from a replicated identity plus random swaps.

    Tiles I_{n/5} five block-rows by four block-cols, giving an
    n x (4n/5) matrix with every row weight 4 and every column weight 5,
    then applies `swaps` accepted 2x2 corner exchanges
    ((i1,j1),(i2,j2) -> (i1,j2),(i2,j1), both targets currently zero),
    which preserve all row and column weights.
    """
    if n % 5 or n < 5:
        raise ValidationError(f"blocklength must be a positive multiple of 5, got {n}")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(_as_seed(rng))
    z = n // 5
    dense = np.tile(np.eye(z, dtype=np.uint8), (5, 4))
    rows = np.repeat(np.arange(n, dtype=np.int64), 4)
    cols = np.empty(4 * n, dtype=np.int64)
    pos = 0
    for i in range(n):
        cols[pos:pos + 4] = np.flatnonzero(dense[i])
        pos += 4
    accepted = 0
    while accepted < swaps:
        batch = gen.integers(0, rows.size, size=(4096, 2))
        for a, b in batch:
            i1, j1 = rows[a], cols[a]
            i2, j2 = rows[b], cols[b]
            if i1 == i2 or j1 == j2 or dense[i1, j2] or dense[i2, j1]:
                continue
            dense[i1, j1] = dense[i2, j2] = 0
            dense[i1, j2] = dense[i2, j1] = 1
            cols[a], cols[b] = j2, j1
            accepted += 1
            if accepted == swaps:
                break
    return BitMatrix.from_dense(dense)


def count_four_cycles(H: BitMatrix) -> int:
    """Number of length-4 cycles in the Tanner graph (diagnostic only)."""
    dense = H.to_dense().astype(np.int64)
    gram = dense.T @ dense
    over = np.triu(gram, k=1)
    return int((over * (over - 1) // 2).sum())


def entry_zero_prob(lam: float, l: int, n: int) -> float:
    """Chance a parity of l i.i.d. Bernoulli(lam/n) bits comes out zero."""
    if not 0 <= l <= n:
        raise ValidationError(f"need 0 <= l <= n, got l={l} n={n}")
    if not 0.0 <= lam <= n:
        raise ValidationError(f"lambda must lie in [0, n], got {lam}")
    return 0.5 * (1.0 + (1.0 - 2.0 * lam / n) ** l)


def syndrome_encode(H: BitMatrix, x) -> np.ndarray:
    """Row-vector syndrome x @ H; columns of H are the checks."""
    x = np.asarray(x, dtype=np.uint8).reshape(-1)
    if x.size != H.rows:
        raise ValidationError(f"word has {x.size} bits, expected {H.rows}")
    return H.vecmat(x)


class _TannerGraph:
    """Check-major and variable-major edge views of a parity-check matrix."""

    __slots__ = ("n", "r", "var_of_edge", "check_ptr", "edges_by_var",
                 "var_ptr", "checks_by_var")

    def __init__(self, H: BitMatrix):
        dense = H.to_dense()
        self.n, self.r = H.rows, H.cols
        per_check = [np.flatnonzero(dense[:, c]) for c in range(self.r)]
        degs = np.array([len(v) for v in per_check], dtype=np.int64)
        self.var_of_edge = (np.concatenate(per_check) if per_check
                            else np.empty(0, dtype=np.int64)).astype(np.int64)
        self.check_ptr = np.concatenate(([0], np.cumsum(degs))).astype(np.int64)
        check_of_edge = np.repeat(np.arange(self.r, dtype=np.int64), degs)
        order = np.argsort(self.var_of_edge, kind="stable").astype(np.int64)
        self.edges_by_var = order
        counts = np.bincount(self.var_of_edge, minlength=self.n)
        self.var_ptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        self.checks_by_var = check_of_edge[order]


def _decode_graph(graph: _TannerGraph, syndrome: np.ndarray, p: float,
                  max_iter: int) -> tuple[np.ndarray, bool]:
    prior = math.log((1.0 - p) / p)
    e_hat, totals, converged, _ = bp_flood(
        graph.var_of_edge, graph.check_ptr, graph.edges_by_var,
        graph.var_ptr, syndrome, prior, max_iter, graph.n)
    if converged:
        return e_hat, True
    repaired, fixed = flip_repair(
        graph.var_of_edge, graph.check_ptr, graph.checks_by_var,
        graph.var_ptr, syndrome, e_hat, np.abs(totals))
    if fixed:
        return repaired, True
    return e_hat, False


def bp_decode(Hbar: BitMatrix, syndrome, p: float,
              max_iter: int = BP_MAX_ITER_DEFAULT) -> tuple[np.ndarray, bool]:
    """Recover an error pattern from its syndrome by belief propagation.

    Sum-product flooding on the Tanner graph (columns of Hbar are checks;
    a check with syndrome bit 1 wants odd parity), priors log((1-p)/p)
    toward zero, stopping as soon as the hard decisions reproduce the
    syndrome. If max_iter passes without that, a greedy least-reliable
    bit-flipping sweep tries to finish the job; `converged` reports
    whether the returned pattern reproduces the syndrome.
    """
    if not 0.0 < p < 0.5:
        raise ValidationError(f"crossover must lie in (0, 1/2), got {p}")
    if max_iter < 1:
        raise ValidationError(f"max_iter must be >= 1, got {max_iter}")
    syndrome = np.asarray(syndrome, dtype=np.uint8).reshape(-1)
    if syndrome.size != Hbar.cols:
        raise ValidationError(f"syndrome has {syndrome.size} bits, expected {Hbar.cols}")
    return _decode_graph(_TannerGraph(Hbar), syndrome, p, max_iter)


@dataclass
class BerResult:
    """Monte Carlo bit error tally for a syndrome decoding pipeline."""

    bit_errors: int
    bits: int
    ber: float
    blocks: int
    converged_blocks: int

    @property
    def converged_fraction(self) -> float:
        return self.converged_blocks / self.blocks if self.blocks else 0.0


def wyner_block(Hbar: BitMatrix, p: float, rng: np.random.Generator,
                max_iter: int = BP_MAX_ITER_DEFAULT,
                decoder: Optional[Callable] = None,
                graph: Optional[_TannerGraph] = None) -> tuple[int, bool]:
    """One compress-and-decode round; returns (bit_errors, converged).

    Draws x uniform and e ~ Bernoulli(p), forms the side information
    y = x xor e, hands the decoder the syndrome difference
    (x @ Hbar) xor (y @ Hbar) = e @ Hbar, and counts errors of
    x_hat = y xor e_hat against x.
    """
    n = Hbar.rows
    x = rng.integers(0, 2, size=n).astype(np.uint8)
    e = (rng.random(n) < p).astype(np.uint8)
    y = x ^ e
    syndrome = syndrome_encode(Hbar, x) ^ syndrome_encode(Hbar, y)
    if p == 0.0:
        e_hat, converged = np.zeros(n, dtype=np.uint8), True
    elif decoder is not None:
        e_hat, converged = decoder(Hbar, syndrome, p, max_iter)
    else:
        e_hat, converged = _decode_graph(graph or _TannerGraph(Hbar),
                                         syndrome, p, max_iter)
    x_hat = y ^ np.asarray(e_hat, dtype=np.uint8)
    return int((x_hat ^ x).sum()), converged


def wyner_pipeline(Hbar: BitMatrix, p: float, rng: RngLike, blocks: int,
                   max_iter: int = BP_MAX_ITER_DEFAULT,
                   decoder: Optional[Callable] = None) -> BerResult:
    """Monte Carlo BER of the side-information pipeline over many blocks.

    Each block gets its own RNG stream derived from the master seed, so
    the tally does not depend on scheduling.
    """
    if blocks < 1:
        raise ValidationError(f"blocks must be >= 1, got {blocks}")
    if not 0.0 <= p < 0.5:
        raise ValidationError(f"crossover must lie in [0, 1/2), got {p}")
    seed = _as_seed(rng)
    graph = None if decoder is not None else _TannerGraph(Hbar)
    errors = 0
    converged_blocks = 0
    for b in range(blocks):
        stream = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(b,)))
        block_errors, converged = wyner_block(
            Hbar, p, stream, max_iter=max_iter, decoder=decoder, graph=graph)
        errors += block_errors
        converged_blocks += converged
    bits = blocks * Hbar.rows
    return BerResult(bit_errors=errors, bits=bits, ber=errors / bits,
                     blocks=blocks, converged_blocks=converged_blocks)


@dataclass
class TerminalDesign:
    """Per-terminal pieces of a joint design.

    network_transfer is the block-replicated transfer matrix trimmed to
    the terminal's syndrome demand, post_transform the invertible matrix
    the terminal applies after the network, and parity_check their
    product with the source check (the matrix the terminal decodes
    against). density_floor is the rate-distortion bound the measured
    density must respect; rate_gap_density_target is the asymptotic
    density target for this terminal's rate gap, reported only.
    """

    terminal: int
    rate: float
    network_transfer: BitMatrix
    post_transform: BitMatrix
    parity_check: BitMatrix
    density: float
    density_floor: float
    rate_gap_density_target: float


@dataclass
class JointCodeDesign:
    """A source check, a broadcast code, and per-terminal decoders."""

    n: int
    syndrome_bits: int
    uses: int
    lambda_value: float
    source_check: BitMatrix
    code: BroadcastCode
    terminals: dict


def _replicated_transfer(block: BitMatrix, uses: int, keep_cols: int) -> BitMatrix:
    """Block-diagonal replication of a transfer matrix, first keep_cols columns."""
    rows, cols = block.rows, block.cols
    dense = np.zeros((rows * uses, keep_cols), dtype=np.uint8)
    src = block.to_dense()
    for u in range(uses):
        c0 = u * cols
        if c0 >= keep_cols:
            break
        width = min(cols, keep_cols - c0)
        dense[u * rows:(u + 1) * rows, c0:c0 + width] = src[:, :width]
    return BitMatrix.from_dense(dense)


def _to_int(value: float, what: str) -> int:
    rounded = round(value)
    if abs(value - rounded) > 1e-9:
        raise ValidationError(f"{what} must be an integer, got {value}")
    return int(rounded)


def design_joint_code(net: NetworkSpec, m: int, lambda_policy, n: int,
                      rates: dict, sparsify_budget: tuple, rng: RngLike,
                      max_attempts: int = 32) -> JointCodeDesign:
    """Build the end-to-end joint network and source coding design.

    The source emits n bits; terminal t demands a rate-R_t syndrome
    (n*R_t bits). The source computes the full syndrome against H (n by
    n*max(R)), ships it over ceil-free n*max(R)/(w*m) network uses, and
    each terminal multiplies its received bits by an invertible
    post_transform found by sparsifying H times its replicated transfer
    matrix. lambda_policy picks H's Bernoulli intensity: 'uniform' for
    lam = n/2, a number for that lam, or 'auto' to use a logarithmic lam
    when every transfer column is light (weight at most sqrt(syndrome
    bits)). sparsify_budget is (trials_per_column, passes).
    """
    if n < 2:
        raise ValidationError(f"blocklength must be >= 2, got {n}")
    if set(rates) != set(net.terminals):
        raise ValidationError("rates must cover exactly the network terminals")
    for t, r in rates.items():
        if not 0.0 < r <= 1.0:
            raise ValidationError(f"rate for terminal {t} must lie in (0, 1], got {r}")
    trials_per_column, passes = sparsify_budget
    seed = _as_seed(rng)
    max_rate = max(rates.values())
    nu = _to_int(n * max_rate, "n * max rate")
    demands = {t: _to_int(n * r, f"n * rate[{t}]") for t, r in rates.items()}
    flows = {t: maxflow(net, t) for t in net.terminals}
    w = max(flows.values())
    if nu % (w * m):
        raise ValidationError(
            f"syndrome bits {nu} must divide into uses of w*m = {w * m} bits")
    uses = nu // (w * m)
    code = build_broadcast_code(
        net, w, m,
        np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,))),
        max_attempts=max_attempts)
    for t in net.terminals:
        received = uses * m * min(w, flows[t])
        if received < demands[t]:
            raise InfeasibleRateError(
                f"terminal {t} receives {received} bits per block but "
                f"needs {demands[t]}")
    lam = _resolve_lambda(lambda_policy, n, nu, code)
    H = sample_sparse_H(
        n, n - nu, lam,
        np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,))))
    terminals = {}
    for idx, t in enumerate(net.terminals):
        transfer = _replicated_transfer(code.transfer[t], uses, demands[t])
        product = H @ transfer
        result = sparsify(
            product, trials_per_column, passes,
            np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                         spawn_key=(2, idx))))
        rate_t = demands[t] / n
        floor_d = distortion_rate(rate_t)
        sigma = math.sqrt(floor_d * (1.0 - floor_d) / (n * demands[t]))
        floor = floor_d - 3.0 * sigma
        if result.density < floor:
            raise RuntimeError(
                f"terminal {t} density {result.density:.6f} beats the "
                f"rate-distortion floor {floor:.6f}; sparsifier is unsound")
        terminals[t] = TerminalDesign(
            terminal=t, rate=rate_t, network_transfer=transfer,
            post_transform=result.transform, parity_check=result.sparsified,
            density=result.density, density_floor=floor,
            rate_gap_density_target=distortion_rate(max_rate - rate_t))
    return JointCodeDesign(n=n, syndrome_bits=nu, uses=uses, lambda_value=lam,
                           source_check=H, code=code, terminals=terminals)


def _resolve_lambda(policy, n: int, nu: int, code: BroadcastCode) -> float:
    if isinstance(policy, (int, float)) and not isinstance(policy, bool):
        return float(policy)
    if policy == "uniform":
        return n / 2
    if policy == "auto":
        heaviest = max(int(code.transfer[t].col_weights().max())
                       for t in code.transfer)
        if heaviest <= math.sqrt(nu):
            return min(n / 2, max(1.0, 2.0 * math.log(nu)))
        return n / 2
    raise ValidationError(
        f"lambda_policy must be 'uniform', 'auto', or a number, got {policy!r}")


def network_syndrome(design: JointCodeDesign, t, x) -> np.ndarray:
    """Terminal t's post-processed syndrome, computed through the network.

    Encodes x against the source check, ships the syndrome in w*m-bit
    chunks across the network uses, keeps the terminal's first
    rate-demand bits, and applies its post_transform. Bit-identical to
    encoding x directly against the terminal's parity_check.
    """
    if t not in design.terminals:
        raise ValidationError(f"unknown terminal {t}")
    td = design.terminals[t]
    full = syndrome_encode(design.source_check, x)
    wm = design.code.w * design.code.m
    pieces = [transfer_bits(design.code, t, full[u * wm:(u + 1) * wm])
              for u in range(design.uses)]
    kept = np.concatenate(pieces)[:td.network_transfer.cols]
    return td.post_transform.vecmat(kept)

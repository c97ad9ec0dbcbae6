import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jnsc.bitmatrix import BitMatrix
from jnsc.errors import RankDeficientError, TooLargeError, ValidationError
from jnsc.rdcodec import LinearCode
from jnsc.sparsify import (RatePoint, binary_entropy, density_achievable,
                           distortion_rate, gauss_baseline,
                           independent_column_transform,
                           min_unsatisfy_randomized, sparsify,
                           sparsify_exhaustive)

# distortion floors at the rates exercised across the suite, from the
# 1 - h(D) = R bisection frozen to 1e-9
D_HALF = 0.110027864438
D_08 = 0.031124460305
D_09 = 0.012986862056
D_10_24 = 0.139654526957


def full_rank(n, cols, seed):
    return LinearCode.random(n, cols, np.random.default_rng(seed)).generator


def brute_min_unsatisfy(A, b):
    dense = A.to_dense().astype(np.uint8)
    best = int(b.sum())
    for r in range(1, A.cols + 1):
        for combo in itertools.combinations(range(A.cols), r):
            resid = b.copy()
            for c in combo:
                resid ^= dense[:, c]
            best = min(best, int(resid.sum()))
    return best


def test_binary_entropy_edges_and_symmetry():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.11) == pytest.approx(binary_entropy(0.89))
    with pytest.raises(ValidationError):
        binary_entropy(-0.1)
    with pytest.raises(ValidationError):
        binary_entropy(1.1)


def test_distortion_rate_frozen_values():
    assert distortion_rate(0.5) == pytest.approx(D_HALF, abs=1e-9)
    assert distortion_rate(0.8) == pytest.approx(D_08, abs=1e-9)
    assert distortion_rate(0.9) == pytest.approx(D_09, abs=1e-9)
    assert distortion_rate(10 / 24) == pytest.approx(D_10_24, abs=1e-9)
    assert distortion_rate(0.0) == 0.5
    assert distortion_rate(1.0) == 0.0


def test_distortion_rate_inverts_entropy():
    for rate in (0.05, 0.3, 0.6, 0.95):
        d = distortion_rate(rate)
        assert 1.0 - binary_entropy(d) == pytest.approx(rate, abs=1e-9)
    with pytest.raises(ValidationError):
        distortion_rate(1.5)


def test_rate_point_and_density_achievable():
    pt = RatePoint.at_rate(0.8)
    assert pt.distortion == pytest.approx(D_08, abs=1e-9)
    # at (300, 60): (n-k)/n = 0.8 >= 1 - h(D) + margin only for large D
    assert density_achievable(300, 60, 0.09)
    assert not density_achievable(300, 60, 0.01)
    with pytest.raises(ValidationError):
        density_achievable(0, 0, 0.1)
    with pytest.raises(ValidationError):
        density_achievable(10, 2, 0.7)


def test_min_unsatisfy_self_consistent_and_bounded():
    rng = np.random.default_rng(0)
    for seed in range(15):
        A = full_rank(14, 5, seed)
        b = rng.integers(0, 2, size=14).astype(np.uint8)
        x, weight = min_unsatisfy_randomized(A, b, 40, seed)
        resid = (A.to_dense().astype(int) @ x + b) % 2
        assert int(resid.sum()) == weight
        assert weight <= int(b.sum())
        assert weight >= brute_min_unsatisfy(A, b)


def test_min_unsatisfy_exact_fit_when_in_span():
    rng = np.random.default_rng(1)
    A = full_rank(16, 6, 3)
    x_true = rng.integers(0, 2, size=6).astype(np.uint8)
    b = (A.to_dense().astype(int) @ x_true % 2).astype(np.uint8)
    x, weight = min_unsatisfy_randomized(A, b, 1, 0)
    assert weight == 0
    assert np.array_equal(x, x_true)


def test_min_unsatisfy_zero_target_returns_zero():
    A = full_rank(10, 4, 5)
    x, weight = min_unsatisfy_randomized(A, np.zeros(10, dtype=np.uint8), 5, 2)
    assert weight == 0 and not x.any()


def test_min_unsatisfy_validation():
    A = full_rank(10, 4, 6)
    with pytest.raises(ValidationError):
        min_unsatisfy_randomized(A, np.zeros(10, dtype=np.uint8), 0, 1)
    with pytest.raises(ValidationError):
        min_unsatisfy_randomized(A, np.zeros(9, dtype=np.uint8), 1, 1)


def test_sparsify_product_identity_and_invertible_transform():
    for seed in (0, 1, 2):
        A = full_rank(40, 24, seed)
        res = sparsify(A, 15, 2, seed)
        assert res.transform.rank() == 24
        assert (A @ res.transform) == res.sparsified
        assert res.density <= A.density
        assert res.trials_used == 15 * 24 * 2
        assert res.seed == seed
        assert len(res.pass_densities) == 2
        assert res.pass_densities[1] <= res.pass_densities[0]
        assert res.density == res.pass_densities[-1]


def test_sparsify_identity_over_zeros_is_fixed_point():
    dense = np.zeros((6, 3), dtype=np.uint8)
    dense[:3] = np.eye(3, dtype=np.uint8)
    A = BitMatrix.from_dense(dense)
    res = sparsify(A, 8, 2, 9)
    assert res.density == pytest.approx(1 / 6)
    assert res.transform == BitMatrix.identity(3)
    assert res.sparsified == A


def test_sparsify_more_trials_never_hurts_single_pass():
    A = full_rank(60, 40, 7)
    densities = [sparsify(A, t, 1, 123).density for t in (1, 4, 16, 64)]
    assert all(a >= b for a, b in zip(densities, densities[1:]))


def test_sparsify_reproducible_and_seed_sensitive():
    A = full_rank(30, 18, 11)
    r1 = sparsify(A, 10, 2, 77)
    r2 = sparsify(A, 10, 2, 77)
    assert r1.sparsified == r2.sparsified and r1.transform == r2.transform
    r3 = sparsify(A, 10, 2, 78)
    assert r3.density <= A.density


def test_sparsify_trace_rows():
    A = full_rank(20, 6, 13)
    trace = []
    res = sparsify(A, 5, 2, 3, trace=trace)
    assert len(trace) == 12
    sweeps = [t[0] for t in trace]
    assert sweeps == [0] * 6 + [1] * 6
    assert [t[1] for t in trace] == list(range(6)) * 2
    for sweep, j, before, after, dens in trace:
        assert after <= before
        assert 0.0 < dens <= 1.0
    assert trace[-1][4] == pytest.approx(res.density)


def test_sparsify_rejects_bad_inputs():
    A = full_rank(10, 4, 15)
    with pytest.raises(ValidationError):
        sparsify(A, 0, 1, 1)
    with pytest.raises(ValidationError):
        sparsify(A, 1, 0, 1)
    low = BitMatrix.from_dense(np.ones((4, 2), dtype=np.uint8))
    with pytest.raises(RankDeficientError):
        sparsify(low, 1, 1, 1)


def test_exhaustive_is_a_fixed_point_and_dominates_randomized():
    for seed in range(8):
        A = full_rank(24, 8, 100 + seed)
        ex = sparsify_exhaustive(A)
        assert (A @ ex.transform) == ex.sparsified
        assert ex.transform.rank() == 8
        again = sparsify_exhaustive(ex.sparsified)
        assert again.density == ex.density
        rnd = sparsify(A, 30, 3, seed)
        assert ex.density <= rnd.density + 1e-12


def test_exhaustive_rejects_wide_and_rank_deficient():
    with pytest.raises(TooLargeError):
        sparsify_exhaustive(BitMatrix.identity(17))
    low = BitMatrix.from_dense(np.ones((4, 2), dtype=np.uint8))
    with pytest.raises(RankDeficientError):
        sparsify_exhaustive(low)


def test_exhaustive_on_identity_is_identity():
    res = sparsify_exhaustive(BitMatrix.identity(5))
    assert res.density == pytest.approx(0.2)
    assert res.transform == BitMatrix.identity(5)


def test_gauss_baseline_identity_pattern():
    for seed in range(5):
        A = full_rank(30, 24, 200 + seed)
        res = gauss_baseline(A)
        assert (A @ res.transform) == res.sparsified
        assert res.transform.rank() == 24
        dense = res.sparsified.to_dense()
        # every column owns a pivot row where it carries the row's only 1
        singleton_rows = dense[dense.sum(axis=1) == 1]
        covered = set(np.argmax(singleton_rows, axis=1).tolist())
        assert covered == set(range(24))
        assert res.sparsified.rank() == 24


def test_gauss_baseline_density_near_expectation():
    # Jordan pattern: identity block plus half-dense leftover rows
    vals = [gauss_baseline(full_rank(300, 240, 300 + s)).density for s in range(5)]
    expect = 1 / 300 + (1 - 0.8) / 2
    assert np.mean(vals) == pytest.approx(expect, abs=0.01)


def test_gauss_baseline_rank_deficient_rejected():
    low = BitMatrix.from_dense(np.ones((4, 2), dtype=np.uint8))
    with pytest.raises(RankDeficientError):
        gauss_baseline(low)


def test_independent_column_transform_unit_diagonal():
    A = full_rank(40, 32, 17)
    P = independent_column_transform(A, 5)
    dense = P.to_dense()
    assert np.array_equal(np.diag(dense), np.ones(32, dtype=np.uint8))
    assert P.rows == 32 and P.cols == 32


def test_independent_column_transform_invertibility_rate():
    # each column's combination is drawn independently, so invertibility
    # happens at roughly the random-unit-diagonal-matrix rate, near 0.29
    A = full_rank(64, 32, 19)
    gen = np.random.default_rng(23)
    hits = sum(independent_column_transform(A, gen).rank() == 32
               for _ in range(300))
    assert 0.20 <= hits / 300 <= 0.40


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(4, 20), st.integers(2, 8))
def test_sparsify_property_random_instances(seed, n, cols):
    if cols > n:
        cols = n
    A = full_rank(n, cols, seed)
    res = sparsify(A, 5, 1, seed)
    assert (A @ res.transform) == res.sparsified
    assert res.transform.rank() == cols
    assert res.density <= A.density + 1e-12

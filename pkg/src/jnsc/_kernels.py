"""Compiled hot loops for randomized column elimination.

The data layout is column-major bit packing: an n x K GF(2) matrix is held
as a (K, W) uint64 array, row r of column c at bit (r & 63) of word
(c, r >> 6). A trial walks a row permutation, greedily collects pivot rows
that grow the rank, and reduces the target column at each pivot; the
surviving target is the trial's residual, already in unpermuted row order.
"""

import math

import numpy as np
from numba import njit

U0 = np.uint64(0)
U1 = np.uint64(1)


@njit(cache=True)
def _popcount_vec(words):
    c1 = np.uint64(0x5555555555555555)
    c2 = np.uint64(0x3333333333333333)
    c4 = np.uint64(0x0F0F0F0F0F0F0F0F)
    cm = np.uint64(0x0101010101010101)
    total = 0
    for i in range(words.size):
        x = words[i]
        x = x - ((x >> np.uint64(1)) & c1)
        x = (x & c2) + ((x >> np.uint64(2)) & c2)
        x = (x + (x >> np.uint64(4))) & c4
        total += int((x * cm) >> np.uint64(56))
    return total


@njit(cache=True)
def residual_trials(cols, target, perms, nrows):
    """Best residual weight over row-order trials.

    cols: (K, W) uint64, packed columns spanning the approximating space.
    target: (W,) uint64 packed column to approximate.
    perms: (T, nrows) int64 row orders, one per trial.
    Returns (best_weight, best_trial); best_trial indexes perms.
    """
    K, W = cols.shape
    T = perms.shape[0]
    one = np.uint64(1)
    work = np.empty((K, W), dtype=np.uint64)
    tw = np.empty(W, dtype=np.uint64)
    best_weight = nrows + 1
    best_trial = -1
    for t in range(T):
        for i in range(K):
            for w in range(W):
                work[i, w] = cols[i, w]
        for w in range(W):
            tw[w] = target[w]
        for c in range(K):
            pivot = -1
            for idx in range(nrows):
                r = perms[t, idx]
                if (work[c, r >> 6] >> np.uint64(r & 63)) & one:
                    pivot = r
                    break
            if pivot < 0:
                continue
            hi = pivot >> 6
            sh = np.uint64(pivot & 63)
            for cc in range(c + 1, K):
                if (work[cc, hi] >> sh) & one:
                    for w in range(W):
                        work[cc, w] ^= work[c, w]
            if (tw[hi] >> sh) & one:
                for w in range(W):
                    tw[w] ^= work[c, w]
        weight = _popcount_vec(tw)
        if weight < best_weight:
            best_weight = weight
            best_trial = t
    return best_weight, best_trial


@njit(cache=True)
def residual_solve(cols, target, perm, nrows):
    """One trial with coefficient tracking.

    Returns (coeffs, residual, weight): coeffs is a (WK,) uint64 packed
    combination over the K columns, residual the (W,) packed leftover,
    and target = cols^T coeffs xor residual with residual zero on every
    pivot row of the walked order.
    """
    K, W = cols.shape
    WK = (K + 63) >> 6
    one = np.uint64(1)
    work = cols.copy()
    tw = target.copy()
    coef = np.zeros((K, WK), dtype=np.uint64)
    for i in range(K):
        coef[i, i >> 6] = one << np.uint64(i & 63)
    tcoef = np.zeros(WK, dtype=np.uint64)
    for c in range(K):
        pivot = -1
        for idx in range(nrows):
            r = perm[idx]
            if (work[c, r >> 6] >> np.uint64(r & 63)) & one:
                pivot = r
                break
        if pivot < 0:
            continue
        hi = pivot >> 6
        sh = np.uint64(pivot & 63)
        for cc in range(c + 1, K):
            if (work[cc, hi] >> sh) & one:
                for w in range(W):
                    work[cc, w] ^= work[c, w]
                for w in range(WK):
                    coef[cc, w] ^= coef[c, w]
        if (tw[hi] >> sh) & one:
            for w in range(W):
                tw[w] ^= work[c, w]
            for w in range(WK):
                tcoef[w] ^= coef[c, w]
    return tcoef, tw, _popcount_vec(tw)


@njit(cache=True)
def bp_flood(var_of_edge, check_ptr, edges_by_var, var_ptr, syndrome,
             prior, max_iter, n_vars):
    """Flooding sum-product on a Tanner graph given in check-major CSC form.

    var_of_edge/check_ptr list each check's variables; edges_by_var/var_ptr
    give the same edges grouped by variable. Signs run in the syndrome
    coset: a check with syndrome bit 1 wants odd parity. Returns
    (decisions, posteriors, converged, iterations).
    """
    E = var_of_edge.size
    r = check_ptr.size - 1
    m_vc = np.full(E, prior)
    m_cv = np.zeros(E)
    tlog = np.zeros(E)
    totals = np.full(n_vars, prior)
    e_hat = np.zeros(n_vars, dtype=np.uint8)
    nonzero = False
    for c in range(r):
        if syndrome[c]:
            nonzero = True
            break
    if not nonzero:
        return e_hat, totals, True, 0
    iters = 0
    for _ in range(max_iter):
        iters += 1
        for c in range(r):
            s = 0.0
            neg = syndrome[c] != 0
            for ei in range(check_ptr[c], check_ptr[c + 1]):
                m = m_vc[ei]
                am = abs(m)
                if am < 1e-12:
                    am = 1e-12
                t = math.log(math.tanh(0.5 * am))
                tlog[ei] = t
                s += t
                if m < 0.0:
                    neg = not neg
            for ei in range(check_ptr[c], check_ptr[c + 1]):
                ex = s - tlog[ei]
                if ex > -1e-15:
                    ex = -1e-15
                mag = 2.0 * math.atanh(math.exp(ex))
                if neg != (m_vc[ei] < 0.0):
                    m_cv[ei] = -mag
                else:
                    m_cv[ei] = mag
        for v in range(n_vars):
            tot = prior
            for k in range(var_ptr[v], var_ptr[v + 1]):
                tot += m_cv[edges_by_var[k]]
            totals[v] = tot
            e_hat[v] = 1 if tot < 0.0 else 0
        for v in range(n_vars):
            for k in range(var_ptr[v], var_ptr[v + 1]):
                ei = edges_by_var[k]
                m_vc[ei] = totals[v] - m_cv[ei]
        satisfied = True
        for c in range(r):
            par = 0
            for ei in range(check_ptr[c], check_ptr[c + 1]):
                par ^= e_hat[var_of_edge[ei]]
            if par != syndrome[c]:
                satisfied = False
                break
        if satisfied:
            return e_hat, totals, True, iters
    return e_hat, totals, False, iters


@njit(cache=True)
def flip_repair(var_of_edge, check_ptr, checks_by_var, var_ptr, syndrome,
                e_hat, reliability):
    """Greedy cleanup: flip the least-reliable member of unsatisfied checks.

    Sweeps the checks, flipping one bit per still-unsatisfied check (ties
    to the lowest variable index), while the number of unsatisfied checks
    strictly decreases. Returns (pattern, fully_satisfied); the pattern is
    only meaningful when fully_satisfied is True.
    """
    r = check_ptr.size - 1
    e = e_hat.copy()
    unsat = np.zeros(r, dtype=np.uint8)
    count = 0
    for c in range(r):
        par = 0
        for ei in range(check_ptr[c], check_ptr[c + 1]):
            par ^= e[var_of_edge[ei]]
        if par != syndrome[c]:
            unsat[c] = 1
            count += 1
    while count > 0:
        for c in range(r):
            if not unsat[c]:
                continue
            best = -1
            best_rel = 0.0
            for ei in range(check_ptr[c], check_ptr[c + 1]):
                v = var_of_edge[ei]
                rel = reliability[v]
                if best < 0 or rel < best_rel:
                    best = v
                    best_rel = rel
            if best < 0:
                continue
            e[best] ^= 1
            for k in range(var_ptr[best], var_ptr[best + 1]):
                unsat[checks_by_var[k]] ^= 1
        newcount = 0
        for c in range(r):
            newcount += unsat[c]
        if newcount >= count:
            return e, False
        count = newcount
    return e, True

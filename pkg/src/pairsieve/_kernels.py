"""Numeric inner loops.

Every kernel here is plain Python over numpy arrays so that it runs unchanged
when numba is unavailable or disabled; ``maybe_njit`` compiles it otherwise.
The two batch kernels that dominate sieve runtime (Klein sampling and coset
pairing) additionally have a vectorized numpy implementation that is used on
the numpy backend instead of the interpreted loop.

Conventions: basis vectors are rows; ``mu[i, j]`` (j < i) are the
Gram-Schmidt coefficients with ``b_i = b*_i + sum_j mu[i, j] b*_j`` and
``bsq[j] = |b*_j|^2``. A shift ``t`` enters as its Gram-Schmidt coordinates
``tc[j] = <t, b*_j> / bsq[j]``.
"""
import math

import numpy as np

from ._backend import USE_NUMBA, maybe_njit

# Half-width of the 1-D sampling window in units of the Gaussian parameter:
# exp(-pi * 4.5**2) < 2**-91, far below the 2**-64 tail budget.
WINDOW_TAU = 4.5
# Above this parameter the mass of Z + c is summed in Fourier space.
POISSON_MIN_SIGMA = 1.5


@maybe_njit
def gso(bf):
    k, n = bf.shape
    bstar = np.zeros((k, n))
    mu = np.eye(k)
    bsq = np.zeros(k)
    for i in range(k):
        v = bf[i].copy()
        for j in range(i):
            if bsq[j] > 0.0:
                m = np.dot(v, bstar[j]) / bsq[j]
            else:
                m = 0.0
            mu[i, j] = m
            v -= m * bstar[j]
        bstar[i] = v
        bsq[i] = np.dot(v, v)
    return bstar, mu, bsq


@maybe_njit
def lll_inplace(b, u, delta):
    """delta-LLL on integer rows ``b``; ``u`` accumulates the row operations.

    Returns the number of swaps, or -1 if a zero Gram-Schmidt vector shows up.
    """
    k = b.shape[0]
    _, mu, bsq = gso(b.astype(np.float64))
    for i in range(k):
        if bsq[i] <= 0.0:
            return -1
    swaps = 0
    i = 1
    while i < k:
        for j in range(i - 1, -1, -1):
            q = np.floor(mu[i, j] + 0.5)
            if q != 0.0:
                qi = np.int64(q)
                b[i] -= qi * b[j]
                u[i] -= qi * u[j]
                for l in range(j):
                    mu[i, l] -= q * mu[j, l]
                mu[i, j] -= q
        if bsq[i] >= (delta - mu[i, i - 1] * mu[i, i - 1]) * bsq[i - 1]:
            i += 1
        else:
            for c in range(b.shape[1]):
                tmp = b[i, c]
                b[i, c] = b[i - 1, c]
                b[i - 1, c] = tmp
            for c in range(u.shape[1]):
                tmp = u[i, c]
                u[i, c] = u[i - 1, c]
                u[i - 1, c] = tmp
            swaps += 1
            _, mu, bsq = gso(b.astype(np.float64))
            if i > 1:
                i -= 1
    return swaps


@maybe_njit
def enum_collect(mu, bsq, tc, r2, cap, out, sq_out):
    """Write every integer ``a`` with |sum a_i b_i - t_par|^2 <= r2 into ``out``.

    Returns the number of points found, or -1 once more than ``cap`` exist.
    A relative slack of 1e-9 on ``r2`` keeps boundary points; callers filter
    exactly when it matters.
    """
    k = bsq.shape[0]
    if k == 0:
        if r2 >= 0.0:
            sq_out[0] = 0.0
            return 1
        return 0
    r2e = r2 * (1.0 + 1e-9) + 1e-300
    a = np.zeros(k, np.int64)
    hi = np.zeros(k, np.int64)
    part = np.zeros(k + 1)
    ctr = np.zeros(k)
    count = 0

    j = k - 1
    ctr[j] = tc[j]
    rem = r2e - part[j + 1]
    if rem < 0.0:
        return 0
    w = math.sqrt(rem / bsq[j])
    a[j] = np.int64(math.ceil(ctr[j] - w))
    hi[j] = np.int64(math.floor(ctr[j] + w))
    while True:
        if a[j] > hi[j]:
            j += 1
            if j == k:
                break
            a[j] += 1
            continue
        d = a[j] - ctr[j]
        p = part[j + 1] + d * d * bsq[j]
        if p > r2e:
            a[j] += 1
            continue
        part[j] = p
        if j == 0:
            if count >= cap:
                return -1
            for i in range(k):
                out[count, i] = a[i]
            sq_out[count] = p
            count += 1
            a[0] += 1
        else:
            j -= 1
            c = tc[j]
            for i in range(j + 1, k):
                c -= a[i] * mu[i, j]
            ctr[j] = c
            rem = r2e - part[j + 1]
            if rem < 0.0:
                a[j] = 1
                hi[j] = 0
            else:
                w = math.sqrt(rem / bsq[j])
                a[j] = np.int64(math.ceil(c - w))
                hi[j] = np.int64(math.floor(c + w))
    return count


@maybe_njit
def enum_min(mu, bsq, tc, r2, exclude_zero, best):
    """Depth-first search for the shortest ``a`` (optionally nonzero) within r2.

    Each level is visited in zig-zag order from the rounded center, so the
    first value beyond the bound ends that level. The radius shrinks to every
    improvement. ``best`` receives the minimizer; the return value is its
    squared length, or -1.0 if nothing lies within r2.
    """
    k = bsq.shape[0]
    a = np.zeros(k, np.int64)
    r0 = np.zeros(k, np.int64)
    sgn = np.zeros(k, np.int64)
    step = np.zeros(k, np.int64)
    part = np.zeros(k + 1)
    ctr = np.zeros(k)
    bound = r2 * (1.0 + 1e-9) + 1e-300
    found = -1.0

    j = k - 1
    ctr[j] = tc[j]
    r0[j] = np.int64(math.floor(ctr[j] + 0.5))
    sgn[j] = 1 if ctr[j] >= r0[j] else -1
    a[j] = r0[j]
    while True:
        d = a[j] - ctr[j]
        p = part[j + 1] + d * d * bsq[j]
        if p > bound:
            j += 1
            if j == k:
                break
            step[j] += 1
            m = step[j]
            a[j] = r0[j] + sgn[j] * ((m + 1) // 2) * (1 if m % 2 == 1 else -1)
            continue
        part[j] = p
        if j == 0:
            ok = True
            if exclude_zero:
                ok = False
                for i in range(k):
                    if a[i] != 0:
                        ok = True
                        break
            if ok and (found < 0.0 or p < found):
                found = p
                bound = p * (1.0 + 1e-9) + 1e-300
                for i in range(k):
                    best[i] = a[i]
            step[0] += 1
            m = step[0]
            a[0] = r0[0] + sgn[0] * ((m + 1) // 2) * (1 if m % 2 == 1 else -1)
        else:
            j -= 1
            c = tc[j]
            for i in range(j + 1, k):
                c -= a[i] * mu[i, j]
            ctr[j] = c
            r0[j] = np.int64(math.floor(c + 0.5))
            sgn[j] = 1 if c >= r0[j] else -1
            step[j] = 0
            a[j] = r0[j]
    return found


@maybe_njit
def z_mass(c, sigma):
    """rho_sigma(Z - c), summed directly or by Poisson summation."""
    if sigma >= POISSON_MIN_SIGMA:
        total = 1.0
        s2 = sigma * sigma
        for kk in range(1, 8):
            term = math.exp(-math.pi * s2 * kk * kk)
            if term < 1e-20:
                break
            total += 2.0 * term * math.cos(2.0 * math.pi * kk * c)
        return sigma * total
    h = int(math.ceil(WINDOW_TAU * sigma)) + 1
    x0 = math.floor(c + 0.5)
    total = 0.0
    for off in range(-h, h + 1):
        d = x0 + off - c
        total += math.exp(-math.pi * d * d / (sigma * sigma))
    return total


@maybe_njit
def sample_z(c, sigma, u):
    """Inverse-CDF draw from D_{Z, sigma, c}, scanning outward from round(c)."""
    total = z_mass(c, sigma)
    target = u * total
    x0 = math.floor(c + 0.5)
    sgn = 1.0 if c >= x0 else -1.0
    h = int(math.ceil(WINDOW_TAU * sigma)) + 1
    inv = 1.0 / (sigma * sigma)
    acc = 0.0
    x = x0
    for m in range(2 * h + 1):
        if m == 0:
            x = x0
        elif m % 2 == 1:
            x = x0 + sgn * ((m + 1) // 2)
        else:
            x = x0 - sgn * (m // 2)
        d = x - c
        acc += math.exp(-math.pi * d * d * inv)
        if acc >= target:
            return x
    return x


@maybe_njit
def _klein_loop(mu, bsq, tc, s, unif, out, logacc):
    m_count, k = unif.shape
    sig = np.empty(k)
    zm = np.empty(k)
    for j in range(k):
        sig[j] = s / math.sqrt(bsq[j])
        zm[j] = z_mass(0.0, sig[j])
    for m in range(m_count):
        la = 0.0
        for j in range(k - 1, -1, -1):
            c = tc[j]
            for i in range(j + 1, k):
                c -= out[m, i] * mu[i, j]
            out[m, j] = np.int64(sample_z(c, sig[j], unif[m, j]))
            la += math.log(z_mass(c, sig[j]) / zm[j])
        logacc[m] = la


def _z_mass_vec(c, sigma):
    if sigma >= POISSON_MIN_SIGMA:
        total = np.ones_like(c)
        s2 = sigma * sigma
        for kk in range(1, 8):
            term = math.exp(-math.pi * s2 * kk * kk)
            if term < 1e-20:
                break
            total += 2.0 * term * np.cos(2.0 * math.pi * kk * c)
        return sigma * total
    h = int(math.ceil(WINDOW_TAU * sigma)) + 1
    x0 = np.floor(c + 0.5)
    d = x0[:, None] + np.arange(-h, h + 1)[None, :] - c[:, None]
    return np.exp(-math.pi * d * d / (sigma * sigma)).sum(axis=1)


def _sample_z_vec(c, sigma, u):
    total = _z_mass_vec(c, sigma)
    x0 = np.floor(c + 0.5)
    sgn = np.where(c >= x0, 1.0, -1.0)
    h = int(math.ceil(WINDOW_TAU * sigma)) + 1
    m = np.arange(2 * h + 1)
    step = np.where(m % 2 == 1, (m + 1) // 2, -(m // 2)).astype(np.float64)
    x = x0[:, None] + sgn[:, None] * step[None, :]
    d = x - c[:, None]
    acc = np.cumsum(np.exp(-math.pi * d * d / (sigma * sigma)), axis=1)
    idx = np.argmax(acc >= (u * total)[:, None], axis=1)
    missed = ~(acc[:, -1] >= u * total)
    idx[missed] = x.shape[1] - 1
    return x[np.arange(len(c)), idx], total


def _klein_numpy(mu, bsq, tc, s, unif, out, logacc):
    m_count, k = unif.shape
    logacc[:] = 0.0
    for j in range(k - 1, -1, -1):
        sig = s / math.sqrt(bsq[j])
        c = tc[j] - out[:, j + 1:] @ mu[j + 1:, j] if j + 1 < k else np.full(m_count, tc[j])
        z, total = _sample_z_vec(np.asarray(c, dtype=np.float64), sig, unif[:, j])
        out[:, j] = z.astype(np.int64)
        logacc += np.log(total / _z_mass_vec(np.zeros(1), sig)[0])


def klein_batch(mu, bsq, tc, s, unif):
    """Klein nested sampling for ``len(unif)`` points.

    Returns the integer coefficient rows and, per row, the log of the
    acceptance probability that turns the proposal into an exact sample.
    """
    out = np.zeros(unif.shape, dtype=np.int64)
    logacc = np.zeros(unif.shape[0])
    if unif.shape[1] == 0:
        return out, logacc
    mu = np.ascontiguousarray(mu, dtype=np.float64)
    bsq = np.ascontiguousarray(bsq, dtype=np.float64)
    tc = np.ascontiguousarray(tc, dtype=np.float64)
    unif = np.ascontiguousarray(unif, dtype=np.float64)
    if USE_NUMBA:
        _klein_loop(mu, bsq, tc, float(s), unif, out, logacc)
    else:
        _klein_numpy(mu, bsq, tc, float(s), unif, out, logacc)
    return out, logacc


@maybe_njit
def _pair_loop(codes, table_size):
    m = codes.shape[0]
    pending = np.full(table_size, -1, np.int64)
    first = np.empty(m // 2 + 1, np.int64)
    second = np.empty(m // 2 + 1, np.int64)
    npairs = 0
    for i in range(m):
        c = codes[i]
        p = pending[c]
        if p < 0:
            pending[c] = i
        else:
            first[npairs] = p
            second[npairs] = i
            npairs += 1
            pending[c] = -1
    order = np.argsort(first[:npairs], kind="mergesort")
    return first[:npairs][order], second[:npairs][order]


def _pair_numpy(codes):
    order = np.argsort(codes, kind="stable")
    sc = codes[order]
    starts = np.flatnonzero(np.r_[True, sc[1:] != sc[:-1]])
    rank = np.arange(len(sc)) - np.repeat(starts, np.diff(np.r_[starts, len(sc)]))
    lead = np.flatnonzero(rank % 2 == 0)
    lead = lead[lead + 1 < len(sc)]
    lead = lead[sc[lead] == sc[lead + 1]]
    first = order[lead]
    second = order[lead + 1]
    by_first = np.argsort(first, kind="stable")
    return first[by_first], second[by_first]


def pair_indices(codes, nbits):
    """Disjoint same-code pairs, consecutive within each code, ordered by first index."""
    codes = np.ascontiguousarray(codes, dtype=np.int64)
    if codes.size < 2:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    if USE_NUMBA and nbits <= 20:
        return _pair_loop(codes, 1 << nbits)
    return _pair_numpy(codes)

"""Numba-compiled hot loops.

Every routine here has a pure-Python twin in ``kaltseq.core`` (algorithms)
or ``kaltseq.stochastic`` (RNG); the test suite pins exact agreement.

RNG: counter-based SplitMix64.  A stream is keyed by
``key = mix64(master + (stream_index + 1) * GOLDEN)`` and draw ``t`` of the
stream is ``mix64(key + (t + 1) * GOLDEN)``, mapped to [0, 1) via the top
53 bits.  Batch kernels give sample ``s`` the stream ``base_stream + s``,
so results are bit-identical for any thread count and any batch split.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
U53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, inline="always")
def _mix64(z):
    z ^= z >> np.uint64(30)
    z *= MIX1
    z ^= z >> np.uint64(27)
    z *= MIX2
    z ^= z >> np.uint64(31)
    return z


@njit(cache=True, inline="always")
def _stream_key(master, stream):
    return _mix64(np.uint64(master) + (np.uint64(stream) + np.uint64(1)) * GOLDEN)


@njit(cache=True, inline="always")
def _u01(key, t):
    return np.float64(_mix64(key + (np.uint64(t) + np.uint64(1)) * GOLDEN) >> np.uint64(11)) * U53


@njit(cache=True)
def fill_uniforms(key, out):
    for i in range(out.shape[0]):
        out[i] = _u01(key, i)


@njit(cache=True)
def greedy_count_int(word, k):
    n = word.shape[0]
    if n == 0:
        return 0
    committed = 0
    prov = word[0]
    up = True
    for j in range(1, n):
        w = word[j]
        if up:
            if w >= prov + k:
                committed += 1
                prov = w
                up = False
            elif w < prov:
                prov = w
        else:
            if w <= prov - k:
                committed += 1
                prov = w
                up = True
            elif w > prov:
                prov = w
    return committed + 1


@njit(cache=True)
def greedy_count_x(y, x):
    n = y.shape[0]
    if n == 0:
        return 0
    committed = 0
    prov = y[0]
    up = True
    for j in range(1, n):
        w = y[j]
        if up:
            if w >= prov + x:
                committed += 1
                prov = w
                up = False
            elif w < prov:
                prov = w
        else:
            if w <= prov - x:
                committed += 1
                prov = w
                up = True
            elif w > prov:
                prov = w
    return committed + 1


@njit(cache=True)
def greedy_count_x_reject(y, x):
    # leading values above 1-x rejected; 0 when everything was rejected
    n = y.shape[0]
    ceiling = 1.0 - x
    committed = 0
    prov = -1.0
    up = True
    for j in range(n):
        w = y[j]
        if prov < 0.0:
            if w <= ceiling:
                prov = w
            continue
        if up:
            if w >= prov + x:
                committed += 1
                prov = w
                up = False
            elif w < prov:
                prov = w
        else:
            if w <= prov - x:
                committed += 1
                prov = w
                up = True
            elif w > prov:
                prov = w
    if prov < 0.0:
        return 0
    return committed + 1


@njit(cache=True)
def dp_count_int(word, k, up_first):
    n = word.shape[0]
    if n == 0:
        return 0
    w = word if up_first else -word
    odd = np.ones(n, np.int64)
    even = np.zeros(n, np.int64)
    best = 1
    for i in range(n):
        wi = w[i]
        for j in range(i):
            if wi - w[j] >= k and odd[j] + 1 > even[i]:
                even[i] = odd[j] + 1
            if w[j] - wi >= k and even[j] > 0 and even[j] + 1 > odd[i]:
                odd[i] = even[j] + 1
        if even[i] > best:
            best = even[i]
        if odd[i] > best:
            best = odd[i]
    return best


@njit(cache=True)
def _next_permutation(a):
    n = a.shape[0]
    i = n - 2
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = n - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    lo, hi = i + 1, n - 1
    while lo < hi:
        a[lo], a[hi] = a[hi], a[lo]
        lo += 1
        hi -= 1
    return True


@njit(cache=True, parallel=True)
def enumerate_counts(n, k, audit_stride):
    """Length counts of the greedy maximum over all of S_n.

    Lexicographic blocks fixed by the first element; block b holds the
    (n-1)! permutations starting with b+1, so the merge is an exact int64
    sum independent of scheduling.  Every ``audit_stride``-th permutation
    of each block is recomputed with the DP oracle; mismatches are counted.
    """
    counts = np.zeros((n, n + 1), np.int64)
    mismatches = np.zeros(n, np.int64)
    for b in prange(n):
        first = b + 1
        word = np.empty(n, np.int64)
        word[0] = first
        tail = np.empty(n - 1, np.int64)
        t = 0
        for v in range(1, n + 1):
            if v != first:
                tail[t] = v
                t += 1
        idx = 0
        while True:
            for i in range(n - 1):
                word[i + 1] = tail[i]
            length = greedy_count_int(word, k)
            counts[b, length] += 1
            if audit_stride > 0 and idx % audit_stride == 0:
                if length != dp_count_int(word, k, True):
                    mismatches[b] += 1
            idx += 1
            if n == 1 or not _next_permutation(tail):
                break
    return counts, mismatches


@njit(cache=True, parallel=True)
def batch_L_x(n, x, samples, master, base_stream, reject_start):
    """One L draw per sample: greedy on n fresh uniforms (counters 0..n-1)."""
    out = np.empty(samples, np.int64)
    for s in prange(samples):
        key = _stream_key(master, base_stream + s)
        y = np.empty(n, np.float64)
        for i in range(n):
            y[i] = _u01(key, i)
        if reject_start:
            out[s] = greedy_count_x_reject(y, x)
        else:
            out[s] = greedy_count_x(y, x)
    return out


@njit(cache=True, parallel=True)
def batch_L_x_two_phase(n, x, samples, master, base_stream):
    """L via explicit thinning: extract the shifted accepted values z, then
    run the zero-threshold greedy on z.  Same law as batch_L_x(reject) by
    construction; a genuinely different code path for cross-validation."""
    out = np.empty(samples, np.int64)
    ceiling = 1.0 - x
    for s in prange(samples):
        key = _stream_key(master, base_stream + s)
        z = np.empty(n, np.float64)
        r = 0
        prov = -1.0
        up = True
        for i in range(n):
            w = _u01(key, i)
            if prov < 0.0:
                if w <= ceiling:
                    prov = w
                    z[r] = w
                    r += 1
                continue
            if up:
                if w >= prov + x:
                    prov = w
                    up = False
                    z[r] = w - x
                    r += 1
                elif w < prov:
                    prov = w
                    z[r] = w
                    r += 1
            else:
                if w <= prov - x:
                    prov = w
                    up = True
                    z[r] = w
                    r += 1
                elif w > prov:
                    prov = w
                    z[r] = w - x
                    r += 1
        out[s] = greedy_count_x(z[:r], 0.0)
    return out


@njit(cache=True, parallel=True)
def batch_L_binomial_recipe(n, x, samples, master, base_stream):
    """L via the binomial recipe: keep each uniform iff it is below 1-x
    (so the kept count is Bin(n, 1-x) and kept values are iid uniform on
    [0, 1-x]), then take the ordinary alternating length of the survivors."""
    out = np.empty(samples, np.int64)
    threshold = 1.0 - x
    for s in prange(samples):
        key = _stream_key(master, base_stream + s)
        committed = 0
        prov = -1.0
        up = True
        for i in range(n):
            w = _u01(key, i)
            if w >= threshold:
                continue
            if prov < 0.0:
                prov = w
                continue
            if up:
                if w >= prov:
                    committed += 1
                    prov = w
                    up = False
                else:
                    prov = w
            else:
                if w <= prov:
                    committed += 1
                    prov = w
                    up = True
                else:
                    prov = w
        out[s] = committed + (1 if prov >= 0.0 else 0)
    return out


@njit(cache=True, parallel=True)
def batch_L_k(n, k, samples, master, base_stream):
    """One L_{n,k} draw per sample: Fisher-Yates permutation (counters
    0..n-2), then the greedy scan."""
    out = np.empty(samples, np.int64)
    for s in prange(samples):
        key = _stream_key(master, base_stream + s)
        perm = np.empty(n, np.int64)
        for i in range(n):
            perm[i] = i + 1
        for i in range(n - 1, 0, -1):
            j = np.int64(_u01(key, n - 1 - i) * (i + 1))
            perm[i], perm[j] = perm[j], perm[i]
        out[s] = greedy_count_int(perm, k)
    return out


@njit(cache=True, parallel=True)
def batch_permutations_shuffle(n, samples, master, base_stream):
    out = np.empty((samples, n), np.int64)
    for s in prange(samples):
        key = _stream_key(master, base_stream + s)
        for i in range(n):
            out[s, i] = i + 1
        for i in range(n - 1, 0, -1):
            j = np.int64(_u01(key, n - 1 - i) * (i + 1))
            out[s, i], out[s, j] = out[s, j], out[s, i]
    return out


@njit(cache=True, parallel=True)
def thinning_batch(n, x, runs, master, base_stream, skip_up_shift):
    """Per run: accepted-index mask, shifted values z (in acceptance order),
    and the acceptance count.  ``skip_up_shift`` deliberately corrupts the
    transform (omits the -x shift after up steps) for mutation testing."""
    mask = np.zeros((runs, n), np.uint8)
    z = np.zeros((runs, n), np.float64)
    zlen = np.zeros(runs, np.int64)
    ceiling = 1.0 - x
    for s in prange(runs):
        key = _stream_key(master, base_stream + s)
        r = 0
        prov = -1.0
        up = True
        for i in range(n):
            w = _u01(key, i)
            if prov < 0.0:
                if w <= ceiling:
                    prov = w
                    mask[s, i] = 1
                    z[s, r] = w
                    r += 1
                continue
            if up:
                if w >= prov + x:
                    prov = w
                    up = False
                    mask[s, i] = 1
                    z[s, r] = w if skip_up_shift else w - x
                    r += 1
                elif w < prov:
                    prov = w
                    mask[s, i] = 1
                    z[s, r] = w
                    r += 1
            else:
                if w <= prov - x:
                    prov = w
                    up = True
                    mask[s, i] = 1
                    z[s, r] = w
                    r += 1
                elif w > prov:
                    prov = w
                    mask[s, i] = 1
                    z[s, r] = w if skip_up_shift else w - x
                    r += 1
        zlen[s] = r
    return mask, z, zlen


@njit(cache=True, parallel=True)
def sandwich_batch(n, k, x1, x2, trials, master, base_stream):
    """Per trial: L_{n,k} of the rank permutation, the two x-threshold
    lengths of the raw values, and the exact KS supremum of the values."""
    L_k = np.empty(trials, np.int64)
    L_x1 = np.empty(trials, np.int64)
    L_x2 = np.empty(trials, np.int64)
    ks = np.empty(trials, np.float64)
    for s in prange(trials):
        key = _stream_key(master, base_stream + s)
        y = np.empty(n, np.float64)
        for i in range(n):
            y[i] = _u01(key, i)
        order = np.argsort(y)
        ranks = np.empty(n, np.int64)
        for m in range(n):
            ranks[order[m]] = m + 1
        L_k[s] = greedy_count_int(ranks, k)
        L_x1[s] = greedy_count_x(y, x1)
        L_x2[s] = greedy_count_x(y, x2)
        best = 0.0
        for m in range(n):
            v = y[order[m]]
            lo = (m + 1) / n - v
            hi = v - m / n
            if lo > best:
                best = lo
            if hi > best:
                best = hi
        ks[s] = best
    return L_k, L_x1, L_x2, ks

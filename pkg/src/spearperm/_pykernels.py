"""Vectorized numpy implementation of the permutation kernels.

This is the fallback backend when the compiled extension is unavailable, and
also hosts the shared helpers (explicit-permutation evaluation, observed
statistics) used by every backend.

Both backends consume the same raw 64-bit shuffle words and apply the same
inside-out shuffle (j = word mod (i+1), swap), and both evaluate the statistic
through the same sequence of scalar operations. On rank input the centered
deviations live on a half-integer lattice, so every sum below is exact in
float64 for n up to ~2500 and the two backends agree bit for bit.
"""

import numpy as np

BACKEND_NAME = "python"


def shuffles_from_bits(n, bits):
    """Turn a (B, n-1) array of uint64 words into B permutations of 0..n-1.

    Row k consumes its words left to right while i runs n-1 down to 1:
    j = word % (i + 1), then positions i and j are swapped. This layout is
    frozen; compiled kernels replicate it exactly.
    """
    bits = np.ascontiguousarray(bits, dtype=np.uint64)
    num = bits.shape[0]
    perm = np.tile(np.arange(n, dtype=np.intp), (num, 1))
    rows = np.arange(num)
    for col, i in enumerate(range(n - 1, 0, -1)):
        j = (bits[:, col] % np.uint64(i + 1)).astype(np.intp)
        at_i = perm[rows, i].copy()
        perm[rows, i] = perm[rows, j]
        perm[rows, j] = at_i
    return perm


def stats_for_perms(adev, bdev, perms, studentized):
    """Correlation (or studentized correlation) of adev against bdev
    reordered by each row of `perms`.

    adev/bdev are centered margins; the marginal sums of squares do not
    change under permutation, only the cross terms do.
    """
    n = adev.size
    sa = float(adev @ adev)
    sb = float(bdev @ bdev)
    denom_r = np.sqrt(sa * sb)
    shuffled = bdev[perms]
    num = shuffled @ adev
    r = num / denom_r
    if not studentized:
        return r
    s22 = (shuffled * shuffled) @ (adev * adev)
    mu22 = s22 / n
    denom_tau = (sa / n) * (sb / n)
    tau2 = mu22 / denom_tau
    out = np.zeros(perms.shape[0], dtype=np.float64)
    alive = tau2 > 0.0
    out[alive] = r[alive] / np.sqrt(tau2[alive])
    return out


def permute_stats(adev, bdev, bits, studentized):
    """Statistic value for each of B random re-pairings of bdev against adev.

    bits is the (B, n-1) uint64 shuffle source; see shuffles_from_bits.
    """
    perms = shuffles_from_bits(adev.size, bits)
    return stats_for_perms(adev, bdev, perms, studentized)


def observed_stat(adev, bdev, studentized):
    """Statistic of the identity pairing, via the same operation sequence as
    the permutation paths (unclamped; comparisons need bit-equal values)."""
    n = adev.size
    sa = float(adev @ adev)
    sb = float(bdev @ bdev)
    num = float(adev @ bdev)
    r = num / np.sqrt(sa * sb)
    if not studentized:
        return float(r)
    s22 = float((bdev * bdev) @ (adev * adev))
    mu22 = s22 / n
    denom_tau = (sa / n) * (sb / n)
    tau2 = mu22 / denom_tau
    if tau2 <= 0.0:
        return 0.0
    return float(r / np.sqrt(tau2))

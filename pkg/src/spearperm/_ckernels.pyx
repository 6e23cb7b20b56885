# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled permutation kernel: the hot loop of the sampled permutation
tests. Mirrors _pykernels.permute_stats exactly (same shuffle word layout,
same scalar operation order), so both backends return bit-identical values
on rank input.
"""

import numpy as np

from libc.math cimport sqrt
from libc.stdint cimport uint64_t

BACKEND_NAME = "c"


def permute_stats(double[::1] adev, double[::1] bdev, uint64_t[:, ::1] bits,
                  bint studentized):
    """Statistic value for each of B random re-pairings of bdev against adev.

    bits holds B rows of n-1 shuffle words; row k drives an inside-out
    shuffle (i = n-1..1, j = word % (i+1), swap i and j).
    """
    cdef Py_ssize_t n = adev.shape[0]
    cdef Py_ssize_t nperm = bits.shape[0]
    if bits.shape[1] != n - 1:
        raise ValueError("bits must have n-1 columns")

    out_arr = np.empty(nperm, dtype=np.float64)
    work_arr = np.empty(n, dtype=np.float64)
    a2_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] work = work_arr
    cdef double[::1] a2 = a2_arr

    cdef Py_ssize_t i, j, k, col
    cdef double sa = 0.0, sb = 0.0
    cdef double num, s22, r, mu22, denom_r, denom_tau, tau2, tmp

    with nogil:
        for i in range(n):
            sa += adev[i] * adev[i]
            sb += bdev[i] * bdev[i]
            a2[i] = adev[i] * adev[i]

        denom_r = sqrt(sa * sb)
        denom_tau = (sa / n) * (sb / n)

        for k in range(nperm):
            for i in range(n):
                work[i] = bdev[i]
            col = 0
            for i in range(n - 1, 0, -1):
                j = <Py_ssize_t> (bits[k, col] % <uint64_t> (i + 1))
                col += 1
                tmp = work[i]
                work[i] = work[j]
                work[j] = tmp

            num = 0.0
            s22 = 0.0
            if studentized:
                for i in range(n):
                    num += adev[i] * work[i]
                    s22 += a2[i] * work[i] * work[i]
                r = num / denom_r
                mu22 = s22 / n
                tau2 = mu22 / denom_tau
                if tau2 > 0.0:
                    out[k] = r / sqrt(tau2)
                else:
                    out[k] = 0.0
            else:
                for i in range(n):
                    num += adev[i] * work[i]
                out[k] = num / denom_r

    return out_arr

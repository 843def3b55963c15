# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Behaviourally identical to ``_pykernels``; selected at import time by the
``order_bench.kernels`` package when the build produced this extension.
"""

from libc.math cimport exp
from libc.stdlib cimport malloc, free


def count_inversions_ranked(long long[::1] ranks):
    """Count pairs (i, j), i < j, with ranks[i] > ranks[j] (merge sort)."""
    cdef Py_ssize_t n = ranks.shape[0]
    if n < 2:
        return 0
    cdef long long *work = <long long *> malloc(n * sizeof(long long))
    cdef long long *buf = <long long *> malloc(n * sizeof(long long))
    if work == NULL or buf == NULL:
        free(work)
        free(buf)
        raise MemoryError()
    cdef Py_ssize_t i, j, k, lo, mid, hi, width
    cdef unsigned long long inversions = 0
    for i in range(n):
        work[i] = ranks[i]
    width = 1
    while width < n:
        lo = 0
        while lo < n - width:
            mid = lo + width
            hi = lo + 2 * width
            if hi > n:
                hi = n
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                if work[i] <= work[j]:
                    buf[k] = work[i]
                    i += 1
                else:
                    buf[k] = work[j]
                    j += 1
                    inversions += mid - i
                k += 1
            while i < mid:
                buf[k] = work[i]
                i += 1
                k += 1
            while j < hi:
                buf[k] = work[j]
                j += 1
                k += 1
            for k in range(lo, hi):
                work[k] = buf[k]
            lo += 2 * width
        width *= 2
    free(work)
    free(buf)
    return inversions


def cycle_count(long long[::1] perm):
    """Number of cycles of a 1-based permutation given as a sequence."""
    cdef Py_ssize_t n = perm.shape[0]
    cdef unsigned char *seen = <unsigned char *> malloc(n * sizeof(unsigned char))
    if seen == NULL:
        raise MemoryError()
    cdef Py_ssize_t start, i
    cdef long long cycles = 0
    for i in range(n):
        seen[i] = 0
    for start in range(n):
        if seen[start]:
            continue
        cycles += 1
        i = start
        while not seen[i]:
            seen[i] = 1
            i = perm[i] - 1
    free(seen)
    return cycles


def logistic_sgd_epoch(long long[::1] indices, long long[::1] indptr,
                       signed char[::1] labels, long long[::1] order,
                       double[::1] weights, double bias, double lr):
    """One SGD epoch of logistic regression over binary sparse rows.

    ``weights`` is mutated in place; the updated bias is returned.
    """
    cdef Py_ssize_t t, k, lo, hi, row
    cdef double z, p, g, ez
    for t in range(order.shape[0]):
        row = order[t]
        lo = indptr[row]
        hi = indptr[row + 1]
        z = bias
        for k in range(lo, hi):
            z += weights[indices[k]]
        if z >= 0.0:
            p = 1.0 / (1.0 + exp(-z))
        else:
            ez = exp(z)
            p = ez / (1.0 + ez)
        g = lr * (p - labels[row])
        bias -= g
        for k in range(lo, hi):
            weights[indices[k]] -= g
    return bias

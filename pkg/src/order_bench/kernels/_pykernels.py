"""Pure-Python implementations of the hot kernels.

Used automatically when the compiled extension is unavailable; the compiled
module in ``_ckernels.pyx`` must stay behaviourally identical.
"""

from math import exp


def count_inversions_ranked(ranks):
    """Count pairs (i, j), i < j, with ranks[i] > ranks[j] (merge sort)."""
    n = len(ranks)
    if n < 2:
        return 0
    work = list(ranks)
    buf = [0] * n
    inversions = 0
    width = 1
    while width < n:
        for lo in range(0, n - width, 2 * width):
            mid = lo + width
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
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
            work[lo:hi] = buf[lo:hi]
        width *= 2
    return inversions


def cycle_count(perm):
    """Number of cycles of a 1-based permutation given as a sequence."""
    n = len(perm)
    seen = [False] * n
    cycles = 0
    for start in range(n):
        if seen[start]:
            continue
        cycles += 1
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i] - 1
    return cycles


def logistic_sgd_epoch(indices, indptr, labels, order, weights, bias, lr):
    """One SGD epoch of logistic regression over binary sparse rows.

    ``indices``/``indptr`` are CSR-style arrays of hashed feature ids,
    ``labels`` holds 0/1 targets, ``order`` the row visit order. ``weights``
    is mutated in place; the updated bias is returned.
    """
    for t in order:
        lo = indptr[t]
        hi = indptr[t + 1]
        z = bias
        for k in range(lo, hi):
            z += weights[indices[k]]
        if z >= 0.0:
            p = 1.0 / (1.0 + exp(-z))
        else:
            ez = exp(z)
            p = ez / (1.0 + ez)
        g = lr * (p - labels[t])
        bias -= g
        for k in range(lo, hi):
            weights[indices[k]] -= g
    return bias

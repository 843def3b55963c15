"""Hot numeric kernels with a compiled fast path.

The compiled extension (built from ``_ckernels.pyx``) is preferred; the
pure-Python module is a drop-in fallback. ``BACKEND`` reports which one is
active. All callers pass ``array('q', ...)`` / ``array('d', ...)`` /
``array('b', ...)`` buffers so both backends see the same types.
"""

try:
    from order_bench.kernels import _ckernels as _impl

    BACKEND = "compiled"
except ImportError:  # extension not built on this platform
    from order_bench.kernels import _pykernels as _impl

    BACKEND = "python"

count_inversions_ranked = _impl.count_inversions_ranked
cycle_count = _impl.cycle_count
logistic_sgd_epoch = _impl.logistic_sgd_epoch

__all__ = [
    "BACKEND",
    "count_inversions_ranked",
    "cycle_count",
    "logistic_sgd_epoch",
]

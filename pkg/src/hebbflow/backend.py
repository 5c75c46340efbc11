"""Selects the compiled kernel module at import, falling back to numpy.

Set HEBBFLOW_FORCE_FALLBACK=1 to force the pure-Python path (used by the
benchmark and the cross-backend consistency tests).
"""

import os

if os.environ.get("HEBBFLOW_FORCE_FALLBACK"):
    from . import _fallback as _impl

    ACTIVE = "fallback"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        ACTIVE = "compiled"
    except ImportError:
        from . import _fallback as _impl

        ACTIVE = "fallback"

fill_uniform = _impl.fill_uniform
fill_normal = _impl.fill_normal
jacobi_eig = _impl.jacobi_eig
pairwise_dist = _impl.pairwise_dist
spiral_project = _impl.spiral_project

# The Hebbian accumulators cross over: the compiled index-order loop wins
# while call overhead dominates, BLAS-backed matmuls win on real volume
# (benchmarks/bench_kernels.py). Dispatch on the per-call flop count; a
# given run keeps one path since its shapes are fixed.
_HEBB_COMPILED_MAX_FLOPS = 20_000

if ACTIVE == "compiled":
    from . import _fallback as _fb

    def hebb_trace(W, X):
        if W.size * X.shape[0] <= _HEBB_COMPILED_MAX_FLOPS:
            return _impl.hebb_trace(W, X)
        return _fb.hebb_trace(W, X)

    def hebb_ordered(W, X):
        if W.size * X.shape[0] <= _HEBB_COMPILED_MAX_FLOPS:
            return _impl.hebb_ordered(W, X)
        return _fb.hebb_ordered(W, X)

else:
    hebb_trace = _impl.hebb_trace
    hebb_ordered = _impl.hebb_ordered

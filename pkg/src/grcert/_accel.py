"""JIT toggle for the hot numeric kernels.

The dense simplex pivot loop dominates runtime (it runs once per neuron
bound, per branch-and-bound node, and per dependency sub-problem), so it
is compiled with numba by default.  Setting the environment variable
``GRCERT_JIT=0`` selects a pure-numpy fallback: the same functions run
uncompiled, which is much slower but bit-identical, and handy for
debugging or on platforms without a working numba.

``benchmarks/bench_lp.py`` compares the two paths.
"""

import os

_FALSY = {"0", "false", "no", "off", ""}


def _jit_requested() -> bool:
    return os.environ.get("GRCERT_JIT", "1").strip().lower() not in _FALSY


JIT_ENABLED = False
if _jit_requested():
    try:
        import numba  # noqa: F401

        JIT_ENABLED = True
    except ImportError:
        JIT_ENABLED = False

if JIT_ENABLED:
    from numba import njit
else:

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrapper(func):
            return func

        return wrapper

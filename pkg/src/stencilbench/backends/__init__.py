"""Kernel backend selection.

The compiled extension core (_ckernels, Cython) is preferred when it built;
the numpy lane implements every kernel and is always available.  Both lanes
produce bitwise-identical float32 results: the C code mirrors the numpy op
order and is compiled with -ffp-contract=off.

Selection happens at import time and can be forced with
STENCILBENCH_BACKEND=python|compiled.
"""

from __future__ import annotations

import os

from . import python_kernels

try:
    from . import _ckernels
    HAVE_COMPILED = True
except ImportError:
    _ckernels = None
    HAVE_COMPILED = False

_env = os.environ.get("STENCILBENCH_BACKEND", "").strip().lower()
if _env == "python":
    DEFAULT_BACKEND = "python"
elif _env == "compiled":
    if not HAVE_COMPILED:
        raise ImportError("STENCILBENCH_BACKEND=compiled but the extension is not built")
    DEFAULT_BACKEND = "compiled"
else:
    DEFAULT_BACKEND = "compiled" if HAVE_COMPILED else "python"

BACKENDS = ("python", "compiled") if HAVE_COMPILED else ("python",)


def active_backend() -> str:
    return DEFAULT_BACKEND


def get_impl(kernel_name: str, backend: str | None = None):
    """Resolve a kernel implementation; compiled lane falls back to numpy
    for kernels it does not provide."""
    chosen = backend or DEFAULT_BACKEND
    if chosen == "compiled":
        if not HAVE_COMPILED:
            raise KeyError("compiled backend not available")
        fn = getattr(_ckernels, "k_" + kernel_name, None)
        if fn is not None:
            return fn
    return python_kernels.IMPLS[kernel_name]

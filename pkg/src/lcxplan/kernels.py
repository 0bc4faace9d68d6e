"""Kernel backend selection.

The compiled extension is used when importable; set ``LCXPLAN_PURE_PYTHON=1``
to force the numpy fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("LCXPLAN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        pass

single_path_block = _impl.single_path_block
coherent_block = _impl.coherent_block


def get_backend(name: str):
    """Kernel module by name ("cython" or "python"), for benchmarks and tests."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")

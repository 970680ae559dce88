"""Backend selection for the hot kernels.

The compiled extension is used when importable; setting
JANGBENCH_PURE_PYTHON=1 forces the numpy fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("JANGBENCH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on build
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

assemble = _impl.assemble
thomas = _impl.thomas


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` ('python' or 'cython'; default: active)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels
    raise ValueError(f"unknown backend {name!r}")

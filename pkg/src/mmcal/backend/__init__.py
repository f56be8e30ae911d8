"""Kernel backend selection.

Two interchangeable implementations of the accumulation kernels exist:
the Cython extension ``_core`` and the pure-Python twin ``_pykernels``.
Both run the same fixed-order loops and must agree bit for bit; the
compiled one is picked at import when available. ``MMCAL_BACKEND``
(``compiled`` or ``python``) forces the choice explicitly.
"""

import os


def _select():
    forced = os.environ.get("MMCAL_BACKEND", "").strip().lower()
    if forced in ("python", "py", "pure"):
        from . import _pykernels

        return _pykernels, "python"
    if forced in ("compiled", "c", "cython"):
        from . import _core

        return _core, "compiled"
    if forced:
        raise ValueError(f"unknown MMCAL_BACKEND={forced!r}; use 'compiled' or 'python'")
    try:
        from . import _core

        return _core, "compiled"
    except ImportError:
        from . import _pykernels

        return _pykernels, "python"


kernels, active_backend = _select()


def get_impl(name):
    """Load a specific implementation by name (for benchmarks and tests)."""
    if name == "python":
        from . import _pykernels

        return _pykernels
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")

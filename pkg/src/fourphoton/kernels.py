"""Backend selection for the threshold-search kernels.

The compiled extension is used when it imports; set ``FOURPHOTON_PURE=1``
to force the pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("FOURPHOTON_PURE", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

PENALTY = _kernels_py.PENALTY
ch_parts = _impl.ch_parts
eta_objective = _impl.eta_objective
eta_grid = _impl.eta_grid
nelder_mead = _impl.nelder_mead


def backends() -> dict[str, object]:
    """Every importable backend by name (used by the benchmark and tests)."""
    out: dict[str, object] = {"python": _kernels_py}
    try:
        from . import _ckernels  # type: ignore[attr-defined]

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out

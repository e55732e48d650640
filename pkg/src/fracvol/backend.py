"""Backend selection for the hot numeric kernels.

Two interchangeable implementations exist for every hot kernel: a numba
``@njit`` version and a pure-numpy one.  The active backend is chosen once at
import time from the ``FRACVOL_BACKEND`` environment variable:

* ``FRACVOL_BACKEND=numpy``  -- force the pure-numpy fallback.
* ``FRACVOL_BACKEND=numba``  -- require numba (ImportError if missing).
* unset                      -- use numba when importable, numpy otherwise.

Both backends agree to floating-point round-off, and each backend is fully
deterministic on its own; see ``benchmarks/bench_backends.py`` for a speed
comparison.
"""

from __future__ import annotations

import os

_ENV_VAR = "FRACVOL_BACKEND"


def _resolve() -> str:
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        import numba  # noqa: F401  (fail loudly if requested but absent)

        return "numba"
    if choice not in ("", "auto"):
        raise ValueError(
            f"{_ENV_VAR} must be 'numba', 'numpy' or unset, got {choice!r}"
        )
    try:
        import numba  # noqa: F401

        return "numba"
    except ImportError:
        return "numpy"


BACKEND: str = _resolve()


def using_numba() -> bool:
    return BACKEND == "numba"

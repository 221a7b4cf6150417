"""Kernel backend selection.

The hot loops (event-time aggregation, gradient scatter, concordance pairs)
have a numba-jitted implementation and a pure-numpy fallback. The default is
numba when importable; set ``SURVCLUSTER_BACKEND=numpy`` to force the
fallback, or ``SURVCLUSTER_BACKEND=numba`` to fail loudly if numba is absent.
``use_backend`` overrides the environment for the current process (used by
the tests and the benchmark).
"""

from __future__ import annotations

import logging
import os

from . import _kernels_numpy
from .errors import InvalidInputError

_ENV_VAR = "SURVCLUSTER_BACKEND"
_log = logging.getLogger(__name__)

_override: str | None = None
_resolved = None


def _load_numba_kernels():
    from . import _kernels_numba

    return _kernels_numba


def _resolve(choice: str):
    if choice == "numpy":
        return _kernels_numpy
    if choice == "numba":
        return _load_numba_kernels()
    if choice == "auto":
        try:
            return _load_numba_kernels()
        except ImportError:
            _log.info("numba unavailable; falling back to numpy kernels")
            return _kernels_numpy
    raise InvalidInputError(f"unknown backend {choice!r}; expected 'numba', 'numpy', or 'auto'")


def use_backend(name: str | None) -> None:
    """Force a backend ('numba' or 'numpy'); ``None`` restores env/auto selection."""
    global _override, _resolved
    if name is not None and name not in ("numba", "numpy"):
        raise InvalidInputError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")
    _override = name
    _resolved = None


def get_backend():
    """Return the active kernels module (resolved once, then cached)."""
    global _resolved
    if _resolved is None:
        choice = _override or os.environ.get(_ENV_VAR, "auto").strip().lower()
        _resolved = _resolve(choice)
    return _resolved


def backend_name() -> str:
    return get_backend().NAME

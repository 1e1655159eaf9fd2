"""Numerical kernel backends.

The compiled extension (``_native``, Cython) is preferred when built; the
NumPy implementation (``_pure``) is the always-available fallback. Selection
happens once at import and can be forced with ``PAIRSCALE_KERNELS=numpy`` or
``PAIRSCALE_KERNELS=native``. ``use_backend`` exists so tests and benchmarks
can exercise both; switching is not thread-safe and is meant for setup code,
not inner loops.
"""

import os
from contextlib import contextmanager

from . import _pure

_BACKENDS = {"numpy": _pure}
try:
    from . import _native

    _BACKENDS["native"] = _native
except ImportError:
    _native = None


def _select_default():
    forced = os.environ.get("PAIRSCALE_KERNELS")
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(
                f"PAIRSCALE_KERNELS={forced!r} but available backends are "
                f"{sorted(_BACKENDS)} (is the extension built?)"
            )
        return forced
    return "native" if "native" in _BACKENDS else "numpy"


_active_name = _select_default()


def available_backends():
    """Names of the importable kernel backends."""
    return sorted(_BACKENDS)


def backend_name():
    """Name of the backend currently answering kernel calls."""
    return _active_name


def set_backend(name):
    global _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {sorted(_BACKENDS)}")
    _active_name = name


@contextmanager
def use_backend(name):
    """Temporarily switch the active kernel backend."""
    previous = _active_name
    set_backend(name)
    try:
        yield _BACKENDS[name]
    finally:
        set_backend(previous)


def log_ndtr(x):
    return _BACKENDS[_active_name].log_ndtr(x)


def case_v_system(m, q, prior_weight):
    return _BACKENDS[_active_name].case_v_system(m, q, prior_weight)

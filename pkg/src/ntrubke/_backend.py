"""Kernel selection.

The compiled Cython kernels are used when importable; otherwise the numpy
fallback. ``NTRUBKE_BACKEND`` (``compiled`` or ``python``) forces a choice at
import time, and :func:`use_backend` switches temporarily (benchmarks, tests).
"""

import contextlib
import os

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _pykernels}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled


def available_backends():
    return sorted(_BACKENDS)


def _initial():
    requested = os.environ.get("NTRUBKE_BACKEND", "").strip().lower()
    if requested:
        if requested not in _BACKENDS:
            raise ImportError(
                f"NTRUBKE_BACKEND={requested!r} is not available "
                f"(have: {', '.join(available_backends())})"
            )
        return requested
    return "compiled" if _compiled is not None else "python"


_active = _initial()


def active_backend():
    return _active


def set_backend(name):
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}")
    _active = name


@contextlib.contextmanager
def use_backend(name):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def cyclic_convolve(a, b, modulus):
    return _BACKENDS[_active].cyclic_convolve(a, b, modulus)


def inverse_mod_prime(f, p):
    return _BACKENDS[_active].inverse_mod_prime(f, p)

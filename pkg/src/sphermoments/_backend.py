"""Kernel backend selection: compiled extension with pure-Python fallback.

The compiled module ``sphermoments._kernels`` is preferred when it built;
otherwise ``sphermoments._kernels_py`` provides identical behaviour.  Set
SPHERMOMENTS_BACKEND=python|compiled to force a choice at import time, or
call :func:`use_backend` to switch at runtime (used by the benchmark).
"""

import os

from . import _kernels_py

_BACKENDS = {"python": _kernels_py}
try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None
else:
    _BACKENDS["compiled"] = _compiled

impl = None
name = None


def available_backends():
    """Backend names usable with :func:`use_backend`, preferred first."""
    return tuple(n for n in ("compiled", "python") if n in _BACKENDS)


def use_backend(which):
    """Select the kernel backend by name; returns the previous name."""
    global impl, name
    if which not in _BACKENDS:
        raise ValueError(
            f"unknown backend {which!r}; available: {available_backends()}"
        )
    previous = name
    impl = _BACKENDS[which]
    name = which
    return previous


def get_backend():
    """Name of the active kernel backend."""
    return name


_forced = os.environ.get("SPHERMOMENTS_BACKEND")
use_backend(_forced if _forced else available_backends()[0])

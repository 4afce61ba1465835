"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. ``FASCOPULA_BACKEND=python`` forces the fallback.
"""

import contextlib
import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled


def available():
    return sorted(_BACKENDS)


def _initial():
    wanted = os.environ.get("FASCOPULA_BACKEND", "").strip().lower()
    if wanted:
        if wanted not in _BACKENDS:
            log.warning("backend %r unavailable, using fallback", wanted)
            return _kernels_py
        return _BACKENDS[wanted]
    return _compiled if _compiled is not None else _kernels_py


kernels = _initial()


def get(name=None):
    """Return the kernel module ``name``, or the active one."""
    if name is None:
        return kernels
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available()}") from None


def set_backend(name):
    global kernels
    kernels = get(name)
    return kernels


@contextlib.contextmanager
def use_backend(name):
    global kernels
    previous = kernels
    kernels = get(name)
    try:
        yield kernels
    finally:
        kernels = previous

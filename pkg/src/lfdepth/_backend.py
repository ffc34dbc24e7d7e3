"""Kernel backend selection.

The hot loops (census codes, multi-view cost aggregation, SGM path sweeps)
exist twice: a Cython extension (lfdepth._kernels) and a pure-numpy fallback
(lfdepth._kernels_py) with identical signatures and bit-identical outputs.
The compiled one is picked at import when present; LFDEPTH_BACKEND=python
forces the fallback, and use_backend() switches at runtime (used by the
benchmark to time both).
"""
import os

from lfdepth import _kernels_py

try:
    from lfdepth import _kernels as _compiled
except ImportError:
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_forced = os.environ.get("LFDEPTH_BACKEND", "").strip().lower()
if _forced and _forced not in _BACKENDS:
    raise ImportError(f"LFDEPTH_BACKEND={_forced!r} not available; choices: {sorted(_BACKENDS)}")

_active = _BACKENDS[_forced] if _forced else _BACKENDS.get("compiled", _kernels_py)


def kernels():
    """Active kernel module."""
    return _active


def backend_name():
    return "compiled" if _active is _compiled else "python"


def compiled_available():
    return _compiled is not None


def use_backend(name):
    """Switch kernel backend ("compiled" or "python"). Returns the previous name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(_BACKENDS)}")
    previous = backend_name()
    _active = _BACKENDS[name]
    return previous

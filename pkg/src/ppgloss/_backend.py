"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the NumPy
wavefront implementation in :mod:`ppgloss._pycore` takes over.
:func:`use_backend` switches explicitly (tests and benchmarks use it to
exercise both paths).
"""

import logging

from . import _pycore

logger = logging.getLogger(__name__)

try:
    from . import _ccore
except ImportError:  # extension not built
    _ccore = None
    logger.debug("compiled kernels unavailable, using NumPy fallback")

_active = _ccore if _ccore is not None else _pycore


def available_backends():
    return ["python"] + (["compiled"] if _ccore is not None else [])


def active_backend():
    return "compiled" if _active is _ccore and _ccore is not None else "python"


def use_backend(name):
    """Select ``"compiled"`` or ``"python"`` kernels; returns the previous name."""
    global _active
    previous = active_backend()
    if name == "compiled":
        if _ccore is None:
            raise RuntimeError("compiled kernels are not built")
        _active = _ccore
    elif name == "python":
        _active = _pycore
    else:
        raise ValueError(f"unknown backend {name!r}")
    return previous


def soft_dtw_forward(D, gamma):
    return _active.soft_dtw_forward(D, float(gamma))


def soft_dtw_backward(D, R, gamma):
    return _active.soft_dtw_backward(D, R, float(gamma))


def soft_dtw_forward_weights(D, gamma, symmetric=False):
    return _active.soft_dtw_forward_weights(D, float(gamma), bool(symmetric))


def soft_dtw_backward_weights(W):
    return _active.soft_dtw_backward_weights(W)


def frechet_dp(dist):
    return float(_active.frechet_dp(dist))

"""Kernel backend selection.

Set ARTIFACT_NO_NUMBA=1 to force the pure numpy kernels.
"""
import os

USE_NUMBA = os.environ.get("ARTIFACT_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes", "on")

if USE_NUMBA:
    try:
        import numba  # noqa: F401
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def kernels(name=None):
    """Return the kernel module for `name` ('numba'/'numpy'), default from the env flag."""
    name = name or backend_name()
    if name == "numba":
        from . import _kernels_nb as k
    else:
        from . import _kernels_np as k
    return k

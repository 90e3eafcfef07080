"""Backend selection for the hot field/trajectory kernels.

The compiled Cython module is used when importable; otherwise, or when the
environment variable ``SUPERBAND_PURE`` is set to a non-empty value other than
``0``, the numpy implementation is used. ``BACKEND`` names the active choice.
"""
import os

from . import _pykernels

if os.environ.get("SUPERBAND_PURE", "0") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

superband_field = _impl.superband_field
guiding_velocity = _impl.guiding_velocity
rk4_trajectories = _impl.rk4_trajectories

__all__ = ["BACKEND", "superband_field", "guiding_velocity", "rk4_trajectories"]

"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it is importable; set
``QEILAB_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

if os.environ.get("QEILAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND: str = _impl.NAME
jb_real = _impl.jb_real
jb_real_many = _impl.jb_real_many
midpoint_kernel = _impl.midpoint_kernel


def compiled_backend():
    """The compiled module, or None if it is not built."""
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


def python_backend():
    return _pykernels

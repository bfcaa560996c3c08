"""Kernel selection: compiled Cython core when importable, pure Python otherwise.

Set ``EVANSHOCK_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _shoot_py
from ._shoot_py import ADJOINT, FORWARD, KernelError

BACKEND = "python"
_impl = _shoot_py
if not os.environ.get("EVANSHOCK_PURE_PYTHON"):
    try:
        from . import _shoot as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _shoot_py

integrate = _impl.integrate
integrate_python = _shoot_py.integrate

__all__ = ["ADJOINT", "BACKEND", "FORWARD", "KernelError", "integrate", "integrate_python"]

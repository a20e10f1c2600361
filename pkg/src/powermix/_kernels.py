"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation is used. Setting ``POWERMIX_PURE=1`` forces the numpy path.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("POWERMIX_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

monotone_slopes = _impl.monotone_slopes
hermite_eval = _impl.hermite_eval
sigma_sum = _impl.sigma_sum
zeta_partial = _impl.zeta_partial
SMALL_ARG = _kernels_py.SMALL_ARG


def get_backend(name):
    """Return the kernel module for ``"python"`` or ``"cython"``."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")

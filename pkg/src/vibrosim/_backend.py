"""Select the kernel implementation at import time.

The compiled extension is used when it was built; set
``VIBROSIM_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _pykernels

if os.environ.get("VIBROSIM_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = _pykernels
        BACKEND = "python"


def get_kernels(name=None):
    """Return a kernel module by name (``"cython"``/``"python"``) or the default."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")

"""Backend selection for the hot loops.

The compiled extension is used when it was built; set ``HOLOLOOP_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _fallback

BACKENDS = {"python": _fallback}

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None
else:
    BACKENDS["cython"] = _kernels

if _kernels is not None and not os.environ.get("HOLOLOOP_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]
jacobi_eigh = _impl.jacobi_eigh
overlap_product = _impl.overlap_product
projector_steps = _impl.projector_steps

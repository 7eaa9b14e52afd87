"""Select the kernel implementation at import time.

The compiled ``_ckernels`` extension is used when it imports cleanly; set
``FDRELAY_BACKEND=python`` to force the pure-Python fallback.
"""

import os

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _ckernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if os.environ.get("FDRELAY_BACKEND", "").lower() == "python" or compiled_kernels is None:
    kernels = _pykernels
    BACKEND = "python"
else:
    kernels = compiled_kernels
    BACKEND = "cython"

"""Pick the compiled kernels when importable, the numpy fallback otherwise.

Set ``HARMONIC_KIT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

kernels = _pykernels
BACKEND = "python"

if not os.environ.get("HARMONIC_KIT_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        kernels = _ckernels
        BACKEND = "cython"

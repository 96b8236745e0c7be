"""Select the compiled kernels when available, else the pure-Python twins.

Set ``MOPENS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pycore

kernels = _pycore
BACKEND = "python"

if not os.environ.get("MOPENS_PURE_PYTHON"):
    try:
        from . import _core
    except ImportError:
        pass
    else:
        kernels = _core
        BACKEND = "compiled"

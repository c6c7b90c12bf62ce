"""Hot inner loops, compiled when possible.

The Cython build (``_ckernels``) is used if it imports; otherwise, or when the
environment variable ``CEORBIT_PURE`` is set to a non-empty value, the
pure-Python versions in ``_pykernels`` are used.  ``BACKEND`` names the one in
effect.
"""

import os

from . import _pykernels as py

if os.environ.get("CEORBIT_PURE"):
    compiled = None
else:
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else py
BACKEND = "compiled" if compiled is not None else "python"

eset_level_codes = _impl.eset_level_codes
submasks = py.submasks

__all__ = ["BACKEND", "eset_level_codes", "submasks", "py", "compiled"]

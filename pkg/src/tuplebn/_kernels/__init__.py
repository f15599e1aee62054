"""Hot-loop kernels: compiled extension when available, numpy fallback otherwise.

Set TUPLEBN_PURE_PYTHON=1 to force the fallback (used by the benchmark and
the twin-equality tests). Both backends are output-identical by contract.
"""

import os

from . import _pykernels

if os.environ.get("TUPLEBN_PURE_PYTHON"):
    _impl = _pykernels
    HAVE_COMPILED = False
else:
    try:
        from . import _ckernels as _impl

        HAVE_COMPILED = True
    except ImportError:
        _impl = _pykernels
        HAVE_COMPILED = False

BACKEND = "compiled" if HAVE_COMPILED else "python"
sample_node = _impl.sample_node
count_tuples = _impl.count_tuples

__all__ = ["BACKEND", "HAVE_COMPILED", "sample_node", "count_tuples"]

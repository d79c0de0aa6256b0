"""Hot kernels: compiled when available, numpy otherwise.

Set ``COVERTKEY_PURE_PYTHON=1`` to force the numpy implementation.
"""
import os

from . import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("COVERTKEY_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

_impl = compiled_backend or python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

mi_matrix = _impl.mi_matrix
mi_rows = _impl.mi_rows
row_matches = _impl.row_matches

__all__ = ["BACKEND", "mi_matrix", "mi_rows", "row_matches", "python_backend", "compiled_backend"]

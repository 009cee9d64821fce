"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when importable; set
``EEGPOISON_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

if os.environ.get("EEGPOISON_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

best_gini_split = _impl.best_gini_split
stump_impurity = _impl.stump_impurity
knn_predict = _impl.knn_predict

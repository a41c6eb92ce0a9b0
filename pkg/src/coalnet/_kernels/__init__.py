"""Solver kernels with backend selection at import time.

The compiled Cython kernel is used when its extension module is importable;
otherwise the pure-Python kernel takes over transparently. Set
COALNET_FORCE_PURE=1 to force the fallback (used by the benchmark and by the
backend-equivalence tests).
"""

import os

if os.environ.get("COALNET_FORCE_PURE") == "1":
    from . import _pure as _impl
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _pure as _impl

BACKEND = _impl.BACKEND
mrc_snr_value = _impl.mrc_snr_value
solve_p0 = _impl.solve_p0
p0_table = _impl.p0_table

__all__ = ["BACKEND", "mrc_snr_value", "solve_p0", "p0_table"]

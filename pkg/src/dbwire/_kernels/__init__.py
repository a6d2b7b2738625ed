"""Hot numeric kernels with a compiled core and a pure-Python fallback.

The compiled extension is preferred when it imported cleanly; set
DBWIRE_PURE=1 to force the fallback (useful for benchmarking and for
debugging suspected kernel issues). Both implementations share one
contract and are cross-checked in the test suite.
"""

import os

from . import _fallback

if os.environ.get("DBWIRE_PURE"):
    _impl = _fallback
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _fallback

BACKEND = _impl.BACKEND
scan_accumulate = _impl.scan_accumulate
render_depth = _impl.render_depth

__all__ = ["BACKEND", "scan_accumulate", "render_depth"]

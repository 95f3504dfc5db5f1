"""Grid-sweep kernels with a compiled core and a numpy fallback.

The compiled extension is preferred when it imported cleanly; set
``MEDBOUNDS_BACKEND=numpy`` (or ``compiled``) to force a choice. Both
backends expose the same two functions and agree to machine precision.
"""

import os

_requested = os.environ.get("MEDBOUNDS_BACKEND", "").strip().lower()

if _requested == "numpy":
    from . import _grid_py as _impl

    BACKEND = "numpy"
elif _requested == "compiled":
    from . import _grid as _impl  # ImportError here is deliberate: user asked for it

    BACKEND = "compiled"
else:
    try:
        from . import _grid as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _grid_py as _impl

        BACKEND = "numpy"

pair_factor_extrema = _impl.pair_factor_extrema
effects_trace = _impl.effects_trace

__all__ = ["BACKEND", "pair_factor_extrema", "effects_trace"]

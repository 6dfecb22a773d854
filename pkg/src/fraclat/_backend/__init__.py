"""Backend selection: compiled Cython core with a NumPy fallback.

Set ``FRACLAT_BACKEND=python`` or ``FRACLAT_BACKEND=compiled`` to force a
choice; the default prefers the compiled core when it imported cleanly.
"""

import os

from . import fallback

_requested = os.environ.get("FRACLAT_BACKEND", "auto").lower()

if _requested == "python":
    _impl = fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "FRACLAT_BACKEND=compiled but the extension is not built; "
                "run `pip install -e . --no-build-isolation`"
            )
        _impl = fallback
        BACKEND = "python"

pair_energy = _impl.pair_energy
pair_energy_grad = _impl.pair_energy_grad
smoothed_tv_energy_grad = _impl.smoothed_tv_energy_grad
strip_pair_energy = _impl.strip_pair_energy

"""Selects the permutation kernel backend at import time.

The compiled extension is preferred; the vectorized numpy fallback is used
when it is missing. Set SPEARPERM_BACKEND=python or SPEARPERM_BACKEND=c to
force a choice (forcing "c" raises if the extension did not build).
"""

import os

from spearperm import _pykernels

try:
    from spearperm import _ckernels
except ImportError:
    _ckernels = None

_FORCED = os.environ.get("SPEARPERM_BACKEND", "").strip().lower()

if _FORCED == "python":
    _active = _pykernels
elif _FORCED == "c":
    if _ckernels is None:
        raise ImportError(
            "SPEARPERM_BACKEND=c requested but the compiled extension is "
            "not available; build it with `python setup.py build_ext --inplace`"
        )
    _active = _ckernels
elif _FORCED:
    raise ImportError(f"unknown SPEARPERM_BACKEND value: {_FORCED!r}")
else:
    _active = _ckernels if _ckernels is not None else _pykernels

BACKEND_NAME = _active.BACKEND_NAME
permute_stats = _active.permute_stats

# shared helpers: single implementation regardless of backend
shuffles_from_bits = _pykernels.shuffles_from_bits
stats_for_perms = _pykernels.stats_for_perms
observed_stat = _pykernels.observed_stat


def available_backends():
    """Names of importable backends, compiled first when present."""
    names = []
    if _ckernels is not None:
        names.append(_ckernels.BACKEND_NAME)
    names.append(_pykernels.BACKEND_NAME)
    return names

"""Kernel lane selection: compiled extension when available, numpy otherwise.

``PRIMEOMEGA_BACKEND`` forces a lane: ``cython``, ``python``, or ``auto``
(default).  Within one lane all checkpoint output is bit-reproducible; across
lanes the xi/eta sums may differ in the last couple of ulps because the two
lanes evaluate log() through different code paths.
"""

import os

from . import _slowcore

_choice = os.environ.get("PRIMEOMEGA_BACKEND", "auto").lower()

if _choice not in ("auto", "cython", "python"):
    raise RuntimeError(f"unknown PRIMEOMEGA_BACKEND value: {_choice!r}")

if _choice == "python":
    core = _slowcore
else:
    try:
        from . import _fastcore as core  # type: ignore[no-redef]
    except ImportError:
        if _choice == "cython":
            raise RuntimeError("compiled core requested but not built")
        core = _slowcore

BACKEND = core.BACKEND_NAME
SCALE_BITS = core.SCALE_BITS

assert _slowcore.SCALE_BITS == SCALE_BITS

sieve_block_fill = core.sieve_block_fill
StatsCore = core.StatsCore
AuxCore = core.AuxCore


def scaled_to_float(acc: int) -> float:
    """Round an exact scaled-integer accumulator to the nearest float.

    float() rounds the integer once; the power-of-two rescale is exact, so the
    result is the correctly rounded value of acc * 2**-SCALE_BITS.
    """
    import math

    return math.ldexp(float(acc), -SCALE_BITS)

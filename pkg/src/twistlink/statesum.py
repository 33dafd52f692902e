"""Kernel selector: compiled state-sum core with pure-Python fallback.

Set TWISTLINK_PURE=1 to force the Python kernel (used by the benchmark
and the cross-check tests).
"""

from __future__ import annotations

import os

from . import _statesum_py

pure_state_counts = _statesum_py.state_counts

try:
    from . import _statesum  # type: ignore[attr-defined]

    compiled_state_counts = _statesum.state_counts
    HAVE_COMPILED = True
except ImportError:
    compiled_state_counts = None
    HAVE_COMPILED = False

if HAVE_COMPILED and not os.environ.get("TWISTLINK_PURE"):
    state_counts = compiled_state_counts
    ACTIVE_KERNEL = "compiled"
else:
    state_counts = pure_state_counts
    ACTIVE_KERNEL = "pure"

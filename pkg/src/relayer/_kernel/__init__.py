"""Scoring kernel with compiled/pure twin implementations.

The compiled extension is preferred when it imported cleanly; the
pure-Python module is the always-available fallback and the reference
for correctness. Both expose ``evaluate`` and ``evaluate_detail`` with
identical signatures and bit-identical results.
"""

from . import _pure

try:
    from . import _speedups
    _active = _speedups
except ImportError:  # extension not built on this install
    _speedups = None
    _active = _pure

evaluate = _active.evaluate
evaluate_detail = _active.evaluate_detail
ACTIVE_IMPL = _active.IMPL


def implementations():
    """Name -> module map of every available kernel implementation."""
    impls = {"pure": _pure}
    if _speedups is not None:
        impls["speedups"] = _speedups
    return impls

"""Selects the box-intersection kernel at import time.

The compiled extension is used when it imported cleanly; otherwise the
pure-Python twin takes over.  Set ``GROUND3D_PURE_PYTHON=1`` to force the
fallback (the benchmark uses this to compare both).
"""

from __future__ import annotations

import os

from . import _clip_py

if os.environ.get("GROUND3D_PURE_PYTHON"):
    _impl = _clip_py
else:
    try:
        from . import _clip_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _clip_py

BACKEND: str = _impl.BACKEND

box_intersection_volume = _impl.box_intersection_volume
box_iou = _impl.box_iou
iou_pairs = _impl.iou_pairs
iou_matrix = _impl.iou_matrix


def available_backends() -> dict[str, object]:
    """Importable kernel modules keyed by backend name."""
    backends: dict[str, object] = {_clip_py.BACKEND: _clip_py}
    try:
        from . import _clip_cy

        backends[_clip_cy.BACKEND] = _clip_cy
    except ImportError:
        pass
    return backends

"""Game kernel selection.

The compiled ``_core`` extension is used when it imports; otherwise, or when
the environment sets ``DOTSNET_PURE=1``, the pure-Python ``_pycore`` takes
its place.  Both expose ``play_game``, ``play_games`` and ``net_scores`` and
produce identical results for identical streams.
"""
from __future__ import annotations

import os

from . import _pycore

if os.environ.get("DOTSNET_PURE", "") not in ("", "0"):
    _impl = _pycore
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _pycore

BACKEND: str = _impl.BACKEND
play_game = _impl.play_game
play_games = _impl.play_games
net_scores = _impl.net_scores


def backend(name: str):
    """Module implementing kernel ``name`` ("cython" or "python")."""
    if name == "python":
        return _pycore
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown kernel backend {name!r}")

"""Backend selection for the hot per-trial loops.

The compiled extension is used when it is importable, unless the environment
variable ``RADARBANDITS_PURE_PYTHON`` is set to a true value.
"""
from __future__ import annotations

import os
from types import SimpleNamespace

from . import _pykernels
from ._pykernels import CP, MC, SAA, RoundsResult

__all__ = ["BACKEND", "CP", "MC", "SAA", "RoundsResult", "load_backend", "simulate_rounds", "track"]


def _compiled():
    from . import _ckernels

    def simulate_rounds(*args, **kwargs) -> RoundsResult:
        return RoundsResult(*_ckernels.simulate_rounds(*args, **kwargs))

    return SimpleNamespace(name="cython", simulate_rounds=simulate_rounds, track=_ckernels.track)


def load_backend(name: str):
    """Return a namespace with ``simulate_rounds`` and ``track`` for ``"cython"`` or ``"python"``."""
    if name == "cython":
        return _compiled()
    if name == "python":
        return SimpleNamespace(name="python", simulate_rounds=_pykernels.simulate_rounds, track=_pykernels.track)
    raise ValueError(f"unknown backend {name!r}")


def _default():
    if os.environ.get("RADARBANDITS_PURE_PYTHON", "").lower() in ("1", "true", "yes"):
        return load_backend("python")
    try:
        return load_backend("cython")
    except ImportError:
        return load_backend("python")


_backend = _default()
BACKEND = _backend.name
simulate_rounds = _backend.simulate_rounds
track = _backend.track

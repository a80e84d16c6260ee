"""Kernel backend selection.

The compiled Cython module is used when it was built; otherwise the numpy
implementation is loaded. Setting ``QSKYRMION_PURE_PYTHON=1`` forces the
fallback.
"""

from __future__ import annotations

import importlib
import os
from types import ModuleType


def load_backend(name: str) -> ModuleType:
    if name == "cython":
        return importlib.import_module("qskyrmion._ckernels")
    if name == "python":
        return importlib.import_module("qskyrmion._pykernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        load_backend("cython")
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


if os.environ.get("QSKYRMION_PURE_PYTHON", "") not in ("", "0"):
    BACKEND = "python"
else:
    BACKEND = available_backends()[0]

impl = load_backend(BACKEND)

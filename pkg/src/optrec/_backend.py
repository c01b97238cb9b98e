"""Kernel backend selection.

The compiled extension is used when it imports; set ``OPTREC_BACKEND=python``
to force the numpy fallback.
"""
import importlib
import os

from . import _pykernels


def load(name: str):
    if name == "python":
        return _pykernels
    if name == "compiled":
        return importlib.import_module("optrec._kernels")
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    names = ["python"]
    try:
        load("compiled")
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names


def _select():
    if os.environ.get("OPTREC_BACKEND", "").lower() == "python":
        return _pykernels
    try:
        return load("compiled")
    except ImportError:
        return _pykernels


kernels = _select()

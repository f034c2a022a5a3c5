"""Hot integer kernels with a compiled fast path.

The Cython extension ``_ckernels`` is used when it was built and the modulus
fits in 63 bits; otherwise the pure-Python twin in ``_kernels_py`` runs.  Set
``PADIC_GIBBS_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    if os.environ.get("PADIC_GIBBS_PURE_PYTHON"):
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"
_LIMIT = 1 << 63

__all__ = ["BACKEND", "config_weights", "surviving_children"]


def _fast(modulus: int) -> bool:
    return _ckernels is not None and modulus < _LIMIT


def config_weights(nv, vertex_factors, pairs, modulus):
    if _fast(modulus):
        return _ckernels.config_weights(nv, list(vertex_factors), list(pairs), modulus)
    return _kernels_py.config_weights(nv, vertex_factors, pairs, modulus)


def surviving_children(equations, nvars, p, level, parents):
    if nvars not in (1, 2):
        raise ValueError("only 1 or 2 variables are supported")
    if _fast(p**level):
        return _ckernels.surviving_children(equations, nvars, p, level, list(parents))
    return _kernels_py.surviving_children(equations, nvars, p, level, parents)

"""Query kernels: compiled kd-tree core with a numpy brute-force fallback.

``HAVE_COMPILED`` reports whether the Cython extension was importable;
:mod:`condent.spatial` picks the backend per index accordingly.
"""

try:
    from . import _core  # noqa: F401

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _core = None
    HAVE_COMPILED = False

from . import fallback, tree  # noqa: F401

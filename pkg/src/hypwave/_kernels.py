"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting the environment
variable ``HYPWAVE_PURE_PYTHON=1`` forces the pure-Python fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("HYPWAVE_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

bessel_series = _impl.bessel_series
miller_j = _impl.miller_j
kummer_series = _impl.kummer_series
kummer_walk = _impl.kummer_walk
hill_propagate = _impl.hill_propagate
coefficient_value = _impl.coefficient_value
dopri_hill = _pykernels.dopri_hill

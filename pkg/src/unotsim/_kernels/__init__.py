"""Kernel backend selection.

The compiled Cython core is used when it was built; otherwise the vectorized
NumPy implementation takes over with identical semantics.  Set
``UNOTSIM_PURE_PYTHON=1`` to force the fallback (used by the benchmark and by
tests that compare the two).
"""

import os

import numpy as np

from . import _purepy

if os.environ.get("UNOTSIM_PURE_PYTHON", "0") == "1":
    _backend = _purepy
else:
    try:
        from . import _core as _backend  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _backend = _purepy


def backend_name() -> str:
    return _backend.BACKEND


def available_backends():
    """List of importable backend modules (used by the benchmark)."""
    backends = [_purepy]
    try:
        from . import _core

        backends.append(_core)
    except ImportError:
        pass
    return backends


def _c_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _c_c128(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def chi_from_unitary_kraus(weights, ops):
    return _backend.chi_from_unitary_kraus(_c_f64(weights), _c_c128(ops))


def generator_chi_batch(axes, eps):
    return _backend.generator_chi_batch(_c_f64(axes), _c_f64(eps))


def waveplate_chi_batch(base_angles, offsets):
    return _backend.waveplate_chi_batch(_c_f64(base_angles), _c_f64(offsets))


def fidelity_deviation_batch(chi):
    return _backend.fidelity_deviation_batch(_c_c128(chi))

"""Backend equivalence: the compiled core and the NumPy fallback must agree."""

import math

import numpy as np
import pytest

from unotsim import _kernels
from unotsim._kernels import _purepy
from unotsim.channels import axis_set, plate_angles_for
from unotsim.pauli import PAULIS, RngStream, haar_random_unitary

try:
    from unotsim._kernels import _core
except ImportError:  # pure-python install
    _core = None

BACKENDS = [_purepy] + ([_core] if _core is not None else [])
IDS = ["purepy"] + (["cython"] if _core is not None else [])


def reference_chi(weights, ops):
    """Slow textbook construction used as the kernel oracle."""
    coeffs = np.stack([[np.trace(p @ op) / 2 for p in PAULIS] for op in ops])
    return np.einsum("k,ki,kj->ij", weights, coeffs, coeffs.conj())


def test_compiled_backend_importable():
    # the build in this repository compiles the extension; the fallback is
    # only expected when UNOTSIM_SKIP_EXT was set at install time
    assert _kernels.backend_name() in ("cython", "purepy")


@pytest.mark.parametrize("backend", BACKENDS, ids=IDS)
def test_chi_from_unitary_kraus_matches_reference(backend):
    gen = RngStream(0).generator()
    for _ in range(10):
        k = int(gen.integers(1, 6))
        w = gen.dirichlet(np.ones(k))
        ops = np.stack([haar_random_unitary(gen) for _ in range(k)])
        got = backend.chi_from_unitary_kraus(w, np.ascontiguousarray(ops))
        np.testing.assert_allclose(got, reference_chi(w, ops), atol=1e-13)


@pytest.mark.skipif(_core is None, reason="compiled kernels not built")
class TestBackendsAgree:
    def test_generator_batch(self):
        gen = RngStream(1).generator()
        for n in (3, 4, 6, 8):
            axes = np.ascontiguousarray(axis_set(n).axes)
            eps = gen.uniform(-0.3, 0.3, size=(50, n, 3))
            np.testing.assert_allclose(
                _core.generator_chi_batch(axes, eps),
                _purepy.generator_chi_batch(axes, eps),
                atol=1e-14,
            )

    def test_generator_batch_zero_norm_row(self):
        axes = np.ascontiguousarray(axis_set(3).axes)
        eps = np.zeros((2, 3, 3))
        eps[1, 0, 1] = 0.2
        np.testing.assert_allclose(
            _core.generator_chi_batch(axes, eps),
            _purepy.generator_chi_batch(axes, eps),
            atol=1e-15,
        )

    def test_waveplate_batch(self):
        gen = RngStream(2).generator()
        for n in (3, 4, 6, 8):
            base = np.ascontiguousarray(plate_angles_for(axis_set(n)))
            offs = gen.uniform(-math.radians(5), math.radians(5), size=(50, n, 3))
            np.testing.assert_allclose(
                _core.waveplate_chi_batch(base, offs),
                _purepy.waveplate_chi_batch(base, offs),
                atol=1e-14,
            )

    def test_fidelity_deviation_batch(self):
        gen = RngStream(3).generator()
        eps = gen.uniform(-0.2, 0.2, size=(100, 4, 3))
        chis = _core.generator_chi_batch(np.ascontiguousarray(axis_set(4).axes), eps)
        fa, da = _core.fidelity_deviation_batch(chis)
        fb, db = _purepy.fidelity_deviation_batch(chis)
        np.testing.assert_allclose(fa, fb, atol=1e-15)
        np.testing.assert_allclose(da, db, atol=1e-15)


@pytest.mark.parametrize("backend", BACKENDS, ids=IDS)
def test_fidelity_deviation_matches_scalar_closed_form(backend):
    from unotsim.fidanal import deviation_closed_form, fidelity_closed_form

    gen = RngStream(4).generator()
    eps = gen.uniform(-0.2, 0.2, size=(20, 3, 3))
    chis = np.ascontiguousarray(
        _purepy.generator_chi_batch(np.ascontiguousarray(axis_set(3).axes), eps)
    )
    f, d = backend.fidelity_deviation_batch(chis)
    for t in range(20):
        assert abs(f[t] - fidelity_closed_form(chis[t])) <= 1e-13
        assert abs(d[t] - deviation_closed_form(chis[t])) <= 1e-13


def test_wrapper_accepts_readonly_and_noncontiguous_input():
    axes = axis_set(4).axes  # read-only by construction
    eps = np.zeros((6, 4, 3))[::2]  # non-contiguous view
    chi = _kernels.generator_chi_batch(axes, eps)
    np.testing.assert_allclose(chi[0], np.diag([0, 1 / 3, 1 / 3, 1 / 3]), atol=1e-15)

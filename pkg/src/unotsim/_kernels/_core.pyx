# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernel backend: the per-trial hot loops as straight C loops.

Same contracts as ``_purepy``; see that module for the math notes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()

BACKEND = "cython"

ctypedef double complex cplx


cdef inline void _accumulate_outer(cplx[:, ::1] chi, cplx* c, double w) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(4):
        for j in range(4):
            chi[i, j] = chi[i, j] + w * c[i] * c[j].conjugate()


cdef inline void _pauli_coef(cplx u00, cplx u01, cplx u10, cplx u11, cplx* c) noexcept nogil:
    c[0] = (u00 + u11) / 2.0
    c[1] = (u01 + u10) / 2.0
    c[2] = 1j * (u01 - u10) / 2.0
    c[3] = (u00 - u11) / 2.0


def chi_from_unitary_kraus(const double[::1] weights, const cplx[:, :, ::1] ops):
    out = np.zeros((4, 4), dtype=np.complex128)
    cdef cplx[:, ::1] chi = out
    cdef Py_ssize_t k
    cdef cplx c[4]
    with nogil:
        for k in range(weights.shape[0]):
            _pauli_coef(ops[k, 0, 0], ops[k, 0, 1], ops[k, 1, 0], ops[k, 1, 1], c)
            _accumulate_outer(chi, c, weights[k])
    return out


def generator_chi_batch(const double[:, ::1] axes, const double[:, :, ::1] eps):
    cdef Py_ssize_t t, i, k
    cdef Py_ssize_t ntrials = eps.shape[0]
    cdef Py_ssize_t naxes = axes.shape[0]
    out = np.zeros((ntrials, 4, 4), dtype=np.complex128)
    cdef cplx[:, :, ::1] chi = out
    cdef double w = 1.0 / naxes
    cdef double ex, ey, ez, r, cr, sr, hx, hy, hz, dot
    cdef double nx, ny, nz, ux, uy, uz
    cdef cplx c[4]
    with nogil:
        for t in range(ntrials):
            for i in range(naxes):
                nx = axes[i, 0]; ny = axes[i, 1]; nz = axes[i, 2]
                ex = eps[t, i, 0]; ey = eps[t, i, 1]; ez = eps[t, i, 2]
                r = sqrt(ex * ex + ey * ey + ez * ez)
                if r == 0.0:
                    c[0] = 0.0
                    c[1] = nx; c[2] = ny; c[3] = nz
                else:
                    cr = cos(r); sr = sin(r)
                    hx = ex / r; hy = ey / r; hz = ez / r
                    dot = hx * nx + hy * ny + hz * nz
                    # exp(i e.sigma)(n.sigma) = i sin r (ehat.n) I
                    #                          + (cos r n - sin r ehat x n).sigma
                    ux = hy * nz - hz * ny
                    uy = hz * nx - hx * nz
                    uz = hx * ny - hy * nx
                    c[0] = 1j * sr * dot
                    c[1] = cr * nx - sr * ux
                    c[2] = cr * ny - sr * uy
                    c[3] = cr * nz - sr * uz
                _accumulate_outer(chi[t], c, w)
    return out


def waveplate_chi_batch(const double[:, ::1] base_angles, const double[:, :, ::1] offsets):
    cdef Py_ssize_t t, i
    cdef Py_ssize_t ntrials = offsets.shape[0]
    cdef Py_ssize_t naxes = base_angles.shape[0]
    out = np.zeros((ntrials, 4, 4), dtype=np.complex128)
    cdef cplx[:, :, ::1] chi = out
    cdef double w = 1.0 / naxes
    cdef double a, ca, sa, h00, h01
    cdef cplx q1_00, q1_01, q1_11, q2_00, q2_01, q2_11
    cdef cplx m00, m01, m10, m11, u00, u01, u10, u11
    cdef cplx c[4]
    with nogil:
        for t in range(ntrials):
            for i in range(naxes):
                a = base_angles[i, 0] + offsets[t, i, 0]
                ca = cos(a); sa = sin(a)
                q1_00 = ca * ca + 1j * sa * sa
                q1_01 = (1.0 - 1j) * ca * sa
                q1_11 = sa * sa + 1j * ca * ca
                a = base_angles[i, 2] + offsets[t, i, 2]
                ca = cos(a); sa = sin(a)
                q2_00 = ca * ca + 1j * sa * sa
                q2_01 = (1.0 - 1j) * ca * sa
                q2_11 = sa * sa + 1j * ca * ca
                a = 2.0 * (base_angles[i, 1] + offsets[t, i, 1])
                h00 = cos(a); h01 = sin(a)
                # m = HWP @ QWP(q2) with HWP = [[h00, h01], [h01, -h00]]
                m00 = h00 * q2_00 + h01 * q2_01
                m01 = h00 * q2_01 + h01 * q2_11
                m10 = h01 * q2_00 - h00 * q2_01
                m11 = h01 * q2_01 - h00 * q2_11
                u00 = q1_00 * m00 + q1_01 * m10
                u01 = q1_00 * m01 + q1_01 * m11
                u10 = q1_01 * m00 + q1_11 * m10
                u11 = q1_01 * m01 + q1_11 * m11
                _pauli_coef(u00, u01, u10, u11, c)
                _accumulate_outer(chi[t], c, w)
    return out


def fidelity_deviation_batch(const cplx[:, :, ::1] chi):
    cdef Py_ssize_t t
    cdef Py_ssize_t ntrials = chi.shape[0]
    f_out = np.empty(ntrials, dtype=np.float64)
    d_out = np.empty(ntrials, dtype=np.float64)
    cdef double[::1] f = f_out
    cdef double[::1] d = d_out
    cdef double a, b, c, diag, off, d2
    cdef cplx o12, o13, o23
    with nogil:
        for t in range(ntrials):
            a = chi[t, 1, 1].real
            b = chi[t, 2, 2].real
            c = chi[t, 3, 3].real
            f[t] = (2.0 / 3.0) * (a + b + c)
            o12 = chi[t, 1, 2]; o13 = chi[t, 1, 3]; o23 = chi[t, 2, 3]
            # cancellation-free arrangement of the quadratic form (see fidanal)
            diag = ((a - b) * (a - b) + (a - c) * (a - c) + (b - c) * (b - c)) / 2.0
            off = (o12.real * o12.real + 5.0 * o12.imag * o12.imag
                   + o13.real * o13.real + 5.0 * o13.imag * o13.imag
                   + o23.real * o23.real + 5.0 * o23.imag * o23.imag)
            d2 = (4.0 / 45.0) * diag + (4.0 / 15.0) * off
            d[t] = sqrt(d2) if d2 > 0.0 else 0.0
    return f_out, d_out

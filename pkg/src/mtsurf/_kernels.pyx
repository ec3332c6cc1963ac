# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled truncated bivariate series kernels.

Same flat layout and signatures as :mod:`mtsurf._kernels_py`.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _idx(Py_ssize_t p, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t d = p + q
    return d * (d + 1) // 2 + q


cdef void _mul(const double complex[::1] a, const double complex[::1] b,
               double complex[::1] out, int n) noexcept nogil:
    cdef Py_ssize_t da, db, qa, qb, ia, ib
    cdef double complex av
    for ia in range(out.shape[0]):
        out[ia] = 0
    for da in range(n + 1):
        for qa in range(da + 1):
            ia = _idx(da - qa, qa)
            av = a[ia]
            if av == 0:
                continue
            for db in range(n - da + 1):
                for qb in range(db + 1):
                    ib = _idx(db - qb, qb)
                    out[_idx(da - qa + db - qb, qa + qb)] += av * b[ib]


def mul(a, b, int n):
    cdef Py_ssize_t t = (n + 1) * (n + 2) // 2
    cdef double complex[::1] av = np.ascontiguousarray(a, dtype=np.complex128)
    cdef double complex[::1] bv = np.ascontiguousarray(b, dtype=np.complex128)
    out = np.empty(t, dtype=np.complex128)
    cdef double complex[::1] ov = out
    _mul(av, bv, ov, n)
    return out


def compose(d, coeffs, int n):
    cdef Py_ssize_t t = (n + 1) * (n + 2) // 2
    cdef double complex[::1] dv = np.ascontiguousarray(d, dtype=np.complex128)
    cdef double complex[::1] cv = np.ascontiguousarray(coeffs, dtype=np.complex128)
    out = np.zeros(t, dtype=np.complex128)
    tmp = np.empty(t, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double complex[::1] tv = tmp
    cdef Py_ssize_t k = cv.shape[0] - 1
    cdef Py_ssize_t i
    ov[0] = cv[k]
    with nogil:
        while k > 0:
            k -= 1
            _mul(ov, dv, tv, n)
            for i in range(t):
                ov[i] = tv[i]
            ov[0] += cv[k]
    return out

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled cyclic Jacobi kernel; hot loop of every eigendecomposition."""

from libc.math cimport sqrt

BACKEND = "cython"


cdef double _off_norm(double[:, ::1] a, Py_ssize_t n) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i, j
    for i in range(n - 1):
        for j in range(i + 1, n):
            acc += a[i, j] * a[i, j]
    return sqrt(2.0 * acc)


def jacobi_sweeps(double[:, ::1] a, double[:, ::1] v, double off_tol, int max_sweeps):
    """Identical contract to opineq._jacobi_py.jacobi_sweeps."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double apq, tau, t, c, s, app, aqq, akp, akq
    if n < 2:
        return 0
    with nogil:
        for sweep in range(1, max_sweeps + 1):
            if _off_norm(a, n) <= off_tol:
                with gil:
                    return sweep - 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if tau >= 0.0:
                        t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    app = a[p, p]
                    aqq = a[q, q]
                    for k in range(n):
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = c * akp - s * akq
                        a[k, q] = s * akp + c * akq
                    for k in range(n):
                        a[p, k] = a[k, p]
                        a[q, k] = a[k, q]
                    a[p, p] = app - t * apq
                    a[q, q] = aqq + t * apq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(n):
                        akp = v[k, p]
                        akq = v[k, q]
                        v[k, p] = c * akp - s * akq
                        v[k, q] = s * akp + c * akq
        if _off_norm(a, n) <= off_tol:
            with gil:
                return max_sweeps
    return -1

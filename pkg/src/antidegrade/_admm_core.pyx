# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled ADMM iteration kernel.

Same arithmetic as ``_admm_py.run_chunk``; BLAS/LAPACK are reached through
scipy's Cython bindings so no Python call happens inside the loop.
"""

from libc.math cimport sqrt, fabs
from libc.stdlib cimport malloc, free
from scipy.linalg.cython_blas cimport dgemv
from scipy.linalg.cython_lapack cimport zheev

cdef double SQRT2 = 1.4142135623730951


cdef int _project_psd(double* w, int n, double complex* A, double* ev,
                      double complex* work, int lwork, double* rwork) nogil:
    cdef int i, j, k, p, info = 0
    cdef int m = n * (n - 1) // 2
    cdef double re, im, acc_re, lam
    cdef double complex acc
    cdef char jobz = b'V'
    cdef char uplo = b'L'
    if n == 1:
        if w[0] < 0.0:
            w[0] = 0.0
        return 0
    # lower triangle, column-major: A[col*n + row]
    for i in range(n):
        A[i * n + i] = w[i]
    p = 0
    for i in range(n):
        for j in range(i + 1, n):
            re = w[n + p] / SQRT2
            im = w[n + m + p] / SQRT2
            # H[i, j] = re + i im, lower element H[j, i] = re - i im
            A[i * n + j] = re - 1j * im
            A[j * n + i] = re + 1j * im
            p += 1
    zheev(&jobz, &uplo, &n, A, &n, ev, work, &lwork, rwork, &info)
    if info != 0:
        return info
    if ev[0] >= 0.0:
        return 0  # already PSD, leave w untouched
    for i in range(n):
        acc_re = 0.0
        for k in range(n):
            lam = ev[k]
            if lam > 0.0:
                acc_re += lam * (A[k * n + i].real * A[k * n + i].real + A[k * n + i].imag * A[k * n + i].imag)
        w[i] = acc_re
    p = 0
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(n):
                lam = ev[k]
                if lam > 0.0:
                    acc = acc + lam * A[k * n + i] * A[k * n + j].conjugate()
            w[n + p] = SQRT2 * acc.real
            w[n + m + p] = SQRT2 * acc.imag
            p += 1
    return 0


def project_cone(double[::1] w, long[::1] offsets, long[::1] sizes, long[::1] kinds):
    cdef int nb = offsets.shape[0]
    cdef int b, n, nmax = 1, lwork, info
    for b in range(nb):
        if sizes[b] > nmax:
            nmax = sizes[b]
    lwork = 64 * nmax
    cdef double complex* A = <double complex*> malloc(nmax * nmax * sizeof(double complex))
    cdef double complex* work = <double complex*> malloc(lwork * sizeof(double complex))
    cdef double* ev = <double*> malloc(nmax * sizeof(double))
    cdef double* rwork = <double*> malloc((3 * nmax + 1) * sizeof(double))
    try:
        for b in range(nb):
            if kinds[b] == 0:
                info = _project_psd(&w[offsets[b]], <int> sizes[b], A, ev, work, lwork, rwork)
                if info != 0:
                    raise ArithmeticError("zheev failed with info=%d" % info)
    finally:
        free(A); free(work); free(ev); free(rwork)
    return w


def run_chunk(double[::1] x, double[::1] z, double[::1] u, double a,
              double[:, ::1] U, double[:, ::1] V, double[::1] h,
              long[::1] offsets, long[::1] sizes, long[::1] kinds,
              double alpha, int iters):
    cdef int N = x.shape[0]
    cdef int r = U.shape[1]
    cdef int nb = offsets.shape[0]
    cdef int it, i, b, nmax = 1, lwork, info = 0
    cdef double one = 1.0, zero = 0.0, rp = 0.0, rd = 0.0, d
    cdef int inc = 1
    cdef char transN = b'N'
    cdef char transT = b'T'
    for b in range(nb):
        if sizes[b] > nmax:
            nmax = sizes[b]
    lwork = 64 * nmax
    cdef double* v = <double*> malloc(N * sizeof(double))
    cdef double* zold = <double*> malloc(N * sizeof(double))
    cdef double* xh = <double*> malloc(N * sizeof(double))
    cdef double* t = <double*> malloc((r if r > 0 else 1) * sizeof(double))
    cdef double complex* A = <double complex*> malloc(nmax * nmax * sizeof(double complex))
    cdef double complex* work = <double complex*> malloc(lwork * sizeof(double complex))
    cdef double* ev = <double*> malloc(nmax * sizeof(double))
    cdef double* rwork = <double*> malloc((3 * nmax + 1) * sizeof(double))
    try:
        with nogil:
            for it in range(iters):
                for i in range(N):
                    v[i] = z[i] - u[i]
                    zold[i] = z[i]
                if r > 0:
                    # row-major V (N x r) is column-major V^T (r x N): t = V^T v
                    dgemv(&transN, &r, &N, &one, &V[0, 0], &r, v, &inc, &zero, t, &inc)
                    # x = U t, with U row-major read as column-major U^T
                    dgemv(&transT, &r, &N, &one, &U[0, 0], &r, t, &inc, &zero, &x[0], &inc)
                else:
                    for i in range(N):
                        x[i] = 0.0
                for i in range(N):
                    x[i] = x[i] + h[i] + a * v[i]
                    xh[i] = alpha * x[i] + (1.0 - alpha) * z[i]
                    z[i] = xh[i] + u[i]
                for b in range(nb):
                    if kinds[b] == 0:
                        info = _project_psd(&z[offsets[b]], <int> sizes[b], A, ev, work, lwork, rwork)
                        if info != 0:
                            break
                if info != 0:
                    break
                rp = 0.0
                rd = 0.0
                for i in range(N):
                    u[i] = u[i] + xh[i] - z[i]
                    d = fabs(x[i] - z[i])
                    if d > rp:
                        rp = d
                    d = fabs(z[i] - zold[i])
                    if d > rd:
                        rd = d
        if info != 0:
            raise ArithmeticError("zheev failed with info=%d" % info)
    finally:
        free(v); free(zold); free(xh); free(t); free(A); free(work); free(ev); free(rwork)
    return rp, rd

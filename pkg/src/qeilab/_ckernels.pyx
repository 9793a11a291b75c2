# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: J_B quadrature on the real line and midpoint assembly.

Mirrors ``_pykernels`` (same signatures, same level-synchronous GK15 scheme).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, cos, sin, cosh, fabs, ceil, sqrt, M_PI, NAN
from libc.stdlib cimport malloc, free

cnp.import_array()

NAME = "cython"

cdef double XGK[8]
cdef double WGK[8]
cdef double WG[4]
XGK[:] = [0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
          0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
          0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
          0.207784955007898467600689403773245, 0.0]
WGK[:] = [0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
          0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
          0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
          0.204432940075298892414161999234649, 0.209482141084727828012999174891714]
WG[:] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
         0.381830050505118944950369775488975, 0.417959183673469387755102040816327]


cdef inline double complex _one_minus_exp_neg(double u, double v) noexcept nogil:
    cdef double re, im
    if v == 0.0:
        return -expm1(-u)
    re = -expm1(-u) * cos(v) + 2.0 * sin(0.5 * v) * sin(0.5 * v)
    im = exp(-u) * sin(v)
    return re + im * 1j


cdef inline double complex _integrand(double x, double br, double bi, double c) noexcept nogil:
    cdef double ex = exp(-x)
    cdef double s = sin(c * x)
    cdef double complex f1 = _one_minus_exp_neg(0.5 * x * br, 0.5 * x * bi)
    cdef double complex f2 = _one_minus_exp_neg(0.5 * x * (2.0 - br), -0.5 * x * bi)
    return 4.0 * ex * f1 * f2 / (x * (1.0 + ex) * (-expm1(-2.0 * x))) * (s * s)


cdef inline void _gk15(double lo, double hi, double br, double bi, double c,
                       double complex* k15, double* err) noexcept nogil:
    cdef double half = 0.5 * (hi - lo)
    cdef double mid = 0.5 * (hi + lo)
    cdef double complex fc = _integrand(mid, br, bi, c)
    cdef double complex rk = fc * WGK[7]
    cdef double complex rg = fc * WG[3]
    cdef double complex f1, f2
    cdef int i
    for i in range(7):
        f1 = _integrand(mid - half * XGK[i], br, bi, c)
        f2 = _integrand(mid + half * XGK[i], br, bi, c)
        rk += WGK[i] * (f1 + f2)
        if i % 2 == 1:
            rg += WG[i // 2] * (f1 + f2)
    k15[0] = rk * half
    err[0] = _cabs((rk - rg) * half)


cdef inline double _cabs(double complex z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef int _jb_one(double br, double bi, double theta, double rtol, double atol,
                 double x_min, double x_max, int max_sub,
                 double complex* result) noexcept nogil:
    """Returns 0 on success, 1 if the subdivision budget is exhausted, 2 on allocation failure."""
    cdef double c = theta / (2.0 * M_PI)
    cdef double width = x_max - x_min
    cdef int n0 = 16 + <int>ceil(width * fabs(theta / M_PI) / M_PI)
    cdef int cap = n0 + 2 * max_sub + 2
    cdef double* lo = <double*>malloc(cap * sizeof(double))
    cdef double* hi = <double*>malloc(cap * sizeof(double))
    cdef double* nlo = <double*>malloc(cap * sizeof(double))
    cdef double* nhi = <double*>malloc(cap * sizeof(double))
    cdef double complex* val = <double complex*>malloc(cap * sizeof(double complex))
    cdef double* err = <double*>malloc(cap * sizeof(double))
    cdef double* tmp
    cdef double complex acc = 0.0
    cdef double complex total
    cdef double tol, step
    cdef int n = n0, m, i, bisections = 0, status = 0
    if theta == 0.0:
        result[0] = 0.0
        free(lo); free(hi); free(nlo); free(nhi); free(val); free(err)
        return 0
    if lo == NULL or hi == NULL or nlo == NULL or nhi == NULL or val == NULL or err == NULL:
        free(lo); free(hi); free(nlo); free(nhi); free(val); free(err)
        return 2
    step = width / n0
    for i in range(n0):
        lo[i] = x_min + i * step
        hi[i] = x_min + (i + 1) * step
    hi[n0 - 1] = x_max
    while True:
        total = acc
        for i in range(n):
            _gk15(lo[i], hi[i], br, bi, c, &val[i], &err[i])
            total += val[i]
        tol = _cabs(total) * rtol
        if tol < atol:
            tol = atol
        m = 0
        for i in range(n):
            if err[i] <= tol * (hi[i] - lo[i]) / width:
                acc += val[i]
            else:
                nlo[m] = lo[i]
                nhi[m] = 0.5 * (lo[i] + hi[i])
                nlo[m + 1] = nhi[m]
                nhi[m + 1] = hi[i]
                m += 2
        if m == 0:
            break
        bisections += m // 2
        if bisections > max_sub:
            status = 1
            break
        tmp = lo; lo = nlo; nlo = tmp
        tmp = hi; hi = nhi; nhi = tmp
        n = m
    result[0] = acc
    free(lo); free(hi); free(nlo); free(nhi); free(val); free(err)
    return status


def jb_real(double b_re, double b_im, double theta, double rtol, double atol,
            double x_min, double x_max, int max_sub):
    cdef double complex r
    cdef int st
    with nogil:
        st = _jb_one(b_re, b_im, theta, rtol, atol, x_min, x_max, max_sub, &r)
    if st:
        return NAN, NAN, st
    return r.real, r.imag, 0


def jb_real_many(double b_re, double b_im, thetas, double rtol, double atol,
                 double x_min, double x_max, int max_sub):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] th = np.ascontiguousarray(thetas, dtype=np.float64).ravel()
    cdef Py_ssize_t n = th.shape[0], i
    out = np.empty(n, dtype=np.complex128)
    status = np.zeros(n, dtype=np.int32)
    cdef double complex[::1] o = out
    cdef int[::1] s = status
    cdef double[::1] t = th
    with nogil:
        for i in range(n):
            s[i] = _jb_one(b_re, b_im, t[i], rtol, atol, x_min, x_max, max_sub, &o[i])
    shape = np.shape(thetas)
    return out.reshape(shape), status.reshape(shape)


def midpoint_kernel(thetas, fp_diff, double sigma, double pref):
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef double[::1] fp = np.ascontiguousarray(fp_diff, dtype=np.float64)
    cdef Py_ssize_t n = th.shape[0], j, k
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] m = out
    cdef double[::1] ch = np.cosh(np.asarray(th))
    cdef double c, d, v
    with nogil:
        for j in range(n):
            for k in range(j, n):
                c = cosh(0.5 * (th[j] + th[k]))
                d = sigma * (ch[j] - ch[k])
                v = pref * c * c * fp[k - j] * exp(-d * d)
                m[j, k] = v
                m[k, j] = v
    return out

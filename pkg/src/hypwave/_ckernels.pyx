# cython: language_level=3
"""Compiled versions of the loops in ``_pykernels``.

Signatures and arithmetic match the pure-Python module line for line so the
two backends agree to rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, exp, floor, pow, tgamma
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176
cdef double A65 = -5103.0 / 18656
cdef double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784
cdef double A76 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40


def bessel_series(double rho, double x, int max_terms, double tol):
    cdef double q = -0.25 * x * x
    cdef double term = 1.0, s = 1.0, comp = 0.0, y, tmp
    cdef int k
    for k in range(1, max_terms):
        term *= q / (k * (rho + k))
        y = term - comp
        tmp = s + y
        comp = (tmp - s) - y
        s = tmp
        if fabs(term) <= tol * fabs(s) and k > 2:
            return s, k + 1
    return s, max_terms


def miller_j(double nu, double x, int count):
    cdef int big = count if count > <int>x else <int>x
    cdef int start = big + 20 + <int>sqrt(40.0 * (big + 1))
    cdef int k, m, j
    start += start % 2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f = np.zeros(start + 2)
    f[start] = 1e-300
    for k in range(start, 0, -1):
        f[k - 1] = 2.0 * (nu + k) / x * f[k] - f[k + 1]
        if fabs(f[k - 1]) > 1e250:
            for j in range(k - 1, start + 2):
                f[j] *= 1e-250
    cdef double g = tgamma(nu + 1.0)
    cdef double total = g * f[0]
    for m in range(1, start // 2 + 1):
        if m == 1:
            g = tgamma(nu + 1.0)
        else:
            g *= (nu + m - 1.0) / m
        total += (nu + 2.0 * m) * g * f[2 * m]
    cdef double scale = pow(0.5 * x, nu) / total
    return f[:count] * scale


def kummer_series(a, b, z, int max_terms, double tol):
    cdef double complex ca = a, cb = b, cz = z
    cdef double complex term = 1.0, s = 1.0, comp = 0.0, y, tmp
    cdef int k, small = 0
    for k in range(max_terms - 1):
        term *= (ca + k) * cz / ((cb + k) * (k + 1.0))
        y = term - comp
        tmp = s + y
        comp = (tmp - s) - y
        s = tmp
        if abs(term) <= tol * abs(s):
            small += 1
            if small >= 2:
                return s, k + 2
        else:
            small = 0
    return s, max_terms


def kummer_walk(a, b, z0, w0, dw0, z1, double max_step, int max_terms):
    cdef double complex ca = a, cb = b, z = z0, w = w0, dw = dw0
    cdef double complex total = z1 - z0
    cdef double complex direction, h, c0, c1, c2, val, der, hp, hd, tv, td
    cdef double dist = abs(total), done = 0.0, h_len, lim
    cdef int n
    if dist == 0.0:
        return w, dw
    direction = total / dist
    while done < dist:
        h_len = max_step
        lim = abs(z) / 3.0
        if lim < h_len:
            h_len = lim
        if dist - done < h_len:
            h_len = dist - done
        h = direction * h_len
        c0 = w
        c1 = dw
        val = c0 + c1 * h
        der = c1
        hp = h
        hd = 1.0
        for n in range(max_terms):
            c2 = (-(n + 1.0) * (n + cb - z) * c1 + (n + ca) * c0) / (z * (n + 2.0) * (n + 1.0))
            hp = hp * h
            hd = hd * h
            tv = c2 * hp
            td = (n + 2.0) * c2 * hd
            val += tv
            der += td
            if abs(tv) <= 1e-17 * abs(val) and abs(td) <= 1e-17 * abs(der) and n > 4:
                break
            c0 = c1
            c1 = c2
        z = z + h
        w = val
        dw = der
        done += h_len
    return w, dw


cdef inline double _bump(double s, double center, double halfwidth) nogil:
    cdef double u = (s - center) / halfwidth
    if u <= -1.0 or u >= 1.0:
        return 0.0
    return exp(1.0 - 1.0 / (1.0 - u * u))


cdef struct Coef:
    int mode
    double eps
    double center
    double halfwidth
    int nint
    double *tau
    double *delta
    double *eta
    double *nn


cdef inline double _coef(double t, Coef *c) nogil:
    cdef int k
    cdef double s
    if c.mode == 0:
        return 1.0 + c.eps * _bump(t - floor(t), c.center, c.halfwidth)
    for k in range(c.nint):
        if c.tau[k] <= t <= c.tau[k] + c.delta[k]:
            s = c.nn[k] / c.delta[k] * (t - c.tau[k])
            return 1.0 + c.eta[k] * c.eps * _bump(s - floor(s), c.center, c.halfwidth)
    return 1.0


cdef inline void _rhs(double t, double *y, double *out, double xi2, Coef *c) nogil:
    cdef double a = _coef(t, c)
    cdef double w = -xi2 * a * a
    out[0] = y[1]
    out[1] = w * y[0]
    out[2] = y[3]
    out[3] = w * y[2]


def coefficient_value(double t, int mode, double eps, double center, double halfwidth,
                      tau, delta, eta, nn):
    cdef Coef c
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ta = np.ascontiguousarray(tau, dtype=float)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] da = np.ascontiguousarray(delta, dtype=float)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ea = np.ascontiguousarray(eta, dtype=float)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] na = np.ascontiguousarray(nn, dtype=float)
    c.mode = mode
    c.eps = eps
    c.center = center
    c.halfwidth = halfwidth
    c.nint = ta.shape[0]
    c.tau = <double *> ta.data if c.nint else NULL
    c.delta = <double *> da.data if c.nint else NULL
    c.eta = <double *> ea.data if c.nint else NULL
    c.nn = <double *> na.data if c.nint else NULL
    return _coef(t, &c)


def hill_propagate(double xi, double t0, double t1, y0, int mode, double eps,
                   double center, double halfwidth, tau, delta, eta, nn,
                   double rtol, double atol, double hmax):
    cdef Coef c
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ta = np.ascontiguousarray(tau, dtype=float)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] da = np.ascontiguousarray(delta, dtype=float)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ea = np.ascontiguousarray(eta, dtype=float)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] na = np.ascontiguousarray(nn, dtype=float)
    c.mode = mode
    c.eps = eps
    c.center = center
    c.halfwidth = halfwidth
    c.nint = ta.shape[0]
    c.tau = <double *> ta.data if c.nint else NULL
    c.delta = <double *> da.data if c.nint else NULL
    c.eta = <double *> ea.data if c.nint else NULL
    c.nn = <double *> na.data if c.nint else NULL

    cdef double y[4]
    cdef double yn[4]
    cdef double yy[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double k5[4]
    cdef double k6[4]
    cdef double k7[4]
    cdef int i
    for i in range(4):
        y[i] = y0[i]
    cdef double t = t0, span = t1 - t0
    cdef long steps = 0
    if span == 0.0:
        return np.array([y[0], y[1], y[2], y[3]]), 0
    cdef double sgn = 1.0 if span > 0 else -1.0
    cdef double xi2 = xi * xi
    cdef double h = 0.05 / (xi if xi > 1.0 else 1.0)
    if hmax < h:
        h = hmax
    if fabs(span) < h:
        h = fabs(span)
    cdef double hs, err, e, sc, fac, m
    cdef bint underflow = False
    with nogil:
        _rhs(t, y, k1, xi2, &c)
        while sgn * (t1 - t) > 0.0:
            if h > fabs(t1 - t):
                h = fabs(t1 - t)
            hs = sgn * h
            for i in range(4):
                yy[i] = y[i] + hs * (A21 * k1[i])
            _rhs(t + C2 * hs, yy, k2, xi2, &c)
            for i in range(4):
                yy[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i])
            _rhs(t + C3 * hs, yy, k3, xi2, &c)
            for i in range(4):
                yy[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            _rhs(t + C4 * hs, yy, k4, xi2, &c)
            for i in range(4):
                yy[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            _rhs(t + C5 * hs, yy, k5, xi2, &c)
            for i in range(4):
                yy[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i]
                                     + A65 * k5[i])
            _rhs(t + hs, yy, k6, xi2, &c)
            for i in range(4):
                yn[i] = y[i] + hs * (A71 * k1[i] + 0.0 * k2[i] + A73 * k3[i] + A74 * k4[i]
                                     + A75 * k5[i] + A76 * k6[i])
            _rhs(t + hs, yn, k7, xi2, &c)
            err = 0.0
            for i in range(4):
                e = hs * (E1 * k1[i] + 0.0 * k2[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                          + E6 * k6[i] + E7 * k7[i])
                m = fabs(y[i])
                if fabs(yn[i]) > m:
                    m = fabs(yn[i])
                sc = atol + rtol * m
                err += (e / sc) * (e / sc)
            err = sqrt(err / 4.0)
            if err <= 1.0:
                t = t + hs
                for i in range(4):
                    y[i] = yn[i]
                    k1[i] = k7[i]
                steps += 1
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = 0.9 * pow(err, -0.2)
                    if fac < 0.2:
                        fac = 0.2
                    if fac > 5.0:
                        fac = 5.0
                h = h * fac
                if h > hmax:
                    h = hmax
            else:
                fac = 0.9 * pow(err, -0.2)
                if fac < 0.2:
                    fac = 0.2
                h = h * fac
                if h < 1e-14 * fabs(span):
                    underflow = True
                    break
    if underflow:
        raise ArithmeticError("step size underflow in Hill integration")
    return np.array([y[0], y[1], y[2], y[3]]), steps

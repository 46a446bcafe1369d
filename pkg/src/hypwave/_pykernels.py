"""Pure-Python reference implementations of the hot numerical loops.

``_ckernels.pyx`` mirrors every function here with identical arithmetic; the
choice between the two happens once, in ``_kernels``.
"""
import math

import numpy as np

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def bessel_series(rho, x, max_terms, tol):
    """Sum of (-x^2/4)^k / (k! (rho+1)_k) with compensated summation.

    Returns ``(value, terms_used)``; ``terms_used`` equals ``max_terms`` when
    the tolerance was not reached.
    """
    q = -0.25 * x * x
    term = 1.0
    s = 1.0
    comp = 0.0
    for k in range(1, max_terms):
        term *= q / (k * (rho + k))
        y = term - comp
        tmp = s + y
        comp = (tmp - s) - y
        s = tmp
        if abs(term) <= tol * abs(s) and k > 2:
            return s, k + 1
    return s, max_terms


def miller_j(nu, x, count):
    """J_{nu+k}(x), k = 0..count-1, by backward recurrence (0 <= nu < 1, x > 0).

    Normalised with (x/2)^nu = sum_m (nu+2m) Gamma(nu+m)/m! J_{nu+2m}(x).
    """
    big = max(count, int(x))
    start = big + 20 + int(math.sqrt(40.0 * (big + 1)))
    start += start % 2
    f = np.zeros(start + 2)
    f[start] = 1e-300
    for k in range(start, 0, -1):
        f[k - 1] = 2.0 * (nu + k) / x * f[k] - f[k + 1]
        if abs(f[k - 1]) > 1e250:
            f[k - 1:] *= 1e-250
    # normalisation sum over even indices
    g = math.gamma(nu + 1.0)
    total = g * f[0]
    for m in range(1, start // 2 + 1):
        # g_m = Gamma(nu+m)/m!
        if m == 1:
            g = math.gamma(nu + 1.0)
        else:
            g *= (nu + m - 1.0) / m
        total += (nu + 2.0 * m) * g * f[2 * m]
    scale = (0.5 * x) ** nu / total
    return f[:count] * scale


def kummer_series(a, b, z, max_terms, tol):
    """Compensated partial sums of sum (a)_k z^k / ((b)_k k!) for complex inputs."""
    term = 1.0 + 0.0j
    s = 1.0 + 0.0j
    comp = 0.0 + 0.0j
    small = 0
    for k in range(max_terms - 1):
        term *= (a + k) * z / ((b + k) * (k + 1.0))
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


def kummer_walk(a, b, z0, w0, dw0, z1, max_step, max_terms):
    """Continue a solution of z w'' + (b - z) w' - a w = 0 from z0 to z1.

    Taylor re-expansion along the segment; each step stays well inside the
    disc of convergence (radius |z| around the singular point 0).
    """
    z = z0
    w = w0
    dw = dw0
    total = z1 - z0
    dist = abs(total)
    if dist == 0.0:
        return w, dw
    direction = total / dist
    done = 0.0
    while done < dist:
        h_len = min(max_step, abs(z) / 3.0, dist - done)
        h = direction * h_len
        c0 = w
        c1 = dw
        val = c0 + c1 * h
        der = c1
        hp = h          # h^(n+1) for the current value term
        hd = 1.0 + 0.0j  # h^n for the derivative term
        for n in range(max_terms):
            c2 = (-(n + 1.0) * (n + b - z) * c1 + (n + a) * c0) / (z * (n + 2.0) * (n + 1.0))
            hp = hp * h
            hd = hd * h
            tv = c2 * hp
            td = (n + 2.0) * c2 * hd
            val += tv
            der += td
            if abs(tv) <= 1e-17 * abs(val) and abs(td) <= 1e-17 * abs(der) and n > 4:
                break
            c0, c1 = c1, c2
        z = z + h
        w = val
        dw = der
        done += h_len
    return w, dw


def bump(s, center, halfwidth):
    u = (s - center) / halfwidth
    if u <= -1.0 or u >= 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - u * u))


def coefficient_value(t, mode, eps, center, halfwidth, tau, delta, eta, nn):
    """a(t) for the periodic (mode 0) or resonant (mode 1) bump coefficient."""
    if mode == 0:
        return 1.0 + eps * bump(t - math.floor(t), center, halfwidth)
    for k in range(len(tau)):
        if tau[k] <= t <= tau[k] + delta[k]:
            s = nn[k] / delta[k] * (t - tau[k])
            return 1.0 + eta[k] * eps * bump(s - math.floor(s), center, halfwidth)
    return 1.0


def dopri_hill(xi, t0, t1, y0, afunc, rtol, atol, hmax):
    """Integrate u'' = -xi^2 a(t)^2 u for two columns stored as (u1, v1, u2, v2).

    ``afunc`` is any callable t -> a(t). Returns ``(y1, steps)``.
    """
    y = [float(v) for v in y0]
    t = t0
    span = t1 - t0
    if span == 0.0:
        return np.array(y), 0
    sgn = 1.0 if span > 0 else -1.0
    xi2 = xi * xi
    h = min(hmax, 0.05 / max(1.0, xi), abs(span))
    steps = 0

    def rhs(tt, yy):
        a = afunc(tt)
        w = -xi2 * a * a
        return [yy[1], w * yy[0], yy[3], w * yy[2]]

    k1 = rhs(t, y)
    while sgn * (t1 - t) > 0.0:
        if h > abs(t1 - t):
            h = abs(t1 - t)
        hs = sgn * h
        ks = [k1]
        for st in range(1, 7):
            coeffs = _A[st]
            yy = [y[i] + hs * sum(coeffs[j] * ks[j][i] for j in range(st)) for i in range(4)]
            ks.append(rhs(t + _C[st] * hs, yy))
        ynew = yy
        err = 0.0
        for i in range(4):
            e = hs * sum(_E[j] * ks[j][i] for j in range(7))
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            err += (e / sc) ** 2
        err = math.sqrt(err / 4.0)
        if err <= 1.0:
            t = t + hs
            y = ynew
            k1 = ks[6]
            steps += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = min(hmax, h * fac)
        else:
            h = h * max(0.2, 0.9 * err ** -0.2)
            if h < 1e-14 * abs(span):
                raise ArithmeticError("step size underflow in Hill integration")
    return np.array(y), steps


def hill_propagate(xi, t0, t1, y0, mode, eps, center, halfwidth, tau, delta, eta, nn,
                   rtol, atol, hmax):
    """Parametric-coefficient wrapper around ``dopri_hill``."""
    tau = list(tau)
    delta = list(delta)
    eta = list(eta)
    nn = list(nn)

    def afunc(t):
        return coefficient_value(t, mode, eps, center, halfwidth, tau, delta, eta, nn)

    return dopri_hill(xi, t0, t1, y0, afunc, rtol, atol, hmax)

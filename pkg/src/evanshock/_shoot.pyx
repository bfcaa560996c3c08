# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled shooting kernel: adaptive DP5(4) march of the rescaled Evans system.

Mirrors ``_shoot_py.integrate`` step for step.
"""
from libc.math cimport pow, sqrt, fabs

from ._shoot_py import KernelError

FORWARD = 0
ADJOINT = 1


cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176
cdef double A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784
cdef double B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40


cdef struct Ctx:
    double complex lam
    double complex shift
    int mode
    double gamma
    double a
    double x0
    double hp
    Py_ssize_t n
    const double* v
    const double* dv
    double vmin


cdef inline double cabs_(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline double profile(const Ctx* c, double x) nogil:
    cdef double s = (x - c.x0) / c.hp
    cdef Py_ssize_t i
    cdef double t, t2, t3, w
    if s <= 0.0:
        return c.v[0]
    if s >= c.n - 1:
        return c.v[c.n - 1]
    i = <Py_ssize_t>s
    if i > c.n - 2:
        i = c.n - 2
    t = s - i
    t2 = t * t
    t3 = t2 * t
    w = ((2 * t3 - 3 * t2 + 1) * c.v[i]
         + (t3 - 2 * t2 + t) * c.dv[i] * c.hp
         + (-2 * t3 + 3 * t2) * c.v[i + 1]
         + (t3 - t2) * c.dv[i + 1] * c.hp)
    if w < c.vmin:
        w = c.vmin
    elif w > 1.0:
        w = 1.0
    return w


cdef inline void rhs(const Ctx* c, double x, const double complex* y,
                     double complex* out) nogil:
    cdef double w = profile(c, x)
    cdef double f = 2.0 * w - c.a * (c.gamma - 1.0) * pow(w, -c.gamma) - c.a - 1.0
    cdef double complex lw = c.lam * w
    if c.mode == 0:
        out[0] = c.lam * y[1] + y[2] - c.shift * y[0]
        out[1] = y[2] - c.shift * y[1]
        out[2] = lw * (y[0] + y[1]) + (f - c.lam - c.shift) * y[2]
    else:
        out[0] = c.shift * y[0] - lw * y[2]
        out[1] = c.shift * y[1] - c.lam * y[0] - lw * y[2]
        out[2] = -(y[0] + y[1]) - (f - c.lam - c.shift) * y[2]


cdef inline double norm3(const double complex* y) nogil:
    return sqrt(y[0].real * y[0].real + y[0].imag * y[0].imag
                + y[1].real * y[1].real + y[1].imag * y[1].imag
                + y[2].real * y[2].real + y[2].imag * y[2].imag)


def integrate(y_init, double x_start, double x_end, lam, shift, int mode,
              double gamma, double a, double x0, double hp,
              const double[::1] v, const double[::1] dv, double vmin,
              double atol, double rtol, long max_steps=100000):
    """Adaptive DP5(4) march; returns ``(y_end, accepted, rejected, norm_min, norm_max)``."""
    cdef Ctx c
    c.lam = lam
    c.shift = shift
    c.mode = mode
    c.gamma = gamma
    c.a = a
    c.x0 = x0
    c.hp = hp
    c.n = v.shape[0]
    c.v = &v[0]
    c.dv = &dv[0]
    c.vmin = vmin

    cdef double complex y[3]
    cdef double complex yn[3]
    cdef double complex tmp[3]
    cdef double complex k1[3]
    cdef double complex k2[3]
    cdef double complex k3[3]
    cdef double complex k4[3]
    cdef double complex k5[3]
    cdef double complex k6[3]
    cdef double complex k7[3]
    cdef int j
    y[0] = y_init[0]
    y[1] = y_init[1]
    y[2] = y_init[2]

    cdef double span = x_end - x_start
    cdef double direction = 1.0 if span >= 0 else -1.0
    cdef double hmax = fabs(span) / 10.0
    cdef double thresh = atol / rtol
    cdef double nmin = norm3(y), nmax = nmin, nrm
    if span == 0.0:
        return (y[0], y[1], y[2]), 0, 0, nmin, nmax

    cdef double x = x_start, x_new, h, hs, rh, err, e, scale, ao, an
    cdef bint done = False
    cdef long accepted = 0, rejected = 0
    cdef double hmin = 16.0 * 2.220446049250313e-16 * max(fabs(x_start), fabs(x_end), 1.0)

    rhs(&c, x, y, k1)
    rh = 0.0
    for j in range(3):
        e = cabs_(k1[j]) / max(cabs_(y[j]), thresh)
        if e > rh:
            rh = e
    rh = rh / (0.8 * pow(rtol, 0.2))
    h = hmax
    if h * rh > 1.0:
        h = 1.0 / rh

    while not done:
        if accepted + rejected >= max_steps:
            raise KernelError(f"step limit reached at x={x!r}, h={h!r}")
        if h < hmin:
            raise KernelError(f"step size underflow at x={x!r}")
        if 1.1 * h >= fabs(x_end - x):
            h = fabs(x_end - x)
            done = True
        hs = direction * h

        for j in range(3):
            tmp[j] = y[j] + hs * A21 * k1[j]
        rhs(&c, x + C2 * hs, tmp, k2)
        for j in range(3):
            tmp[j] = y[j] + hs * (A31 * k1[j] + A32 * k2[j])
        rhs(&c, x + C3 * hs, tmp, k3)
        for j in range(3):
            tmp[j] = y[j] + hs * (A41 * k1[j] + A42 * k2[j] + A43 * k3[j])
        rhs(&c, x + C4 * hs, tmp, k4)
        for j in range(3):
            tmp[j] = y[j] + hs * (A51 * k1[j] + A52 * k2[j] + A53 * k3[j] + A54 * k4[j])
        rhs(&c, x + C5 * hs, tmp, k5)
        for j in range(3):
            tmp[j] = y[j] + hs * (A61 * k1[j] + A62 * k2[j] + A63 * k3[j] + A64 * k4[j]
                                  + A65 * k5[j])
        rhs(&c, x + hs, tmp, k6)
        for j in range(3):
            yn[j] = y[j] + hs * (B1 * k1[j] + B3 * k3[j] + B4 * k4[j] + B5 * k5[j]
                                 + B6 * k6[j])
        x_new = x_end if done else x + hs
        rhs(&c, x_new, yn, k7)

        err = 0.0
        for j in range(3):
            e = cabs_(hs * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j]
                            + E6 * k6[j] + E7 * k7[j]))
            ao = cabs_(y[j])
            an = cabs_(yn[j])
            scale = max(atol, rtol * max(ao, an))
            if e / scale > err:
                err = e / scale

        if err > 1.0:
            rejected += 1
            done = False
            h = h * max(0.1, 0.8 * pow(err, -0.2))
            continue

        accepted += 1
        x = x_new
        for j in range(3):
            y[j] = yn[j]
            k1[j] = k7[j]
        nrm = norm3(y)
        if nrm < nmin:
            nmin = nrm
        if nrm > nmax:
            nmax = nrm
        if err == 0.0:
            h = min(hmax, 5.0 * h)
        else:
            h = min(hmax, h * min(5.0, max(0.2, 0.8 * pow(err, -0.2))))

    return (y[0], y[1], y[2]), accepted, rejected, nmin, nmax

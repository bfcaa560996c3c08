"""Pure-Python shooting kernel (fallback for the compiled ``_shoot`` module).

Same algorithm, constants and step-size control as ``_shoot.pyx``; kept in
plain scalar complex arithmetic so the two agree to rounding.
"""
import math

FORWARD = 0
ADJOINT = 1

# Dormand-Prince 5(4)
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


class KernelError(RuntimeError):
    pass


def _profile(x, x0, hp, n, v, dv, vmin):
    s = (x - x0) / hp
    if s <= 0.0:
        return v[0]
    if s >= n - 1:
        return v[n - 1]
    i = int(s)
    if i > n - 2:
        i = n - 2
    t = s - i
    t2 = t * t
    t3 = t2 * t
    w = (
        (2 * t3 - 3 * t2 + 1) * v[i]
        + (t3 - 2 * t2 + t) * dv[i] * hp
        + (-2 * t3 + 3 * t2) * v[i + 1]
        + (t3 - t2) * dv[i + 1] * hp
    )
    if w < vmin:
        w = vmin
    elif w > 1.0:
        w = 1.0
    return w


def _rhs(x, y0, y1, y2, lam, shift, mode, gamma, a, x0, hp, n, v, dv, vmin):
    w = _profile(x, x0, hp, n, v, dv, vmin)
    f = 2.0 * w - a * (gamma - 1.0) * w ** (-gamma) - a - 1.0
    lw = lam * w
    if mode == FORWARD:
        return (
            lam * y1 + y2 - shift * y0,
            y2 - shift * y1,
            lw * (y0 + y1) + (f - lam - shift) * y2,
        )
    return (
        shift * y0 - lw * y2,
        shift * y1 - lam * y0 - lw * y2,
        -(y0 + y1) - (f - lam - shift) * y2,
    )


def integrate(
    y_init, x_start, x_end, lam, shift, mode, gamma, a, x0, hp, v, dv, vmin,
    atol, rtol, max_steps=100000,
):
    """Adaptive DP5(4) march of the rescaled Evans system.

    Returns ``(y_end, n_accepted, n_rejected, norm_min, norm_max)`` where the
    norms are Euclidean norms of the state at accepted steps.
    """
    v = list(v)
    dv = list(dv)
    n = len(v)
    lam = complex(lam)
    shift = complex(shift)
    args = (lam, shift, mode, gamma, a, x0, hp, n, v, dv, vmin)
    y0, y1, y2 = (complex(c) for c in y_init)
    span = x_end - x_start
    direction = 1.0 if span >= 0 else -1.0
    hmax = abs(span) / 10.0
    thresh = atol / rtol
    norm0 = math.sqrt(abs(y0) ** 2 + abs(y1) ** 2 + abs(y2) ** 2)
    nmin = nmax = norm0
    if span == 0.0:
        return (y0, y1, y2), 0, 0, nmin, nmax

    x = x_start
    k1 = _rhs(x, y0, y1, y2, *args)
    rh = max(
        abs(k1[0]) / max(abs(y0), thresh),
        abs(k1[1]) / max(abs(y1), thresh),
        abs(k1[2]) / max(abs(y2), thresh),
    ) / (0.8 * rtol**0.2)
    h = hmax
    if h * rh > 1.0:
        h = 1.0 / rh
    hmin = 16.0 * 2.220446049250313e-16 * max(abs(x_start), abs(x_end), 1.0)

    accepted = rejected = 0
    done = False
    while not done:
        if accepted + rejected >= max_steps:
            raise KernelError(f"step limit reached at x={x!r}, h={h!r}")
        if h < hmin:
            raise KernelError(f"step size underflow at x={x!r}")
        if 1.1 * h >= abs(x_end - x):
            h = abs(x_end - x)
            done = True
        hs = direction * h

        a0, a1, a2 = k1
        k2 = _rhs(x + C2 * hs,
                  y0 + hs * A21 * a0, y1 + hs * A21 * a1, y2 + hs * A21 * a2, *args)
        k3 = _rhs(x + C3 * hs,
                  y0 + hs * (A31 * a0 + A32 * k2[0]),
                  y1 + hs * (A31 * a1 + A32 * k2[1]),
                  y2 + hs * (A31 * a2 + A32 * k2[2]), *args)
        k4 = _rhs(x + C4 * hs,
                  y0 + hs * (A41 * a0 + A42 * k2[0] + A43 * k3[0]),
                  y1 + hs * (A41 * a1 + A42 * k2[1] + A43 * k3[1]),
                  y2 + hs * (A41 * a2 + A42 * k2[2] + A43 * k3[2]), *args)
        k5 = _rhs(x + C5 * hs,
                  y0 + hs * (A51 * a0 + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
                  y1 + hs * (A51 * a1 + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
                  y2 + hs * (A51 * a2 + A52 * k2[2] + A53 * k3[2] + A54 * k4[2]), *args)
        k6 = _rhs(x + hs,
                  y0 + hs * (A61 * a0 + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
                  y1 + hs * (A61 * a1 + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
                  y2 + hs * (A61 * a2 + A62 * k2[2] + A63 * k3[2] + A64 * k4[2] + A65 * k5[2]),
                  *args)
        n0 = y0 + hs * (B1 * a0 + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0])
        n1 = y1 + hs * (B1 * a1 + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1])
        n2 = y2 + hs * (B1 * a2 + B3 * k3[2] + B4 * k4[2] + B5 * k5[2] + B6 * k6[2])
        x_new = x_end if done else x + hs
        k7 = _rhs(x_new, n0, n1, n2, *args)

        err = 0.0
        for j, yo, yn in ((0, y0, n0), (1, y1, n1), (2, y2, n2)):
            e = abs(hs * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j]
                          + E6 * k6[j] + E7 * k7[j]))
            scale = max(atol, rtol * max(abs(yo), abs(yn)))
            if e / scale > err:
                err = e / scale

        if err > 1.0:
            rejected += 1
            done = False
            h = h * max(0.1, 0.8 * err ** -0.2)
            continue

        accepted += 1
        x = x_new
        y0, y1, y2 = n0, n1, n2
        k1 = k7
        nrm = math.sqrt(abs(y0) ** 2 + abs(y1) ** 2 + abs(y2) ** 2)
        if nrm < nmin:
            nmin = nrm
        if nrm > nmax:
            nmax = nrm
        if err == 0.0:
            h = min(hmax, 5.0 * h)
        else:
            h = min(hmax, h * min(5.0, max(0.2, 0.8 * err ** -0.2)))

    return (y0, y1, y2), accepted, rejected, nmin, nmax

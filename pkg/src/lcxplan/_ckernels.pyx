# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-cell kernels. Must agree with ``_pykernels`` to rounding."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log10, hypot, sqrt, cos, sin, pow, fmax, INFINITY

cnp.import_array()

cdef double PARAM_EPS = 1e-12
cdef double LENGTH_EPS = 1e-9
cdef double POWER_FLOOR_MW = 1e-30


cdef inline double _clearance(double px, double py, const double[:, ::1] ev,
                              const double[:, ::1] en, Py_ssize_t e0, Py_ssize_t e1) noexcept nogil:
    cdef double best = INFINITY, s
    cdef Py_ssize_t e
    for e in range(e0, e1):
        s = en[e, 0] * (px - ev[e, 0]) + en[e, 1] * (py - ev[e, 1])
        if s < best:
            best = s
    return best


cdef inline bint _crosses(double ax, double ay, double bx, double by,
                          const double[:, ::1] ev, const double[:, ::1] en,
                          Py_ssize_t e0, Py_ssize_t e1) noexcept nogil:
    cdef double dx = bx - ax, dy = by - ay
    cdef double t0 = 0.0, t1 = 1.0, num, den, mx, my
    cdef Py_ssize_t e
    for e in range(e0, e1):
        num = en[e, 0] * (ax - ev[e, 0]) + en[e, 1] * (ay - ev[e, 1])
        den = en[e, 0] * dx + en[e, 1] * dy
        if den == 0.0:
            if num < 0.0:
                return False
        elif den > 0.0:
            t0 = fmax(t0, -num / den)
        else:
            if -num / den < t1:
                t1 = -num / den
        if t1 - t0 <= PARAM_EPS:
            return False
    mx = ax + 0.5 * (t0 + t1) * dx
    my = ay + 0.5 * (t0 + t1) * dy
    if _clearance(mx, my, ev, en, e0, e1) <= LENGTH_EPS:
        return False
    return not (_clearance(ax, ay, ev, en, e0, e1) > LENGTH_EPS
                and _clearance(bx, by, ev, en, e0, e1) > LENGTH_EPS)


cdef inline double _obstruction(double ax, double ay, double bx, double by,
                                const double[:, ::1] ev, const double[:, ::1] en,
                                const long long[::1] pstart, const double[::1] ploss) noexcept nogil:
    cdef double total = 0.0
    cdef Py_ssize_t k
    for k in range(ploss.shape[0]):
        if _crosses(ax, ay, bx, by, ev, en, pstart[k], pstart[k + 1]):
            total += ploss[k]
    return total


def single_path_block(const double[::1] cx, const double[::1] cy,
                      const double[::1] rx, const double[::1] ry, const double[::1] rbase,
                      double p, double clamp,
                      const double[:, ::1] edge_v, const double[:, ::1] edge_n,
                      const long long[::1] poly_start, const double[::1] poly_loss,
                      const double[:, ::1] bar, const double[::1] bar_gain):
    cdef Py_ssize_t n = cx.shape[0], nr = rx.shape[0], nb = bar.shape[0]
    value_arr = np.empty(n, dtype=np.float64)
    ridx_arr = np.empty(n, dtype=np.int64)
    bidx_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] value = value_arr
    cdef long long[::1] ridx = ridx_arr
    cdef long long[::1] bidx = bidx_arr
    cdef Py_ssize_t i, k, b
    cdef double best, best_len, length, cand, x, y
    cdef double sx, sy, ex, ey, ddx, ddy, dlen, nx, ny, side_r, side_c, imx, imy, tau, qx, qy, u
    cdef long long best_k, best_b
    cdef bint has_obstacles = poly_loss.shape[0] > 0
    with nogil:
        for i in range(n):
            x = cx[i]
            y = cy[i]
            best = -INFINITY
            best_len = INFINITY
            best_k = -1
            best_b = -1
            for k in range(nr):
                length = hypot(x - rx[k], y - ry[k])
                cand = rbase[k] - 10.0 * p * log10(fmax(length, clamp))
                if has_obstacles:
                    cand -= _obstruction(rx[k], ry[k], x, y, edge_v, edge_n, poly_start, poly_loss)
                if cand > best or (cand == best and length < best_len):
                    best = cand
                    best_len = length
                    best_k = k
                    best_b = -1
                for b in range(nb):
                    sx = bar[b, 0]
                    sy = bar[b, 1]
                    ex = bar[b, 2]
                    ey = bar[b, 3]
                    ddx = ex - sx
                    ddy = ey - sy
                    dlen = hypot(ddx, ddy)
                    nx = -ddy / dlen
                    ny = ddx / dlen
                    side_r = nx * (rx[k] - sx) + ny * (ry[k] - sy)
                    side_c = nx * (x - sx) + ny * (y - sy)
                    if not (side_r * side_c > 0.0):
                        continue
                    imx = rx[k] - 2.0 * side_r * nx
                    imy = ry[k] - 2.0 * side_r * ny
                    tau = side_r / (side_r + side_c)
                    qx = imx + tau * (x - imx)
                    qy = imy + tau * (y - imy)
                    u = ((qx - sx) * ddx + (qy - sy) * ddy) / (dlen * dlen)
                    if u < 0.0 or u > 1.0:
                        continue
                    length = hypot(x - imx, y - imy)
                    cand = rbase[k] - 10.0 * p * log10(fmax(length, clamp)) + bar_gain[b]
                    if has_obstacles:
                        cand -= _obstruction(rx[k], ry[k], qx, qy, edge_v, edge_n, poly_start, poly_loss)
                        cand -= _obstruction(qx, qy, x, y, edge_v, edge_n, poly_start, poly_loss)
                    if cand > best or (cand == best and length < best_len):
                        best = cand
                        best_len = length
                        best_k = k
                        best_b = b
            value[i] = best
            ridx[i] = best_k
            bidx[i] = best_b
    return value_arr, ridx_arr, bidx_arr


def coherent_block(const double[::1] cx, const double[::1] cy,
                   const double[::1] rx, const double[::1] ry, const double[::1] rbase,
                   const double[::1] guided_phase, double k0, double p, double clamp):
    cdef Py_ssize_t n = cx.shape[0], nr = rx.shape[0]
    value_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] value = value_arr
    # linear field amplitude at 1 m, once per radiator
    base_arr = np.power(10.0, np.asarray(rbase) / 20.0)
    cdef double[::1] base = base_arr
    cdef double half_p = 0.5 * p
    cdef bint square_law = p == 2.0
    cdef Py_ssize_t i, k
    cdef double re, im, r, amp, ph, power
    with nogil:
        for i in range(n):
            re = 0.0
            im = 0.0
            for k in range(nr):
                r = hypot(cx[i] - rx[k], cy[i] - ry[k])
                if square_law:
                    amp = base[k] / fmax(r, clamp)
                else:
                    amp = base[k] * pow(fmax(r, clamp), -half_p)
                ph = guided_phase[k] + k0 * r
                re += amp * cos(ph)
                im -= amp * sin(ph)
            power = re * re + im * im
            value[i] = 10.0 * log10(fmax(power, POWER_FLOOR_MW))
    return value_arr

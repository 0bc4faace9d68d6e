"""Pure-numpy implementation of the per-cell kernels.

Mirrors ``_ckernels.pyx`` operation for operation. Candidates are ranked by
power (descending), path length (ascending), radiator index, then path kind
with the direct path first.
"""

from __future__ import annotations

import numpy as np

from .geometry import LENGTH_EPS, PARAM_EPS

POWER_FLOOR_MW = 1e-30
RADIATOR_CHUNK = 2048


def _clearance(px, py, ev, en, e0, e1):
    best = np.full(np.shape(px), np.inf)
    for e in range(e0, e1):
        best = np.minimum(best, en[e, 0] * (px - ev[e, 0]) + en[e, 1] * (py - ev[e, 1]))
    return best


def _crosses(ax, ay, bx, by, ev, en, e0, e1):
    dx = bx - ax
    dy = by - ay
    shape = np.broadcast(ax, bx).shape
    t0 = np.zeros(shape)
    t1 = np.ones(shape)
    alive = np.ones(shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for e in range(e0, e1):
            num = en[e, 0] * (ax - ev[e, 0]) + en[e, 1] * (ay - ev[e, 1])
            den = en[e, 0] * dx + en[e, 1] * dy
            alive &= ~((den == 0.0) & (num < 0.0))
            t = -num / den
            t0 = np.where(den > 0.0, np.maximum(t0, t), t0)
            t1 = np.where(den < 0.0, np.minimum(t1, t), t1)
            alive &= (t1 - t0) > PARAM_EPS
    mx = ax + 0.5 * (t0 + t1) * dx
    my = ay + 0.5 * (t0 + t1) * dy
    alive &= _clearance(mx, my, ev, en, e0, e1) > LENGTH_EPS
    both_inside = ((_clearance(ax, ay, ev, en, e0, e1) > LENGTH_EPS)
                   & (_clearance(bx, by, ev, en, e0, e1) > LENGTH_EPS))
    return alive & ~both_inside


def _obstruction(ax, ay, bx, by, ev, en, pstart, ploss):
    total = np.zeros(np.broadcast(ax, bx).shape)
    for k in range(len(ploss)):
        total = total + np.where(_crosses(ax, ay, bx, by, ev, en, pstart[k], pstart[k + 1]),
                                 ploss[k], 0.0)
    return total


def _best_of_kind(cand, length):
    """Per-row winner within one path kind: max power, then shortest, then lowest index."""
    rowmax = cand.max(axis=1)
    tied = cand == rowmax[:, None]
    lens = np.where(tied, length, np.inf)
    minlen = lens.min(axis=1)
    k = np.argmax(tied & (lens == minlen[:, None]), axis=1)
    return rowmax, minlen, k


def single_path_block(cx, cy, rx, ry, rbase, p, clamp, edge_v, edge_n, poly_start,
                      poly_loss, bar, bar_gain):
    cx = np.asarray(cx)[:, None]
    cy = np.asarray(cy)[:, None]
    rx = np.asarray(rx)[None, :]
    ry = np.asarray(ry)[None, :]
    rbase = np.asarray(rbase)[None, :]
    n = cx.shape[0]
    has_obstacles = len(poly_loss) > 0

    length = np.hypot(cx - rx, cy - ry)
    cand = rbase - 10.0 * p * np.log10(np.maximum(length, clamp))
    if has_obstacles:
        cand = cand - _obstruction(rx, ry, cx, cy, edge_v, edge_n, poly_start, poly_loss)
    best, best_len, best_k = _best_of_kind(cand, length)
    best_b = np.full(n, -1, dtype=np.int64)

    for b in range(len(bar)):
        sx, sy, ex, ey = bar[b]
        ddx = ex - sx
        ddy = ey - sy
        dlen = np.hypot(ddx, ddy)
        nx = -ddy / dlen
        ny = ddx / dlen
        side_r = nx * (rx - sx) + ny * (ry - sy)
        side_c = nx * (cx - sx) + ny * (cy - sy)
        valid = side_r * side_c > 0.0
        imx = rx - 2.0 * side_r * nx
        imy = ry - 2.0 * side_r * ny
        with np.errstate(divide="ignore", invalid="ignore"):
            tau = side_r / (side_r + side_c)
        qx = imx + tau * (cx - imx)
        qy = imy + tau * (cy - imy)
        u = ((qx - sx) * ddx + (qy - sy) * ddy) / (dlen * dlen)
        valid &= (u >= 0.0) & (u <= 1.0)
        rlen = np.hypot(cx - imx, cy - imy)
        rc = rbase - 10.0 * p * np.log10(np.maximum(rlen, clamp)) + bar_gain[b]
        if has_obstacles:
            rc = rc - _obstruction(rx, ry, qx, qy, edge_v, edge_n, poly_start, poly_loss)
            rc = rc - _obstruction(qx, qy, cx, cy, edge_v, edge_n, poly_start, poly_loss)
        rc = np.where(valid, rc, -np.inf)
        rlen = np.where(valid, rlen, np.inf)
        if not valid.any():
            continue
        rbest, rbest_len, rk = _best_of_kind(rc, rlen)
        take = ((rbest > best)
                | ((rbest == best) & (rbest_len < best_len))
                | ((rbest == best) & (rbest_len == best_len) & (rk < best_k)))
        take &= np.isfinite(rbest)
        best = np.where(take, rbest, best)
        best_len = np.where(take, rbest_len, best_len)
        best_k = np.where(take, rk, best_k)
        best_b = np.where(take, b, best_b)
    return best.astype(np.float64), best_k.astype(np.int64), best_b


def coherent_block(cx, cy, rx, ry, rbase, guided_phase, k0, p, clamp):
    cx = np.asarray(cx)[:, None]
    cy = np.asarray(cy)[:, None]
    re = np.zeros(cx.shape[0])
    im = np.zeros(cx.shape[0])
    base = np.power(10.0, np.asarray(rbase) / 20.0)
    for s in range(0, len(rx), RADIATOR_CHUNK):
        sl = slice(s, s + RADIATOR_CHUNK)
        r = np.hypot(cx - rx[None, sl], cy - ry[None, sl])
        if p == 2.0:
            amp = base[None, sl] / np.maximum(r, clamp)
        else:
            amp = base[None, sl] * np.power(np.maximum(r, clamp), -0.5 * p)
        ph = guided_phase[None, sl] + k0 * r
        re = re + (amp * np.cos(ph)).sum(axis=1)
        im = im - (amp * np.sin(ph)).sum(axis=1)
    return 10.0 * np.log10(np.maximum(re * re + im * im, POWER_FLOOR_MW))

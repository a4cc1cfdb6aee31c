"""Numpy fallback for the compiled batched validity kernel.

Same signature and results as ``_kernels.check_lanes``. Arithmetic is the
same sequence of IEEE operations, vectorized across lanes instead of looped.
Trigonometry for arm kinematics goes through ``math`` so results match the
scalar path exactly.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def _point_segment_d2(px, py, x0, y0, x1, y1):
    ex = x1 - x0
    ey = y1 - y0
    den = ex * ex + ey * ey
    with np.errstate(divide="ignore", invalid="ignore"):
        t = ((px - x0) * ex + (py - y0) * ey) / den
    t = np.where(den > 0.0, np.where(t < 0.0, 0.0, np.where(t > 1.0, 1.0, t)), 0.0)
    dx = x0 + t * ex - px
    dy = y0 + t * ey - py
    return dx * dx + dy * dy


def _clamp(p, lo, hi):
    return np.where(p < lo, lo, np.where(p > hi, hi, p))


def _point_box_d2_2d(px, py, lox, loy, hix, hiy):
    dx = px - _clamp(px, lox, hix)
    dy = py - _clamp(py, loy, hiy)
    return dx * dx + dy * dy


def _point_box_d2_3d(px, py, pz, lox, loy, loz, hix, hiy, hiz):
    dx = px - _clamp(px, lox, hix)
    dy = py - _clamp(py, loy, hiy)
    dz = pz - _clamp(pz, loz, hiz)
    return dx * dx + dy * dy + dz * dz


def _clip_axis(p0, e, lo, hi, t0, t1, ok):
    flat = e == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = (lo - p0) / e
        tb = (hi - p0) / e
    a = np.minimum(ta, tb)
    b = np.maximum(ta, tb)
    nt0 = np.where(a > t0, a, t0)
    nt1 = np.where(b < t1, b, t1)
    ok_flat = ok & ~((p0 < lo) | (p0 > hi))
    ok_slope = ok & ~(nt0 > nt1)
    return (np.where(flat, t0, nt0), np.where(flat, t1, nt1), np.where(flat, ok_flat, ok_slope))


def _segment_box_d2(x0, y0, x1, y1, lox, loy, hix, hiy):
    shape = np.broadcast(x0, y0, x1, y1, lox, loy, hix, hiy).shape
    t0 = np.zeros(shape)
    t1 = np.ones(shape)
    ok = np.ones(shape, dtype=bool)
    t0, t1, ok = _clip_axis(x0, x1 - x0, lox, hix, t0, t1, ok)
    t0, t1, ok = _clip_axis(y0, y1 - y0, loy, hiy, t0, t1, ok)
    best = _point_box_d2_2d(x0, y0, lox, loy, hix, hiy)
    best = np.minimum(best, _point_box_d2_2d(x1, y1, lox, loy, hix, hiy))
    for cx, cy in ((lox, loy), (hix, loy), (hix, hiy), (lox, hiy)):
        best = np.minimum(best, _point_segment_d2(cx, cy, x0, y0, x1, y1))
    return np.where(ok, 0.0, best)


def _arm_joints(lanes, links, basex, basey):
    """(n, L+1) joint coordinate arrays via scalar math per lane."""
    n = lanes.shape[1]
    L = len(links)
    jx = np.empty((n, L + 1))
    jy = np.empty((n, L + 1))
    ang = lanes[:L].T.tolist()
    links = [float(v) for v in links]
    for i in range(n):
        x, y, heading = basex, basey, 0.0
        jx[i, 0] = x
        jy[i, 0] = y
        row = ang[i]
        for j in range(L):
            heading = heading + row[j]
            x = x + links[j] * math.cos(heading)
            y = y + links[j] * math.sin(heading)
            jx[i, j + 1] = x
            jy[i, j + 1] = y
    return jx, jy


def check_lanes(lanes, n, out, width, stop_on_invalid, blo, bhi, bkind, robot_kind, radius, links,
                basex, basey, circles, spheres, boxes, cloud, cloud_radius):
    L = np.asarray(lanes)[:, :n]
    blo = np.asarray(blo)[:, None]
    bhi = np.asarray(bhi)[:, None]
    bkind = np.asarray(bkind)[:, None]
    inb = (blo <= L) & np.where(bkind == 1, L < bhi, L <= bhi)
    inb &= ~((bkind == 2) & (L != np.floor(L)))
    alive = np.all(inb, axis=0)

    if robot_kind == 3:
        jx, jy = _arm_joints(L, links, basex, basey)
        nl = len(links)
        for o in range(len(circles)):
            cx, cy, r = circles[o]
            rr = (radius + r) * (radius + r)
            d2 = _point_segment_d2(cx, cy, jx[:, :nl], jy[:, :nl], jx[:, 1:], jy[:, 1:])
            alive &= ~np.any(d2 <= rr, axis=1)
        rr = radius * radius
        for o in range(len(boxes)):
            b = boxes[o]
            d2 = _segment_box_d2(jx[:, :nl], jy[:, :nl], jx[:, 1:], jy[:, 1:], b[0], b[1], b[2], b[3])
            alive &= ~np.any(d2 <= rr, axis=1)
        if cloud is not None:
            for i in np.nonzero(alive)[0]:
                for j in range(nl):
                    if cloud.query_capsule((jx[i, j], jy[i, j]), (jx[i, j + 1], jy[i, j + 1]),
                                           radius + cloud_radius):
                        alive[i] = False
                        break
    elif robot_kind == 1:
        px, py, pz = L[0], L[1], L[2]
        for o in range(len(spheres)):
            sx, sy, sz, r = spheres[o]
            rr = (radius + r) * (radius + r)
            dx = px - sx
            dy = py - sy
            dz = pz - sz
            alive &= ~(dx * dx + dy * dy + dz * dz <= rr)
        rr = radius * radius
        for o in range(len(boxes)):
            b = boxes[o]
            alive &= ~(_point_box_d2_3d(px, py, pz, b[0], b[1], b[2], b[3], b[4], b[5]) <= rr)
        if cloud is not None:
            for i in np.nonzero(alive)[0]:
                if cloud.query_sphere((px[i], py[i], pz[i]), radius + cloud_radius, width):
                    alive[i] = False
    else:
        px, py = L[0], L[1]
        for o in range(len(circles)):
            cx, cy, r = circles[o]
            rr = (radius + r) * (radius + r)
            dx = px - cx
            dy = py - cy
            alive &= ~(dx * dx + dy * dy <= rr)
        rr = radius * radius
        for o in range(len(boxes)):
            b = boxes[o]
            alive &= ~(_point_box_d2_2d(px, py, b[0], b[1], b[2], b[3]) <= rr)
        if cloud is not None:
            for i in np.nonzero(alive)[0]:
                if cloud.query_sphere((px[i], py[i]), radius + cloud_radius, width):
                    alive[i] = False

    evaluated = n
    if stop_on_invalid:
        bad = np.nonzero(~alive)[0]
        if len(bad):
            evaluated = min(n, (int(bad[0]) // width + 1) * width)
    out[:evaluated] = alive[:evaluated]
    return evaluated

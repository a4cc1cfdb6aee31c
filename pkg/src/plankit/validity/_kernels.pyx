# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched validity kernel.

Lanes arrive coordinate-major (one row per coordinate, one column per
configuration). Each chunk of ``width`` lanes is tested obstacle by
obstacle, so every obstacle sweeps all lanes of the chunk together.
The predicates mirror ``geometry.py`` operation for operation.
"""

from libc.math cimport cos, sin, floor

import numpy as np

BACKEND = "cython"


cdef inline double point_segment_d2(double px, double py, double x0, double y0,
                                    double x1, double y1) noexcept nogil:
    cdef double ex = x1 - x0
    cdef double ey = y1 - y0
    cdef double den = ex * ex + ey * ey
    cdef double t
    if den > 0.0:
        t = ((px - x0) * ex + (py - y0) * ey) / den
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    else:
        t = 0.0
    cdef double dx = x0 + t * ex - px
    cdef double dy = y0 + t * ey - py
    return dx * dx + dy * dy


cdef inline double point_box_d2_2d(double px, double py, double lox, double loy,
                                   double hix, double hiy) noexcept nogil:
    cdef double cx = px
    cdef double cy = py
    if cx < lox:
        cx = lox
    elif cx > hix:
        cx = hix
    if cy < loy:
        cy = loy
    elif cy > hiy:
        cy = hiy
    cdef double dx = px - cx
    cdef double dy = py - cy
    return dx * dx + dy * dy


cdef inline double point_box_d2_3d(double px, double py, double pz, double lox, double loy, double loz,
                                   double hix, double hiy, double hiz) noexcept nogil:
    cdef double cx = px
    cdef double cy = py
    cdef double cz = pz
    if cx < lox:
        cx = lox
    elif cx > hix:
        cx = hix
    if cy < loy:
        cy = loy
    elif cy > hiy:
        cy = hiy
    if cz < loz:
        cz = loz
    elif cz > hiz:
        cz = hiz
    cdef double dx = px - cx
    cdef double dy = py - cy
    cdef double dz = pz - cz
    return dx * dx + dy * dy + dz * dz


cdef inline bint segment_hits_box(double x0, double y0, double x1, double y1,
                                  double lox, double loy, double hix, double hiy) noexcept nogil:
    cdef double t0 = 0.0
    cdef double t1 = 1.0
    cdef double ta, tb, tmp
    cdef double ex = x1 - x0
    cdef double ey = y1 - y0
    if ex == 0.0:
        if x0 < lox or x0 > hix:
            return False
    else:
        ta = (lox - x0) / ex
        tb = (hix - x0) / ex
        if ta > tb:
            tmp = ta
            ta = tb
            tb = tmp
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
        if t0 > t1:
            return False
    if ey == 0.0:
        if y0 < loy or y0 > hiy:
            return False
    else:
        ta = (loy - y0) / ey
        tb = (hiy - y0) / ey
        if ta > tb:
            tmp = ta
            ta = tb
            tb = tmp
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
        if t0 > t1:
            return False
    return True


cdef inline double segment_box_d2(double x0, double y0, double x1, double y1,
                                  double lox, double loy, double hix, double hiy) noexcept nogil:
    if segment_hits_box(x0, y0, x1, y1, lox, loy, hix, hiy):
        return 0.0
    cdef double best = point_box_d2_2d(x0, y0, lox, loy, hix, hiy)
    cdef double d = point_box_d2_2d(x1, y1, lox, loy, hix, hiy)
    if d < best:
        best = d
    d = point_segment_d2(lox, loy, x0, y0, x1, y1)
    if d < best:
        best = d
    d = point_segment_d2(hix, loy, x0, y0, x1, y1)
    if d < best:
        best = d
    d = point_segment_d2(hix, hiy, x0, y0, x1, y1)
    if d < best:
        best = d
    d = point_segment_d2(lox, hiy, x0, y0, x1, y1)
    if d < best:
        best = d
    return best


cdef bint pc_sphere(const double[:, ::1] pts, const double[:, ::1] nlo, const double[:, ::1] nhi,
                    const int[::1] nstart, const int[::1] nend, const int[::1] nleft, const int[::1] nright,
                    int dim, double cx, double cy, double cz, double radius, int width,
                    int[::1] stack) noexcept nogil:
    cdef double rr = radius * radius
    cdef double prune = rr * (1.0 + 1e-9) + 1e-12
    cdef int top = 1
    cdef int n, i, s, e
    cdef double d2, dx, dy, dz
    stack[0] = 0
    while top > 0:
        top -= 1
        n = stack[top]
        if dim == 3:
            d2 = point_box_d2_3d(cx, cy, cz, nlo[n, 0], nlo[n, 1], nlo[n, 2], nhi[n, 0], nhi[n, 1], nhi[n, 2])
        else:
            d2 = point_box_d2_2d(cx, cy, nlo[n, 0], nlo[n, 1], nhi[n, 0], nhi[n, 1])
        if d2 > prune:
            continue
        if nleft[n] < 0:
            s = nstart[n]
            while s < nend[n]:
                e = s + width
                if e > nend[n]:
                    e = nend[n]
                for i in range(s, e):
                    dx = pts[i, 0] - cx
                    dy = pts[i, 1] - cy
                    d2 = dx * dx + dy * dy
                    if dim == 3:
                        dz = pts[i, 2] - cz
                        d2 = d2 + dz * dz
                    if d2 <= rr:
                        return True
                s = e
            continue
        stack[top] = nright[n]
        stack[top + 1] = nleft[n]
        top += 2
    return False


cdef bint pc_capsule(const double[:, ::1] pts, const double[:, ::1] nlo, const double[:, ::1] nhi,
                     const int[::1] nstart, const int[::1] nend, const int[::1] nleft, const int[::1] nright,
                     double x0, double y0, double x1, double y1, double radius,
                     int[::1] stack) noexcept nogil:
    cdef double rr = radius * radius
    cdef double prune = rr * (1.0 + 1e-9) + 1e-12
    cdef int top = 1
    cdef int n, i
    stack[0] = 0
    while top > 0:
        top -= 1
        n = stack[top]
        if segment_box_d2(x0, y0, x1, y1, nlo[n, 0], nlo[n, 1], nhi[n, 0], nhi[n, 1]) > prune:
            continue
        if nleft[n] < 0:
            for i in range(nstart[n], nend[n]):
                if point_segment_d2(pts[i, 0], pts[i, 1], x0, y0, x1, y1) <= rr:
                    return True
            continue
        stack[top] = nright[n]
        stack[top + 1] = nleft[n]
        top += 2
    return False


def check_lanes(const double[:, ::1] lanes, int n, unsigned char[::1] out, int width, bint stop_on_invalid,
                const double[::1] blo, const double[::1] bhi, const int[::1] bkind,
                int robot_kind, double radius, const double[::1] links, double basex, double basey,
                const double[:, ::1] circles, const double[:, ::1] spheres, const double[:, ::1] boxes,
                object cloud, double cloud_radius):
    """Validate ``n`` lanes; returns the number of lanes evaluated.

    ``out[i]`` is 1 for a valid lane. With ``stop_on_invalid`` evaluation
    ends after the first chunk holding an invalid lane.
    """
    cdef int D = lanes.shape[0]
    cdef int nlinks = links.shape[0]
    cdef int nc = circles.shape[0]
    cdef int ns = spheres.shape[0]
    cdef int nb = boxes.shape[0]
    cdef int c0, c1, i, k, o, j
    cdef double x, v, d2, rr, px, py, pz, heading
    cdef bint any_bad
    cdef bint has_cloud = cloud is not None
    cdef int cdim = 0

    cdef const double[:, ::1] pts
    cdef const double[:, ::1] nlo
    cdef const double[:, ::1] nhi
    cdef const int[::1] nstart
    cdef const int[::1] nend
    cdef const int[::1] nleft
    cdef const int[::1] nright
    cdef int[::1] stack
    if has_cloud:
        pts = cloud.points
        nlo = cloud.node_lo
        nhi = cloud.node_hi
        nstart = cloud.node_start
        nend = cloud.node_end
        nleft = cloud.node_left
        nright = cloud.node_right
        cdim = cloud.dim
        stack = np.empty(2 * len(cloud.node_start) + 2, dtype=np.int32)

    alive_arr = np.empty(width, dtype=np.uint8)
    cdef unsigned char[::1] alive = alive_arr
    jx_arr = np.empty((width, nlinks + 1))
    jy_arr = np.empty((width, nlinks + 1))
    cdef double[:, ::1] jx = jx_arr
    cdef double[:, ::1] jy = jy_arr

    c0 = 0
    while c0 < n:
        c1 = c0 + width
        if c1 > n:
            c1 = n
        with nogil:
            # bounds: 0 closed, 1 half-open (angles), 2 closed integer
            for i in range(c0, c1):
                alive[i - c0] = 1
            for k in range(D):
                for i in range(c0, c1):
                    x = lanes[k, i]
                    if bkind[k] == 1:
                        if not (blo[k] <= x and x < bhi[k]):
                            alive[i - c0] = 0
                    elif not (blo[k] <= x and x <= bhi[k]):
                        alive[i - c0] = 0
                    elif bkind[k] == 2 and x != floor(x):
                        alive[i - c0] = 0

            if robot_kind == 3:
                for i in range(c0, c1):
                    jx[i - c0, 0] = basex
                    jy[i - c0, 0] = basey
                    heading = 0.0
                    for j in range(nlinks):
                        heading = heading + lanes[j, i]
                        jx[i - c0, j + 1] = jx[i - c0, j] + links[j] * cos(heading)
                        jy[i - c0, j + 1] = jy[i - c0, j] + links[j] * sin(heading)
                for o in range(nc):
                    rr = (radius + circles[o, 2]) * (radius + circles[o, 2])
                    for i in range(c0, c1):
                        if alive[i - c0]:
                            for j in range(nlinks):
                                if point_segment_d2(circles[o, 0], circles[o, 1], jx[i - c0, j], jy[i - c0, j],
                                                    jx[i - c0, j + 1], jy[i - c0, j + 1]) <= rr:
                                    alive[i - c0] = 0
                                    break
                rr = radius * radius
                for o in range(nb):
                    for i in range(c0, c1):
                        if alive[i - c0]:
                            for j in range(nlinks):
                                if segment_box_d2(jx[i - c0, j], jy[i - c0, j], jx[i - c0, j + 1], jy[i - c0, j + 1],
                                                  boxes[o, 0], boxes[o, 1], boxes[o, 2], boxes[o, 3]) <= rr:
                                    alive[i - c0] = 0
                                    break
                if has_cloud:
                    for i in range(c0, c1):
                        if alive[i - c0]:
                            for j in range(nlinks):
                                if pc_capsule(pts, nlo, nhi, nstart, nend, nleft, nright,
                                              jx[i - c0, j], jy[i - c0, j], jx[i - c0, j + 1], jy[i - c0, j + 1],
                                              radius + cloud_radius, stack):
                                    alive[i - c0] = 0
                                    break
            elif robot_kind == 1:
                for o in range(ns):
                    rr = (radius + spheres[o, 3]) * (radius + spheres[o, 3])
                    for i in range(c0, c1):
                        if alive[i - c0]:
                            px = lanes[0, i] - spheres[o, 0]
                            py = lanes[1, i] - spheres[o, 1]
                            pz = lanes[2, i] - spheres[o, 2]
                            if px * px + py * py + pz * pz <= rr:
                                alive[i - c0] = 0
                rr = radius * radius
                for o in range(nb):
                    for i in range(c0, c1):
                        if alive[i - c0]:
                            if point_box_d2_3d(lanes[0, i], lanes[1, i], lanes[2, i], boxes[o, 0], boxes[o, 1],
                                               boxes[o, 2], boxes[o, 3], boxes[o, 4], boxes[o, 5]) <= rr:
                                alive[i - c0] = 0
                if has_cloud:
                    for i in range(c0, c1):
                        if alive[i - c0]:
                            if pc_sphere(pts, nlo, nhi, nstart, nend, nleft, nright, cdim,
                                         lanes[0, i], lanes[1, i], lanes[2, i], radius + cloud_radius, width, stack):
                                alive[i - c0] = 0
            else:
                for o in range(nc):
                    rr = (radius + circles[o, 2]) * (radius + circles[o, 2])
                    for i in range(c0, c1):
                        if alive[i - c0]:
                            px = lanes[0, i] - circles[o, 0]
                            py = lanes[1, i] - circles[o, 1]
                            if px * px + py * py <= rr:
                                alive[i - c0] = 0
                rr = radius * radius
                for o in range(nb):
                    for i in range(c0, c1):
                        if alive[i - c0]:
                            if point_box_d2_2d(lanes[0, i], lanes[1, i], boxes[o, 0], boxes[o, 1],
                                               boxes[o, 2], boxes[o, 3]) <= rr:
                                alive[i - c0] = 0
                if has_cloud:
                    for i in range(c0, c1):
                        if alive[i - c0]:
                            if pc_sphere(pts, nlo, nhi, nstart, nend, nleft, nright, cdim,
                                         lanes[0, i], lanes[1, i], 0.0, radius + cloud_radius, width, stack):
                                alive[i - c0] = 0

            any_bad = False
            for i in range(c0, c1):
                out[i] = alive[i - c0]
                if not alive[i - c0]:
                    any_bad = True
        c0 = c1
        if any_bad and stop_on_invalid:
            return c0
    return c0

"""Scalar geometric predicates.

Every function here has a line-for-line twin in ``_kernels.pyx``; the two
must perform the same floating-point operations in the same order so that
batched and scalar validity agree bit for bit.
"""

from __future__ import annotations

import math


def point_segment_d2(px, py, x0, y0, x1, y1):
    ex = x1 - x0
    ey = y1 - y0
    den = ex * ex + ey * ey
    if den > 0.0:
        t = ((px - x0) * ex + (py - y0) * ey) / den
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    else:
        t = 0.0
    dx = x0 + t * ex - px
    dy = y0 + t * ey - py
    return dx * dx + dy * dy


def point_box_d2_2d(px, py, lox, loy, hix, hiy):
    cx = px
    if cx < lox:
        cx = lox
    elif cx > hix:
        cx = hix
    cy = py
    if cy < loy:
        cy = loy
    elif cy > hiy:
        cy = hiy
    dx = px - cx
    dy = py - cy
    return dx * dx + dy * dy


def point_box_d2_3d(px, py, pz, lox, loy, loz, hix, hiy, hiz):
    cx = px
    if cx < lox:
        cx = lox
    elif cx > hix:
        cx = hix
    cy = py
    if cy < loy:
        cy = loy
    elif cy > hiy:
        cy = hiy
    cz = pz
    if cz < loz:
        cz = loz
    elif cz > hiz:
        cz = hiz
    dx = px - cx
    dy = py - cy
    dz = pz - cz
    return dx * dx + dy * dy + dz * dz


def segment_hits_box(x0, y0, x1, y1, lox, loy, hix, hiy):
    """Liang-Barsky clip of the segment against a closed box."""
    t0 = 0.0
    t1 = 1.0
    ex = x1 - x0
    if ex == 0.0:
        if x0 < lox or x0 > hix:
            return False
    else:
        ta = (lox - x0) / ex
        tb = (hix - x0) / ex
        if ta > tb:
            ta, tb = tb, ta
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
        if t0 > t1:
            return False
    ey = y1 - y0
    if ey == 0.0:
        if y0 < loy or y0 > hiy:
            return False
    else:
        ta = (loy - y0) / ey
        tb = (hiy - y0) / ey
        if ta > tb:
            ta, tb = tb, ta
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
        if t0 > t1:
            return False
    return True


def segment_box_d2(x0, y0, x1, y1, lox, loy, hix, hiy):
    """Squared distance between a segment and a 2D box (0 when they touch)."""
    if segment_hits_box(x0, y0, x1, y1, lox, loy, hix, hiy):
        return 0.0
    best = point_box_d2_2d(x0, y0, lox, loy, hix, hiy)
    d = point_box_d2_2d(x1, y1, lox, loy, hix, hiy)
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


def arm_joints(base, links, angles):
    """Joint positions of a planar chain; angles are relative to the
    previous link, so each link's heading is the running sum."""
    x, y = float(base[0]), float(base[1])
    heading = 0.0
    out = []
    for length, q in zip(links, angles):
        heading = heading + float(q)
        x = x + length * math.cos(heading)
        y = y + length * math.sin(heading)
        out.append((x, y))
    return out

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched Reeds-Shepp distance.

Mirrors the scalar solvers in ``steering.py`` operation for operation, so
each distance is bitwise equal to ``reeds_shepp_distance``. Only the total
length is needed here, so segment signs and word labels are dropped.
"""

from libc.math cimport acos, asin, atan2, cos, fabs, fmod, sin, sqrt, INFINITY

import numpy as np

cdef double PI = 3.141592653589793
cdef double TWO_PI = 2.0 * PI
cdef double HALF_PI = 0.5 * PI
cdef double RS_ZERO = 10.0 * 2.220446049250313e-16


cdef inline double rs_mod2pi(double x) noexcept nogil:
    cdef double v = fmod(x, TWO_PI)
    if v < -PI:
        v += TWO_PI
    elif v > PI:
        v -= TWO_PI
    return v


cdef inline void tau_omega(double u, double v, double xi, double eta, double phi,
                           double* tau, double* omega) noexcept nogil:
    cdef double delta = rs_mod2pi(u - v)
    cdef double A = sin(u) - sin(delta)
    cdef double B = cos(u) - cos(delta) - 1.0
    cdef double t1 = atan2(eta * A - xi * B, xi * A + eta * B)
    cdef double t2 = 2.0 * (cos(delta) - cos(v) - cos(u)) + 3.0
    if t2 < 0:
        tau[0] = rs_mod2pi(t1 + PI)
    else:
        tau[0] = rs_mod2pi(t1)
    omega[0] = rs_mod2pi(tau[0] - u + v - phi)


# each solver writes (t, u, v) and returns whether the word exists

cdef inline bint LpSpLp(double x, double y, double phi, double* o) noexcept nogil:
    cdef double px = x - sin(phi)
    cdef double py = y - 1.0 + cos(phi)
    cdef double u = sqrt(px * px + py * py)
    cdef double t = atan2(py, px)
    cdef double v
    if t >= -RS_ZERO:
        v = rs_mod2pi(phi - t)
        if v >= -RS_ZERO:
            o[0] = t; o[1] = u; o[2] = v
            return True
    return False


cdef inline bint LpSpRp(double x, double y, double phi, double* o) noexcept nogil:
    cdef double px = x + sin(phi)
    cdef double py = y - 1.0 - cos(phi)
    cdef double u1 = sqrt(px * px + py * py)
    cdef double t1 = atan2(py, px)
    cdef double u, theta, t, v
    u1 = u1 * u1
    if u1 >= 4.0:
        u = sqrt(u1 - 4.0)
        theta = atan2(2.0, u)
        t = rs_mod2pi(t1 + theta)
        v = rs_mod2pi(t - phi)
        if t >= -RS_ZERO and v >= -RS_ZERO:
            o[0] = t; o[1] = u; o[2] = v
            return True
    return False


cdef inline bint LpRmL(double x, double y, double phi, double* o) noexcept nogil:
    cdef double xi = x - sin(phi)
    cdef double eta = y - 1.0 + cos(phi)
    cdef double u1 = sqrt(xi * xi + eta * eta)
    cdef double theta = atan2(eta, xi)
    cdef double u, t, v
    if u1 <= 4.0:
        u = -2.0 * asin(0.25 * u1)
        t = rs_mod2pi(theta + 0.5 * u + PI)
        v = rs_mod2pi(phi - t + u)
        if t >= -RS_ZERO and u <= RS_ZERO:
            o[0] = t; o[1] = u; o[2] = v
            return True
    return False


cdef inline bint LpRupLumRm(double x, double y, double phi, double* o) noexcept nogil:
    cdef double xi = x + sin(phi)
    cdef double eta = y - 1.0 - cos(phi)
    cdef double rho = 0.25 * (2.0 + sqrt(xi * xi + eta * eta))
    cdef double u, t, v
    if rho <= 1.0:
        u = acos(rho)
        tau_omega(u, -u, xi, eta, phi, &t, &v)
        if t >= -RS_ZERO and v <= RS_ZERO:
            o[0] = t; o[1] = u; o[2] = v
            return True
    return False


cdef inline bint LpRumLumRp(double x, double y, double phi, double* o) noexcept nogil:
    cdef double xi = x + sin(phi)
    cdef double eta = y - 1.0 - cos(phi)
    cdef double rho = (20.0 - xi * xi - eta * eta) / 16.0
    cdef double u, t, v
    if 0.0 <= rho <= 1.0:
        u = -acos(rho)
        if u >= -HALF_PI:
            tau_omega(u, u, xi, eta, phi, &t, &v)
            if t >= -RS_ZERO and v >= -RS_ZERO:
                o[0] = t; o[1] = u; o[2] = v
                return True
    return False


cdef inline bint LpRmSmLm(double x, double y, double phi, double* o) noexcept nogil:
    cdef double xi = x - sin(phi)
    cdef double eta = y - 1.0 + cos(phi)
    cdef double rho = sqrt(xi * xi + eta * eta)
    cdef double theta = atan2(eta, xi)
    cdef double r, u, t, v
    if rho >= 2.0:
        r = sqrt(rho * rho - 4.0)
        u = 2.0 - r
        t = rs_mod2pi(theta + atan2(r, -2.0))
        v = rs_mod2pi(phi - HALF_PI - t)
        if t >= -RS_ZERO and u <= RS_ZERO and v <= RS_ZERO:
            o[0] = t; o[1] = u; o[2] = v
            return True
    return False


cdef inline bint LpRmSmRm(double x, double y, double phi, double* o) noexcept nogil:
    cdef double xi = x + sin(phi)
    cdef double eta = y - 1.0 - cos(phi)
    cdef double rho = sqrt(-eta * -eta + xi * xi)
    cdef double theta = atan2(xi, -eta)
    cdef double t, u, v
    if rho >= 2.0:
        t = theta
        u = 2.0 - rho
        v = rs_mod2pi(t + HALF_PI - phi)
        if t >= -RS_ZERO and u <= RS_ZERO and v <= RS_ZERO:
            o[0] = t; o[1] = u; o[2] = v
            return True
    return False


cdef inline bint LpRmSLmRp(double x, double y, double phi, double* o) noexcept nogil:
    cdef double xi = x + sin(phi)
    cdef double eta = y - 1.0 - cos(phi)
    cdef double rho = sqrt(xi * xi + eta * eta)
    cdef double u, t, v
    if rho >= 2.0:
        u = 4.0 - sqrt(rho * rho - 4.0)
        if u <= RS_ZERO:
            t = rs_mod2pi(atan2((4.0 - u) * xi - 2.0 * eta, -2.0 * xi + (u - 4.0) * eta))
            v = rs_mod2pi(t - phi)
            if t >= -RS_ZERO and v >= -RS_ZERO:
                o[0] = t; o[1] = u; o[2] = v
                return True
    return False


ctypedef bint (*solver_t)(double, double, double, double*) noexcept nogil

# summation orders of |segment| lengths, matching the word builders:
# 0: t u v   1: v u t   2: t u u v   3: t H u v   4: v u H t   5: t H u H v
cdef inline double word_length(int order, double* o) noexcept nogil:
    cdef double t = fabs(o[0])
    cdef double u = fabs(o[1])
    cdef double v = fabs(o[2])
    if order == 0:
        return t + u + v
    if order == 1:
        return v + u + t
    if order == 2:
        return t + u + u + v
    if order == 3:
        return t + HALF_PI + u + v
    if order == 4:
        return v + u + HALF_PI + t
    return t + HALF_PI + u + HALF_PI + v


cdef inline double best_symmetric(solver_t solver, double x, double y, double phi, int order,
                                  double best) noexcept nogil:
    cdef double o[3]
    cdef double total
    cdef double sx, sy, sphi
    cdef int k
    for k in range(4):
        sx = 1.0 if k == 0 or k == 2 else -1.0
        sy = 1.0 if k < 2 else -1.0
        sphi = 1.0 if k == 0 or k == 3 else -1.0
        if solver(sx * x, sy * y, sphi * phi, o):
            total = word_length(order, o)
            if total < best:
                best = total
    return best


cdef double rs_distance(double ax, double ay, double ath, double bx, double by, double bth,
                        double rho) noexcept nogil:
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double c = cos(ath)
    cdef double s = sin(ath)
    cdef double x = (c * dx + s * dy) / rho
    cdef double y = (-s * dx + c * dy) / rho
    cdef double phi = bth - ath
    cdef double xb = x * cos(phi) + y * sin(phi)
    cdef double yb = x * sin(phi) - y * cos(phi)
    cdef double best = INFINITY
    best = best_symmetric(LpSpLp, x, y, phi, 0, best)
    best = best_symmetric(LpSpRp, x, y, phi, 0, best)
    best = best_symmetric(LpRmL, x, y, phi, 0, best)
    best = best_symmetric(LpRmL, xb, yb, phi, 1, best)
    best = best_symmetric(LpRupLumRm, x, y, phi, 2, best)
    best = best_symmetric(LpRumLumRp, x, y, phi, 2, best)
    best = best_symmetric(LpRmSmLm, x, y, phi, 3, best)
    best = best_symmetric(LpRmSmRm, x, y, phi, 3, best)
    best = best_symmetric(LpRmSmLm, xb, yb, phi, 4, best)
    best = best_symmetric(LpRmSmRm, xb, yb, phi, 4, best)
    best = best_symmetric(LpRmSLmRp, x, y, phi, 5, best)
    return rho * best


def reeds_shepp_distance_many(const double[:, ::1] Q, const double[::1] q, double rho):
    """Distances from each pose row of ``Q`` to the pose ``q``."""
    cdef Py_ssize_t n = Q.shape[0]
    cdef Py_ssize_t i
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = rs_distance(Q[i, 0], Q[i, 1], Q[i, 2], q[0], q[1], q[2], rho)
    return out

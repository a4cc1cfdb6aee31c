"""Shortest paths for car-like vehicles with a minimum turning radius.

Dubins cars move forward only (six candidate words). Reeds-Shepp cars may
reverse; their candidate set is enumerated with the time-flip and reflection
symmetries over the CSC, CCC, CCCC, CCSC and CCSCC families.

All solvers work in a normalized frame: the start is moved to the origin
with heading zero and distances are divided by the turning radius, so every
segment length is an arc angle (turns) or a distance in radii (straights).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi
_DUBINS_EPS = 1e-6
_DUBINS_ZERO = -1e-9
_RS_ZERO = 10.0 * np.finfo(float).eps

_compiled = None
if os.environ.get("PLANKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _steering as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

DUBINS_WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")


def mod2pi(x: float) -> float:
    if -1e-7 < x < 0.0:
        return 0.0
    xm = x - TWO_PI * math.floor(x / TWO_PI)
    if TWO_PI - xm < 0.5 * _DUBINS_EPS:
        xm = 0.0
    return xm


def _rs_mod2pi(x: float) -> float:
    # Reeds-Shepp: wrap into [-pi, pi)
    v = math.fmod(x, TWO_PI)
    if v < -math.pi:
        v += TWO_PI
    elif v > math.pi:
        v -= TWO_PI
    return v


@dataclass(frozen=True)
class SteeredPath:
    """A steering primitive: segment types, nonnegative lengths (in radii)
    and per-segment directions (+1 forward, -1 reverse)."""

    start: tuple[float, float, float]
    rho: float
    types: tuple[str, ...]
    segment_lengths: tuple[float, ...]
    directions: tuple[int, ...]

    @property
    def family(self) -> str:
        if all(d > 0 for d in self.directions) and len(self.types) == 3 and "".join(self.types) in DUBINS_WORDS:
            return "".join(self.types)
        return "".join(t + ("+" if d > 0 else "-") for t, d in zip(self.types, self.directions))

    @property
    def normalized_length(self) -> float:
        return sum(self.segment_lengths)

    @property
    def length(self) -> float:
        return self.rho * self.normalized_length

    def evaluate(self, t: float) -> np.ndarray:
        """Pose at fraction ``t`` of the total arc length."""
        return self.evaluate_many(np.array([t]))[0]

    def evaluate_many(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        out = np.empty((len(ts), 3))
        total = self.normalized_length
        for i, t in enumerate(ts):
            out[i] = self._at_arc(min(max(t, 0.0), 1.0) * total)
        return out

    def _at_arc(self, s: float) -> tuple[float, float, float]:
        x, y, th = self.start
        rho = self.rho
        for kind, seg, d in zip(self.types, self.segment_lengths, self.directions):
            if s <= 0.0:
                break
            v = min(s, seg)
            s -= v
            x, y, th = _advance(x, y, th, kind, d * v, rho)
        return x, y, _wrap(th)


def _wrap(a: float) -> float:
    r = a - TWO_PI * math.floor((a + math.pi) / TWO_PI)
    if r >= math.pi:
        r -= TWO_PI
    return r


def _advance(x, y, th, kind, v, rho):
    """Move along one segment with signed normalized length ``v``."""
    if kind == "L":
        return x + rho * (math.sin(th + v) - math.sin(th)), y + rho * (math.cos(th) - math.cos(th + v)), th + v
    if kind == "R":
        return x + rho * (math.sin(th) - math.sin(th - v)), y + rho * (math.cos(th - v) - math.cos(th)), th - v
    return x + rho * v * math.cos(th), y + rho * v * math.sin(th), th


def integrate_word(start, rho, types, signed_lengths):
    """Endpoint of a word given signed normalized segment lengths."""
    x, y, th = start
    for kind, v in zip(types, signed_lengths):
        x, y, th = _advance(x, y, th, kind, v, rho)
    return x, y, _wrap(th)


# ---------------------------------------------------------------------------
# Dubins
# ---------------------------------------------------------------------------

def _dubins_frame(a, b, rho):
    dx, dy = b[0] - a[0], b[1] - a[1]
    d = math.sqrt(dx * dx + dy * dy) / rho
    th = math.atan2(dy, dx) if d > 0.0 else 0.0
    return d, mod2pi(a[2] - th), mod2pi(b[2] - th)


def dubins_candidates(a, b, rho: float) -> list[tuple[str, tuple[float, float, float]]]:
    """All feasible Dubins words from ``a`` to ``b`` with normalized lengths."""
    if a[0] == b[0] and a[1] == b[1] and a[2] == b[2]:
        return [("LSL", (0.0, 0.0, 0.0))]
    d, alpha, beta = _dubins_frame(a, b, rho)
    ca, sa, cb, sb = math.cos(alpha), math.sin(alpha), math.cos(beta), math.sin(beta)
    out = []

    # straight length of LSL/RSR written as a sum of squares (no cancellation)
    tmp = (d + sa - sb) ** 2 + (cb - ca) ** 2
    if tmp >= _DUBINS_ZERO:
        theta = math.atan2(cb - ca, d + sa - sb)
        out.append(("LSL", (mod2pi(theta - alpha), math.sqrt(max(tmp, 0.0)), mod2pi(beta - theta))))

    tmp = (d - sa + sb) ** 2 + (ca - cb) ** 2
    if tmp >= _DUBINS_ZERO:
        theta = math.atan2(ca - cb, d - sa + sb)
        out.append(("RSR", (mod2pi(alpha - theta), math.sqrt(max(tmp, 0.0)), mod2pi(theta - beta))))

    tmp = -2.0 + d * d + 2.0 * (ca * cb + sa * sb + d * (sa + sb))
    if tmp >= _DUBINS_ZERO:
        p = math.sqrt(max(tmp, 0.0))
        theta = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
        out.append(("LSR", (mod2pi(theta - alpha), p, mod2pi(theta - beta))))

    tmp = d * d - 2.0 + 2.0 * (ca * cb + sa * sb - d * (sa + sb))
    if tmp >= _DUBINS_ZERO:
        p = math.sqrt(max(tmp, 0.0))
        theta = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
        out.append(("RSL", (mod2pi(alpha - theta), p, mod2pi(beta - theta))))

    tmp = 0.125 * (6.0 - d * d + 2.0 * (ca * cb + sa * sb + d * (sa - sb)))
    if abs(tmp) <= 1.0:
        p = TWO_PI - math.acos(tmp)
        theta = math.atan2(ca - cb, d - sa + sb)
        t = mod2pi(alpha - theta + 0.5 * p)
        out.append(("RLR", (t, p, mod2pi(alpha - beta - t + p))))

    tmp = 0.125 * (6.0 - d * d + 2.0 * (ca * cb + sa * sb - d * (sa - sb)))
    if abs(tmp) <= 1.0:
        p = TWO_PI - math.acos(tmp)
        theta = math.atan2(cb - ca, d + sa - sb)
        t = mod2pi(theta - alpha + 0.5 * p)
        out.append(("LRL", (t, p, mod2pi(beta - alpha - t + p))))
    return out


def dubins_shortest(a, b, rho: float) -> SteeredPath:
    best = None
    best_len = math.inf
    for word, segs in dubins_candidates(a, b, rho):
        total = segs[0] + segs[1] + segs[2]
        if total < best_len:
            best, best_len = (word, segs), total
    word, segs = best
    return SteeredPath((float(a[0]), float(a[1]), float(a[2])), rho, tuple(word), segs, (1, 1, 1))


def dubins_distance(a, b, rho: float) -> float:
    return rho * min(s[0] + s[1] + s[2] for _, s in dubins_candidates(a, b, rho))


def _np_mod2pi(x):
    xm = x - TWO_PI * np.floor(x / TWO_PI)
    xm = np.where((x < 0.0) & (x > -1e-7), 0.0, xm)
    return np.where(TWO_PI - xm < 0.5 * _DUBINS_EPS, 0.0, xm)


def dubins_distance_many(A: np.ndarray, B: np.ndarray, rho: float) -> np.ndarray:
    """Row-wise Dubins distance from poses ``A`` to poses ``B`` (broadcast)."""
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    dx = B[:, 0] - A[:, 0]
    dy = B[:, 1] - A[:, 1]
    d = np.sqrt(dx * dx + dy * dy) / rho
    th = np.where(d > 0.0, np.arctan2(dy, dx), 0.0)
    alpha = _np_mod2pi(A[:, 2] - th)
    beta = _np_mod2pi(B[:, 2] - th)
    ca, sa, cb, sb = np.cos(alpha), np.sin(alpha), np.cos(beta), np.sin(beta)
    cab = ca * cb + sa * sb
    best = np.full(d.shape, np.inf)
    with np.errstate(invalid="ignore"):
        tmp = (d + sa - sb) ** 2 + (cb - ca) ** 2
        theta = np.arctan2(cb - ca, d + sa - sb)
        L = _np_mod2pi(theta - alpha) + np.sqrt(np.maximum(tmp, 0.0)) + _np_mod2pi(beta - theta)
        best = np.where(tmp >= _DUBINS_ZERO, np.minimum(best, L), best)

        tmp = (d - sa + sb) ** 2 + (ca - cb) ** 2
        theta = np.arctan2(ca - cb, d - sa + sb)
        L = _np_mod2pi(alpha - theta) + np.sqrt(np.maximum(tmp, 0.0)) + _np_mod2pi(theta - beta)
        best = np.where(tmp >= _DUBINS_ZERO, np.minimum(best, L), best)

        tmp = -2.0 + d * d + 2.0 * (cab + d * (sa + sb))
        p = np.sqrt(np.maximum(tmp, 0.0))
        theta = np.arctan2(-ca - cb, d + sa + sb) - np.arctan2(-2.0, p)
        L = _np_mod2pi(theta - alpha) + p + _np_mod2pi(theta - beta)
        best = np.where(tmp >= _DUBINS_ZERO, np.minimum(best, L), best)

        tmp = d * d - 2.0 + 2.0 * (cab - d * (sa + sb))
        p = np.sqrt(np.maximum(tmp, 0.0))
        theta = np.arctan2(ca + cb, d - sa - sb) - np.arctan2(2.0, p)
        L = _np_mod2pi(alpha - theta) + p + _np_mod2pi(beta - theta)
        best = np.where(tmp >= _DUBINS_ZERO, np.minimum(best, L), best)

        tmp = 0.125 * (6.0 - d * d + 2.0 * (cab + d * (sa - sb)))
        p = TWO_PI - np.arccos(np.clip(tmp, -1.0, 1.0))
        theta = np.arctan2(ca - cb, d - sa + sb)
        t = _np_mod2pi(alpha - theta + 0.5 * p)
        L = t + p + _np_mod2pi(alpha - beta - t + p)
        best = np.where(np.abs(tmp) <= 1.0, np.minimum(best, L), best)

        tmp = 0.125 * (6.0 - d * d + 2.0 * (cab - d * (sa - sb)))
        p = TWO_PI - np.arccos(np.clip(tmp, -1.0, 1.0))
        theta = np.arctan2(cb - ca, d + sa - sb)
        t = _np_mod2pi(theta - alpha + 0.5 * p)
        L = t + p + _np_mod2pi(beta - alpha - t + p)
        best = np.where(np.abs(tmp) <= 1.0, np.minimum(best, L), best)
    same = (A[:, 0] == B[:, 0]) & (A[:, 1] == B[:, 1]) & (A[:, 2] == B[:, 2])
    return rho * np.where(same, 0.0, best)


# ---------------------------------------------------------------------------
# Reeds-Shepp
# ---------------------------------------------------------------------------

def _polar(x, y):
    return math.sqrt(x * x + y * y), math.atan2(y, x)


def _tau_omega(u, v, xi, eta, phi):
    delta = _rs_mod2pi(u - v)
    A = math.sin(u) - math.sin(delta)
    B = math.cos(u) - math.cos(delta) - 1.0
    t1 = math.atan2(eta * A - xi * B, xi * A + eta * B)
    t2 = 2.0 * (math.cos(delta) - math.cos(v) - math.cos(u)) + 3.0
    tau = _rs_mod2pi(t1 + math.pi) if t2 < 0 else _rs_mod2pi(t1)
    omega = _rs_mod2pi(tau - u + v - phi)
    return tau, omega


def _LpSpLp(x, y, phi):
    u, t = _polar(x - math.sin(phi), y - 1.0 + math.cos(phi))
    if t >= -_RS_ZERO:
        v = _rs_mod2pi(phi - t)
        if v >= -_RS_ZERO:
            return t, u, v
    return None


def _LpSpRp(x, y, phi):
    u1, t1 = _polar(x + math.sin(phi), y - 1.0 - math.cos(phi))
    u1 = u1 * u1
    if u1 >= 4.0:
        u = math.sqrt(u1 - 4.0)
        theta = math.atan2(2.0, u)
        t = _rs_mod2pi(t1 + theta)
        v = _rs_mod2pi(t - phi)
        if t >= -_RS_ZERO and v >= -_RS_ZERO:
            return t, u, v
    return None


def _LpRmL(x, y, phi):
    xi, eta = x - math.sin(phi), y - 1.0 + math.cos(phi)
    u1, theta = _polar(xi, eta)
    if u1 <= 4.0:
        u = -2.0 * math.asin(0.25 * u1)
        t = _rs_mod2pi(theta + 0.5 * u + math.pi)
        v = _rs_mod2pi(phi - t + u)
        if t >= -_RS_ZERO and u <= _RS_ZERO:
            return t, u, v
    return None


def _LpRupLumRm(x, y, phi):
    xi, eta = x + math.sin(phi), y - 1.0 - math.cos(phi)
    rho = 0.25 * (2.0 + math.sqrt(xi * xi + eta * eta))
    if rho <= 1.0:
        u = math.acos(rho)
        t, v = _tau_omega(u, -u, xi, eta, phi)
        if t >= -_RS_ZERO and v <= _RS_ZERO:
            return t, u, v
    return None


def _LpRumLumRp(x, y, phi):
    xi, eta = x + math.sin(phi), y - 1.0 - math.cos(phi)
    rho = (20.0 - xi * xi - eta * eta) / 16.0
    if 0.0 <= rho <= 1.0:
        u = -math.acos(rho)
        if u >= -HALF_PI:
            t, v = _tau_omega(u, u, xi, eta, phi)
            if t >= -_RS_ZERO and v >= -_RS_ZERO:
                return t, u, v
    return None


def _LpRmSmLm(x, y, phi):
    xi, eta = x - math.sin(phi), y - 1.0 + math.cos(phi)
    rho, theta = _polar(xi, eta)
    if rho >= 2.0:
        r = math.sqrt(rho * rho - 4.0)
        u = 2.0 - r
        t = _rs_mod2pi(theta + math.atan2(r, -2.0))
        v = _rs_mod2pi(phi - HALF_PI - t)
        if t >= -_RS_ZERO and u <= _RS_ZERO and v <= _RS_ZERO:
            return t, u, v
    return None


def _LpRmSmRm(x, y, phi):
    xi, eta = x + math.sin(phi), y - 1.0 - math.cos(phi)
    rho, theta = _polar(-eta, xi)
    if rho >= 2.0:
        t = theta
        u = 2.0 - rho
        v = _rs_mod2pi(t + HALF_PI - phi)
        if t >= -_RS_ZERO and u <= _RS_ZERO and v <= _RS_ZERO:
            return t, u, v
    return None


def _LpRmSLmRp(x, y, phi):
    xi, eta = x + math.sin(phi), y - 1.0 - math.cos(phi)
    rho, theta = _polar(xi, eta)
    if rho >= 2.0:
        u = 4.0 - math.sqrt(rho * rho - 4.0)
        if u <= _RS_ZERO:
            t = _rs_mod2pi(math.atan2((4.0 - u) * xi - 2.0 * eta, -2.0 * xi + (u - 4.0) * eta))
            v = _rs_mod2pi(t - phi)
            if t >= -_RS_ZERO and v >= -_RS_ZERO:
                return t, u, v
    return None


def _swap_lr(types):
    return tuple({"L": "R", "R": "L"}.get(c, c) for c in types)


def _symmetric(solver, x, y, phi, types, build):
    """Apply ``solver`` under the four time-flip / reflection symmetries."""
    out = []
    for sx, sy, sphi, flip, reflect in ((1, 1, 1, False, False), (-1, 1, -1, True, False),
                                        (1, -1, -1, False, True), (-1, -1, 1, True, True)):
        sol = solver(sx * x, sy * y, sphi * phi)
        if sol is None:
            continue
        lengths = build(*sol)
        if flip:
            lengths = tuple(-v for v in lengths)
        out.append((_swap_lr(types) if reflect else types, lengths))
    return out


def reeds_shepp_candidates(a, b, rho: float) -> list[tuple[tuple[str, ...], tuple[float, ...]]]:
    """All Reeds-Shepp candidates as (segment types, signed normalized lengths)."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    c, s = math.cos(a[2]), math.sin(a[2])
    x = (c * dx + s * dy) / rho
    y = (-s * dx + c * dy) / rho
    phi = b[2] - a[2]
    xb = x * math.cos(phi) + y * math.sin(phi)
    yb = x * math.sin(phi) - y * math.cos(phi)
    out = []
    # CSC
    out += _symmetric(_LpSpLp, x, y, phi, ("L", "S", "L"), lambda t, u, v: (t, u, v))
    out += _symmetric(_LpSpRp, x, y, phi, ("L", "S", "R"), lambda t, u, v: (t, u, v))
    # CCC, forward and backward
    out += _symmetric(_LpRmL, x, y, phi, ("L", "R", "L"), lambda t, u, v: (t, u, v))
    out += _symmetric(_LpRmL, xb, yb, phi, ("L", "R", "L"), lambda t, u, v: (v, u, t))
    # CCCC
    out += _symmetric(_LpRupLumRm, x, y, phi, ("L", "R", "L", "R"), lambda t, u, v: (t, u, -u, v))
    out += _symmetric(_LpRumLumRp, x, y, phi, ("L", "R", "L", "R"), lambda t, u, v: (t, u, u, v))
    # CCSC, forward and backward
    out += _symmetric(_LpRmSmLm, x, y, phi, ("L", "R", "S", "L"), lambda t, u, v: (t, -HALF_PI, u, v))
    out += _symmetric(_LpRmSmRm, x, y, phi, ("L", "R", "S", "R"), lambda t, u, v: (t, -HALF_PI, u, v))
    out += _symmetric(_LpRmSmLm, xb, yb, phi, ("L", "S", "R", "L"), lambda t, u, v: (v, u, -HALF_PI, t))
    out += _symmetric(_LpRmSmRm, xb, yb, phi, ("R", "S", "R", "L"), lambda t, u, v: (v, u, -HALF_PI, t))
    # CCSCC
    out += _symmetric(_LpRmSLmRp, x, y, phi, ("L", "R", "S", "L", "R"),
                      lambda t, u, v: (t, -HALF_PI, u, -HALF_PI, v))
    return out


def reeds_shepp_shortest(a, b, rho: float) -> SteeredPath:
    best = None
    best_len = math.inf
    for types, lengths in reeds_shepp_candidates(a, b, rho):
        total = sum(abs(v) for v in lengths)
        if total < best_len:
            best, best_len = (types, lengths), total
    types, lengths = best
    return SteeredPath(
        (float(a[0]), float(a[1]), float(a[2])),
        rho,
        types,
        tuple(abs(v) for v in lengths),
        tuple(-1 if v < 0 else 1 for v in lengths),
    )


def reeds_shepp_distance(a, b, rho: float) -> float:
    return rho * min(sum(abs(v) for v in lengths) for _, lengths in reeds_shepp_candidates(a, b, rho))


def reeds_shepp_distance_many(Q: np.ndarray, q, rho: float) -> np.ndarray:
    """Distances from each pose row of ``Q`` to the pose ``q``; bitwise equal
    to :func:`reeds_shepp_distance` on either backend."""
    if _compiled is not None:
        return _compiled.reeds_shepp_distance_many(np.ascontiguousarray(Q, dtype=float),
                                                   np.ascontiguousarray(q, dtype=float), float(rho))
    return np.array([reeds_shepp_distance(row, q, rho) for row in Q])

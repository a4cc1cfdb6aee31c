"""State space descriptors and the operations defined over them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ConfigurationError, ContractError, TimeMonotonicityError
from ..rng import RngStream
from . import steering

PI = math.pi
TWO_PI = 2.0 * math.pi


class Kind(str, Enum):
    REAL_VECTOR = "RealVector"
    SO2 = "SO2"
    SE2 = "SE2"
    DUBINS = "Dubins"
    REEDS_SHEPP = "ReedsShepp"
    DISCRETE = "Discrete"
    TIME_AUGMENTED = "TimeAugmented"
    COMPOUND = "Compound"


_CAR_KINDS = (Kind.SE2, Kind.DUBINS, Kind.REEDS_SHEPP)


def wrap_angle(a: float) -> float:
    """Normalize an angle into [-pi, pi)."""
    r = a - TWO_PI * math.floor((a + PI) / TWO_PI)
    if r >= PI:
        r -= TWO_PI
    return r


def wrap_angles(a: np.ndarray) -> np.ndarray:
    r = a - TWO_PI * np.floor((a + PI) / TWO_PI)
    return np.where(r >= PI, r - TWO_PI, r)


@dataclass(frozen=True)
class SpaceDescriptor:
    """Immutable description of a state space.

    Use the module-level constructors (:func:`real_vector`, :func:`so2`, ...)
    rather than building instances directly.
    """

    kind: Kind
    bounds: tuple[tuple[float, float], ...] = ()
    rho: float | None = None
    cardinality: int | None = None
    inner: "SpaceDescriptor | None" = None
    subspaces: tuple["SpaceDescriptor", ...] = ()
    weights: tuple[float, ...] = ()
    time_weight: float = 1.0
    _dim: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        for lo, hi in self.bounds:
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ConfigurationError(f"{self.kind.value}: bounds must be finite, got [{lo}, {hi}]")
            if not lo < hi:
                raise ConfigurationError(f"{self.kind.value}: bounds need low < high, got [{lo}, {hi}]")
        k = self.kind
        if k == Kind.REAL_VECTOR:
            if not self.bounds:
                raise ConfigurationError("RealVector needs at least one bounded axis")
            dim = len(self.bounds)
        elif k == Kind.SO2:
            dim = 1
        elif k in _CAR_KINDS:
            if len(self.bounds) != 2:
                raise ConfigurationError(f"{k.value} needs x and y bounds")
            if k != Kind.SE2 and not (self.rho is not None and self.rho > 0 and math.isfinite(self.rho)):
                raise ConfigurationError(f"{k.value} turning radius must be > 0, got {self.rho}")
            if k == Kind.SE2 and (len(self.weights) != 2 or min(self.weights) <= 0):
                raise ConfigurationError("SE2 needs two positive weights (translation, rotation)")
            dim = 3
        elif k == Kind.DISCRETE:
            if self.cardinality is None or self.cardinality < 1:
                raise ConfigurationError(f"Discrete cardinality must be >= 1, got {self.cardinality}")
            dim = 1
        elif k == Kind.TIME_AUGMENTED:
            if self.inner is None or len(self.bounds) != 1:
                raise ConfigurationError("TimeAugmented needs an inner space and one time bound")
            if self.time_weight <= 0:
                raise ConfigurationError("TimeAugmented time weight must be > 0")
            dim = self.inner.dim + 1
        elif k == Kind.COMPOUND:
            if not self.subspaces or len(self.weights) != len(self.subspaces):
                raise ConfigurationError("Compound needs subspaces with one weight each")
            if min(self.weights) <= 0:
                raise ConfigurationError("Compound weights must all be > 0")
            dim = sum(s.dim for s in self.subspaces)
        else:  # pragma: no cover
            raise ConfigurationError(f"unknown space kind {k}")
        object.__setattr__(self, "_dim", dim)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def symmetric(self) -> bool:
        if self.kind == Kind.DUBINS:
            return False
        if self.kind == Kind.TIME_AUGMENTED:
            return self.inner.symmetric
        if self.kind == Kind.COMPOUND:
            return all(s.symmetric for s in self.subspaces)
        return True

    @property
    def signature(self) -> str:
        """Compact text identifying the space layout (used in path files)."""
        k = self.kind
        if k == Kind.REAL_VECTOR:
            return f"RealVector[{self.dim}]"
        if k in (Kind.DUBINS, Kind.REEDS_SHEPP):
            return f"{k.value}[rho={self.rho!r}]"
        if k == Kind.DISCRETE:
            return f"Discrete[{self.cardinality}]"
        if k == Kind.TIME_AUGMENTED:
            return f"TimeAugmented({self.inner.signature})"
        if k == Kind.COMPOUND:
            return "Compound(" + ",".join(s.signature for s in self.subspaces) + ")"
        return k.value

    def diameter(self) -> float:
        """Distance between opposite bound corners, plus pi per rotation.

        Used only to size relative defaults (edge lengths, resolutions).
        """
        k = self.kind
        if k == Kind.REAL_VECTOR:
            return math.sqrt(sum((hi - lo) ** 2 for lo, hi in self.bounds))
        if k == Kind.SO2:
            return PI
        if k in _CAR_KINDS:
            diag = math.sqrt(sum((hi - lo) ** 2 for lo, hi in self.bounds))
            if k == Kind.SE2:
                return self.weights[0] * diag + self.weights[1] * PI
            return diag + PI * self.rho
        if k == Kind.DISCRETE:
            return float(max(self.cardinality - 1, 1))
        if k == Kind.TIME_AUGMENTED:
            lo, hi = self.bounds[0]
            return self.inner.diameter() + self.time_weight * (hi - lo)
        return sum(w * s.diameter() for w, s in zip(self.weights, self.subspaces))

    # -- layout helpers -----------------------------------------------------

    def _sub_slices(self):
        out, i = [], 0
        for s in self.subspaces:
            out.append(slice(i, i + s.dim))
            i += s.dim
        return out


# -- constructors ---------------------------------------------------------

def _bounds(bounds) -> tuple[tuple[float, float], ...]:
    return tuple((float(lo), float(hi)) for lo, hi in bounds)


def real_vector(bounds) -> SpaceDescriptor:
    return SpaceDescriptor(Kind.REAL_VECTOR, bounds=_bounds(bounds))


def so2() -> SpaceDescriptor:
    return SpaceDescriptor(Kind.SO2)


def se2(bounds, weights=(1.0, 0.5)) -> SpaceDescriptor:
    return SpaceDescriptor(Kind.SE2, bounds=_bounds(bounds), weights=tuple(float(w) for w in weights))


def dubins(bounds, rho: float) -> SpaceDescriptor:
    return SpaceDescriptor(Kind.DUBINS, bounds=_bounds(bounds), rho=float(rho))


def reeds_shepp(bounds, rho: float) -> SpaceDescriptor:
    return SpaceDescriptor(Kind.REEDS_SHEPP, bounds=_bounds(bounds), rho=float(rho))


def discrete(cardinality: int) -> SpaceDescriptor:
    return SpaceDescriptor(Kind.DISCRETE, cardinality=int(cardinality))


def time_augmented(inner: SpaceDescriptor, time_bounds, time_weight: float = 1.0) -> SpaceDescriptor:
    return SpaceDescriptor(Kind.TIME_AUGMENTED, inner=inner, bounds=_bounds([time_bounds]),
                           time_weight=float(time_weight))


def compound(subspaces, weights=None) -> SpaceDescriptor:
    subspaces = tuple(subspaces)
    if weights is None:
        weights = (1.0,) * len(subspaces)
    return SpaceDescriptor(Kind.COMPOUND, subspaces=subspaces, weights=tuple(float(w) for w in weights))


# -- state helpers --------------------------------------------------------

def as_state(space: SpaceDescriptor, q) -> np.ndarray:
    """Validate ``q`` against ``space`` and return it as a float array."""
    arr = np.asarray(q, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != space.dim:
        raise ContractError(f"state of shape {arr.shape} does not match {space.signature} (dim {space.dim})")
    if not np.isfinite(arr).all():
        raise ContractError(f"state has non-finite entries: {arr}")
    return arr


# -- distance -------------------------------------------------------------

def distance(space: SpaceDescriptor, a, b) -> float:
    """Metric distance from ``a`` to ``b`` (directed for Dubins)."""
    a = as_state(space, a)
    b = as_state(space, b)
    return _dist(space, a, b)


def distance_trusted(space: SpaceDescriptor, a: np.ndarray, b: np.ndarray) -> float:
    """:func:`distance` without argument validation, for hot loops over
    states the caller already holds as float arrays of the right shape."""
    return _dist(space, a, b)


def _dist(space, a, b) -> float:
    k = space.kind
    if k == Kind.REAL_VECTOR:
        acc = 0.0
        for i in range(len(a)):
            d = float(a[i]) - float(b[i])
            acc = acc + d * d
        return math.sqrt(acc)
    if k == Kind.SO2:
        return abs(wrap_angle(float(b[0]) - float(a[0])))
    if k == Kind.SE2:
        dx = float(a[0]) - float(b[0])
        dy = float(a[1]) - float(b[1])
        return (space.weights[0] * math.sqrt(dx * dx + dy * dy)
                + space.weights[1] * abs(wrap_angle(float(b[2]) - float(a[2]))))
    if k == Kind.DUBINS:
        return steering.dubins_distance(a, b, space.rho)
    if k == Kind.REEDS_SHEPP:
        return steering.reeds_shepp_distance(a, b, space.rho)
    if k == Kind.DISCRETE:
        return abs(float(a[0]) - float(b[0]))
    if k == Kind.TIME_AUGMENTED:
        return _dist(space.inner, a[:-1], b[:-1]) + space.time_weight * abs(float(a[-1]) - float(b[-1]))
    total = 0.0
    for w, s, sl in zip(space.weights, space.subspaces, space._sub_slices()):
        total += w * _dist(s, a[sl], b[sl])
    return total


def distance_many(space: SpaceDescriptor, Q: np.ndarray, q, reverse: bool = False) -> np.ndarray:
    """Distances between each row of ``Q`` and ``q``.

    Returns ``d(Q[i], q)``; with ``reverse`` it returns ``d(q, Q[i])``. The
    two only differ for Dubins components.
    """
    Q = np.asarray(Q, dtype=float).reshape(-1, space.dim)
    q = np.asarray(q, dtype=float)
    return _dist_many(space, Q, q, reverse)


def _dist_many(space, Q, q, reverse):
    k = space.kind
    if k == Kind.REAL_VECTOR:
        acc = np.zeros(len(Q))
        for i in range(space.dim):
            d = Q[:, i] - q[i]
            acc = acc + d * d
        return np.sqrt(acc)
    if k == Kind.SO2:
        return np.abs(wrap_angles(q[0] - Q[:, 0]))
    if k == Kind.SE2:
        dx = Q[:, 0] - q[0]
        dy = Q[:, 1] - q[1]
        return (space.weights[0] * np.sqrt(dx * dx + dy * dy)
                + space.weights[1] * np.abs(wrap_angles(q[2] - Q[:, 2])))
    if k == Kind.DUBINS:
        if reverse:
            return steering.dubins_distance_many(q[None, :], Q, space.rho)
        return steering.dubins_distance_many(Q, q[None, :], space.rho)
    if k == Kind.REEDS_SHEPP:
        return steering.reeds_shepp_distance_many(Q, q, space.rho)
    if k == Kind.DISCRETE:
        return np.abs(Q[:, 0] - q[0])
    if k == Kind.TIME_AUGMENTED:
        return _dist_many(space.inner, Q[:, :-1], q[:-1], reverse) + space.time_weight * np.abs(Q[:, -1] - q[-1])
    total = np.zeros(len(Q))
    for w, s, sl in zip(space.weights, space.subspaces, space._sub_slices()):
        total = total + w * _dist_many(s, Q[:, sl], q[sl], reverse)
    return total


def states_equal(space: SpaceDescriptor, a, b, eps: float = 0.0) -> bool:
    if eps < 0:
        raise ContractError("eps must be >= 0")
    return distance(space, a, b) <= eps


# -- steering -------------------------------------------------------------

def steer_shortest(space: SpaceDescriptor, a, b) -> steering.SteeredPath:
    """Shortest car path between two (x, y, heading) states."""
    a = as_state(space, a)
    b = as_state(space, b)
    if space.kind == Kind.DUBINS:
        return steering.dubins_shortest(a, b, space.rho)
    if space.kind == Kind.REEDS_SHEPP:
        return steering.reeds_shepp_shortest(a, b, space.rho)
    raise ContractError(f"steer_shortest needs a Dubins or ReedsShepp space, got {space.kind.value}")


# -- interpolation --------------------------------------------------------

def interpolate(space: SpaceDescriptor, a, b, t: float) -> np.ndarray:
    a = as_state(space, a)
    b = as_state(space, b)
    if not 0.0 <= t <= 1.0:
        raise ContractError(f"interpolation parameter must lie in [0, 1], got {t}")
    return interpolate_many(space, a, b, np.array([float(t)]))[0]


def interpolate_many(space: SpaceDescriptor, a: np.ndarray, b: np.ndarray, ts) -> np.ndarray:
    """States at parameters ``ts`` along the geodesic from ``a`` to ``b``.

    Parameter 0 yields ``a`` and 1 yields ``b`` exactly.
    """
    ts = np.asarray(ts, dtype=float)
    out = _interp_many(space, a, b, ts)
    out[ts == 0.0] = a
    out[ts == 1.0] = b
    return out


def _interp_many(space, a, b, ts):
    k = space.kind
    tcol = ts[:, None]
    if k == Kind.REAL_VECTOR:
        return a[None, :] + tcol * (b - a)[None, :]
    if k == Kind.SO2:
        d = wrap_angle(float(b[0]) - float(a[0]))
        return wrap_angles(a[0] + tcol * d)
    if k == Kind.SE2:
        out = np.empty((len(ts), 3))
        out[:, :2] = a[None, :2] + tcol * (b[:2] - a[:2])[None, :]
        out[:, 2] = wrap_angles(a[2] + ts * wrap_angle(float(b[2]) - float(a[2])))
        return out
    if k in (Kind.DUBINS, Kind.REEDS_SHEPP):
        return steer_shortest(space, a, b).evaluate_many(ts)
    if k == Kind.DISCRETE:
        return np.floor(a[0] + tcol * (b[0] - a[0]) + 0.5)
    if k == Kind.TIME_AUGMENTED:
        if b[-1] < a[-1]:
            raise TimeMonotonicityError(f"cannot interpolate backwards in time ({a[-1]} -> {b[-1]})")
        out = np.empty((len(ts), space.dim))
        out[:, :-1] = _interp_many(space.inner, a[:-1], b[:-1], ts)
        out[:, -1] = a[-1] + ts * (b[-1] - a[-1])
        return out
    out = np.empty((len(ts), space.dim))
    for s, sl in zip(space.subspaces, space._sub_slices()):
        out[:, sl] = _interp_many(s, a[sl], b[sl], ts)
    return out


# -- bounds ---------------------------------------------------------------

def enforce_bounds(space: SpaceDescriptor, q) -> np.ndarray:
    q = np.array(q, dtype=float)
    if q.ndim != 1 or q.shape[0] != space.dim:
        raise ContractError(f"state of shape {q.shape} does not match {space.signature}")
    _enforce(space, q)
    return q


def _enforce(space, q):
    k = space.kind
    if k == Kind.REAL_VECTOR:
        for i, (lo, hi) in enumerate(space.bounds):
            q[i] = min(max(q[i], lo), hi)
    elif k == Kind.SO2:
        q[0] = wrap_angle(q[0])
    elif k in _CAR_KINDS:
        for i, (lo, hi) in enumerate(space.bounds):
            q[i] = min(max(q[i], lo), hi)
        q[2] = wrap_angle(q[2])
    elif k == Kind.DISCRETE:
        q[0] = min(max(math.floor(q[0] + 0.5), 0), space.cardinality - 1)
    elif k == Kind.TIME_AUGMENTED:
        inner = q[:-1]
        _enforce(space.inner, inner)
        lo, hi = space.bounds[0]
        q[-1] = min(max(q[-1], lo), hi)
    else:
        for s, sl in zip(space.subspaces, space._sub_slices()):
            _enforce(s, q[sl])


def satisfies_bounds(space: SpaceDescriptor, q) -> bool:
    q = np.asarray(q, dtype=float)
    k = space.kind
    if k == Kind.REAL_VECTOR:
        return all(lo <= q[i] <= hi for i, (lo, hi) in enumerate(space.bounds))
    if k == Kind.SO2:
        return -PI <= q[0] < PI
    if k in _CAR_KINDS:
        return all(lo <= q[i] <= hi for i, (lo, hi) in enumerate(space.bounds)) and -PI <= q[2] < PI
    if k == Kind.DISCRETE:
        return 0 <= q[0] <= space.cardinality - 1 and q[0] == math.floor(q[0])
    if k == Kind.TIME_AUGMENTED:
        lo, hi = space.bounds[0]
        return satisfies_bounds(space.inner, q[:-1]) and lo <= q[-1] <= hi
    return all(satisfies_bounds(s, q[sl]) for s, sl in zip(space.subspaces, space._sub_slices()))


def flat_bounds(space: SpaceDescriptor) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-coordinate bounds as ``(low, high, kind)`` arrays.

    ``kind`` is 0 for a closed interval, 1 for half-open ``[low, high)``
    (angles) and 2 for a closed integer range. Checking every coordinate
    against these is equivalent to :func:`satisfies_bounds`.
    """
    lo: list[float] = []
    hi: list[float] = []
    kind: list[int] = []

    def walk(s):
        k = s.kind
        if k == Kind.REAL_VECTOR:
            for a, b in s.bounds:
                lo.append(a), hi.append(b), kind.append(0)
        elif k == Kind.SO2:
            lo.append(-PI), hi.append(PI), kind.append(1)
        elif k in _CAR_KINDS:
            for a, b in s.bounds:
                lo.append(a), hi.append(b), kind.append(0)
            lo.append(-PI), hi.append(PI), kind.append(1)
        elif k == Kind.DISCRETE:
            lo.append(0.0), hi.append(float(s.cardinality - 1)), kind.append(2)
        elif k == Kind.TIME_AUGMENTED:
            walk(s.inner)
            lo.append(s.bounds[0][0]), hi.append(s.bounds[0][1]), kind.append(0)
        else:
            for sub in s.subspaces:
                walk(sub)

    walk(space)
    return np.array(lo), np.array(hi), np.array(kind, dtype=np.int32)


# -- sampling -------------------------------------------------------------

def sample_uniform(space: SpaceDescriptor, rng: RngStream) -> np.ndarray:
    out = np.empty(space.dim)
    _sample_into(space, rng, out)
    return out


def _sample_into(space, rng, out):
    k = space.kind
    if k == Kind.REAL_VECTOR:
        lo = np.array([b[0] for b in space.bounds])
        hi = np.array([b[1] for b in space.bounds])
        out[:] = rng.uniform(lo, hi)
    elif k == Kind.SO2:
        out[0] = wrap_angle(rng.uniform(-PI, PI))
    elif k in _CAR_KINDS:
        out[0] = rng.uniform(*space.bounds[0])
        out[1] = rng.uniform(*space.bounds[1])
        out[2] = wrap_angle(rng.uniform(-PI, PI))
    elif k == Kind.DISCRETE:
        out[0] = rng.integers(space.cardinality)
    elif k == Kind.TIME_AUGMENTED:
        _sample_into(space.inner, rng, out[:-1])
        out[-1] = rng.uniform(*space.bounds[0])
    else:
        for s, sl in zip(space.subspaces, space._sub_slices()):
            _sample_into(s, rng, out[sl])


def sample_gaussian(space: SpaceDescriptor, rng: RngStream, mean, stddev: float) -> np.ndarray:
    """Per-axis normal perturbation of ``mean``, then bounds enforcement
    (angles are wrapped, discrete values rounded)."""
    if stddev < 0:
        raise ContractError("stddev must be >= 0")
    mean = as_state(space, mean)
    q = mean + stddev * rng.normal(space.dim)
    return enforce_bounds(space, q)

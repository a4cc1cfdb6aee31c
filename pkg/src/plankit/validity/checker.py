"""State and motion validity over a scene.

Two evaluation paths produce identical answers:

* :func:`is_state_valid` is the scalar reference, plain Python per state.
* :func:`check_batch` and :class:`ValidityChecker` feed coordinate-major
  lane batches to a kernel: the compiled extension when it is importable,
  the numpy fallback otherwise (or when ``PLANKIT_PURE_PYTHON=1``).
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import ConfigurationError, ContractError
from ..spaces import Kind, SpaceDescriptor, as_state, distance, flat_bounds, interpolate_many, satisfies_bounds
from . import _kernels_py
from .geometry import arm_joints, point_box_d2_2d, point_box_d2_3d, point_segment_d2, segment_box_d2
from .scene import RobotKind, RobotModel, Scene

_compiled = None
if os.environ.get("PLANKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

DEFAULT_WIDTH = 8


def available_backends() -> list[str]:
    return (["cython"] if _compiled is not None else []) + ["python"]


def default_backend() -> str:
    return "cython" if _compiled is not None else "python"


def _kernel(backend: str | None):
    backend = backend or default_backend()
    if backend == "cython":
        if _compiled is None:
            raise ConfigurationError("compiled kernel is not available; rebuild the extension")
        return _compiled
    if backend == "python":
        return _kernels_py
    raise ConfigurationError(f"unknown kernel backend {backend!r}")


def _position_offset_ok(space: SpaceDescriptor, wdim: int) -> bool:
    """Whether the leading coordinates of ``space`` hold a ``wdim`` position."""
    k = space.kind
    if k == Kind.REAL_VECTOR:
        return space.dim >= wdim
    if k in (Kind.SE2, Kind.DUBINS, Kind.REEDS_SHEPP):
        return wdim == 2
    if k == Kind.TIME_AUGMENTED:
        return _position_offset_ok(space.inner, wdim)
    if k == Kind.COMPOUND:
        return _position_offset_ok(space.subspaces[0], wdim)
    return False


def check_compatibility(scene: Scene, robot: RobotModel, space: SpaceDescriptor) -> None:
    wdim = robot.workspace_dim
    other = scene.dims() - {wdim}
    if other:
        raise ConfigurationError(
            f"{robot.kind.value} robot works in {wdim}D but the scene holds {sorted(other)}D obstacles")
    if robot.kind == RobotKind.PLANAR_ARM:
        if space.dim < len(robot.link_lengths):
            raise ConfigurationError(
                f"PlanarArm with {len(robot.link_lengths)} links needs a space of dimension >= "
                f"{len(robot.link_lengths)}, got {space.dim}")
    elif not _position_offset_ok(space, wdim):
        raise ConfigurationError(f"space {space.signature} has no leading {wdim}D position for a "
                                 f"{robot.kind.value} robot")


def fk_planar_arm(robot: RobotModel, q) -> list[tuple[float, float]]:
    """Joint positions after each link, ending with the end effector."""
    if robot.kind != RobotKind.PLANAR_ARM:
        raise ConfigurationError("fk_planar_arm needs a PlanarArm robot")
    q = [float(v) for v in q]
    if len(q) != len(robot.link_lengths):
        raise ContractError(f"expected {len(robot.link_lengths)} joint angles, got {len(q)}")
    return arm_joints(robot.base, robot.link_lengths, q)


def is_state_valid(scene: Scene, robot: RobotModel, space: SpaceDescriptor, q) -> bool:
    """Scalar validity: in bounds and no obstacle intersects the robot."""
    check_compatibility(scene, robot, space)
    q = as_state(space, q)
    if not satisfies_bounds(space, q):
        return False
    R = robot.footprint_radius
    cloud = scene.point_cloud
    cr = scene.point_cloud_radius
    if robot.kind == RobotKind.PLANAR_ARM:
        n = len(robot.link_lengths)
        pts = [robot.base] + arm_joints(robot.base, robot.link_lengths, [float(v) for v in q[:n]])
        segs = list(zip(pts[:-1], pts[1:]))
        for cx, cy, r in scene.circles2d:
            rr = (R + r) * (R + r)
            for (x0, y0), (x1, y1) in segs:
                if point_segment_d2(cx, cy, x0, y0, x1, y1) <= rr:
                    return False
        rr = R * R
        for lo, hi in scene.boxes:
            for (x0, y0), (x1, y1) in segs:
                if segment_box_d2(x0, y0, x1, y1, lo[0], lo[1], hi[0], hi[1]) <= rr:
                    return False
        if cloud is not None:
            for p0, p1 in segs:
                if cloud.query_capsule(p0, p1, R + cr):
                    return False
        return True
    if robot.kind == RobotKind.POINT3D:
        px, py, pz = float(q[0]), float(q[1]), float(q[2])
        for sx, sy, sz, r in scene.spheres3d:
            dx = px - sx
            dy = py - sy
            dz = pz - sz
            if dx * dx + dy * dy + dz * dz <= (R + r) * (R + r):
                return False
        for lo, hi in scene.boxes:
            if point_box_d2_3d(px, py, pz, *lo, *hi) <= R * R:
                return False
        if cloud is not None and cloud.query_sphere((px, py, pz), R + cr):
            return False
        return True
    px, py = float(q[0]), float(q[1])
    for cx, cy, r in scene.circles2d:
        dx = px - cx
        dy = py - cy
        if dx * dx + dy * dy <= (R + r) * (R + r):
            return False
    for lo, hi in scene.boxes:
        if point_box_d2_2d(px, py, *lo, *hi) <= R * R:
            return False
    if cloud is not None and cloud.query_sphere((px, py), R + cr):
        return False
    return True


class ConfigBatch:
    """``width`` configuration lanes stored coordinate-major.

    Lanes ``[0, used)`` are live; trailing lanes are padding and never
    reported.
    """

    def __init__(self, space: SpaceDescriptor, width: int = DEFAULT_WIDTH):
        if width < 1 or width & (width - 1):
            raise ConfigurationError(f"batch width must be a power of two, got {width}")
        self.space = space
        self.width = width
        self.lanes = np.zeros((space.dim, width))
        self.used = 0

    @classmethod
    def from_states(cls, space: SpaceDescriptor, states, width: int = DEFAULT_WIDTH) -> "ConfigBatch":
        batch = cls(space, width)
        for q in states:
            batch.push(q)
        return batch

    def push(self, q) -> None:
        if self.used >= self.width:
            raise ContractError("batch is full")
        self.lanes[:, self.used] = as_state(self.space, q)
        self.used += 1

    def clear(self) -> None:
        self.used = 0

    @property
    def valid_mask(self) -> np.ndarray:
        return np.arange(self.width) < self.used


class ValidityChecker:
    """Validity queries for one (scene, robot, space) with usage counters.

    Single-owner; counters ``validity_checks`` (states evaluated) and
    ``motion_checks`` (motions validated) accumulate across calls.
    """

    def __init__(self, scene: Scene, robot: RobotModel, space: SpaceDescriptor,
                 width: int = DEFAULT_WIDTH, backend: str | None = None):
        check_compatibility(scene, robot, space)
        if width < 1 or width & (width - 1):
            raise ConfigurationError(f"batch width must be a power of two, got {width}")
        self.scene = scene
        self.robot = robot
        self.space = space
        self.width = width
        self.kernel = _kernel(backend)
        self.backend = self.kernel.BACKEND
        self.validity_checks = 0
        self.motion_checks = 0
        self._blo, self._bhi, self._bkind = flat_bounds(space)
        arr = scene.arrays(robot.workspace_dim)
        self._circles = arr["circles"]
        self._spheres = arr["spheres"]
        self._boxes = arr["boxes"]
        self._links = np.array(robot.link_lengths, dtype=float)
        self._radius = float(robot.footprint_radius)
        self._order_cache: dict[int, np.ndarray] = {}

    def evaluate(self, lanes: np.ndarray, n: int | None = None, stop_on_invalid: bool = False):
        """Run the kernel over coordinate-major ``lanes``; returns (mask, evaluated)."""
        lanes = np.ascontiguousarray(lanes, dtype=float)
        n = lanes.shape[1] if n is None else n
        out = np.zeros(n, dtype=np.uint8)
        done = self.kernel.check_lanes(
            lanes, n, out, self.width, stop_on_invalid, self._blo, self._bhi, self._bkind,
            self.robot.code, self._radius, self._links, float(self.robot.base[0]), float(self.robot.base[1]),
            self._circles, self._spheres, self._boxes, self.scene.point_cloud, float(self.scene.point_cloud_radius))
        self.validity_checks += done
        return out[:done].astype(bool), done

    def is_valid(self, q) -> bool:
        mask, _ = self.evaluate(np.asarray(q, dtype=float).reshape(-1, 1))
        return bool(mask[0])

    def valid_many(self, states) -> np.ndarray:
        states = np.asarray(states, dtype=float).reshape(-1, self.space.dim)
        return self.evaluate(states.T)[0]

    def _bfs_params(self, depth: int) -> np.ndarray:
        """Interior parameters k / 2**depth, coarsest midpoints first."""
        if depth not in self._order_cache:
            n = 1 << depth
            ks = []
            for level in range(1, depth + 1):
                step = 1 << (depth - level)
                ks.extend(range(step, n, 2 * step))
            self._order_cache[depth] = np.array(ks, dtype=float) / n
        return self._order_cache[depth]

    def _depth(self, d: float, resolution: float) -> int:
        depth = 0
        while d / (1 << depth) > resolution:
            depth += 1
        return depth

    def check_motion(self, a, b, resolution: float) -> tuple[bool, float]:
        """Validate the motion a -> b; ``a`` is assumed valid.

        The endpoint ``b`` is checked first, then nested midpoints until
        neighbouring checked parameters are within ``resolution``. On
        failure the second value is the largest checked parameter with
        every checked parameter up to it valid.
        """
        if not resolution > 0:
            raise ContractError("motion resolution must be > 0")
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        self.motion_checks += 1
        if not self.is_valid(b):
            return False, 0.0
        d = distance(self.space, a, b)
        ts = self._bfs_params(self._depth(d, resolution))
        if len(ts) == 0:
            return True, 1.0
        states = interpolate_many(self.space, a, b, ts)
        mask, done = self.evaluate(states.T, stop_on_invalid=True)
        if mask.all() and done == len(ts):
            return True, 1.0
        checked = ts[:done]
        t_fail = checked[~mask].min()
        ok = checked[mask & (checked < t_fail)]
        return False, float(ok.max()) if len(ok) else 0.0

    def check_motions(self, pairs, resolution: float) -> np.ndarray:
        """Validate many motions with one kernel call; returns a bool per pair."""
        if not resolution > 0:
            raise ContractError("motion resolution must be > 0")
        if self.space.kind == Kind.REAL_VECTOR and len(pairs):
            return self._check_motions_linear(pairs, resolution)
        chunks = []
        owners = []
        for idx, (a, b) in enumerate(pairs):
            a = np.asarray(a, dtype=float)
            b = np.asarray(b, dtype=float)
            ts = self._bfs_params(self._depth(distance(self.space, a, b), resolution))
            chunks.append(b[None, :])
            if len(ts):
                chunks.append(interpolate_many(self.space, a, b, ts))
            owners.append(np.full(1 + len(ts), idx))
        self.motion_checks += len(owners)
        if not owners:
            return np.zeros(0, dtype=bool)
        states = np.concatenate(chunks)
        mask, _ = self.evaluate(states.T)
        bad = np.concatenate(owners)[~mask]
        out = np.ones(len(owners), dtype=bool)
        out[bad] = False
        return out


    def _check_motions_linear(self, pairs, resolution: float) -> np.ndarray:
        # same states as the per-pair path (a + t * (b - a)), built in one go
        A = np.array([p[0] for p in pairs], dtype=float)
        B = np.array([p[1] for p in pairs], dtype=float)
        diff = B - A
        sq = np.zeros(len(A))
        for i in range(A.shape[1]):
            sq = sq + diff[:, i] * diff[:, i]
        dist = np.sqrt(sq)
        owner_parts = [np.arange(len(A))]
        t_parts = []
        row_parts = []
        for idx, d in enumerate(dist.tolist()):
            ts = self._bfs_params(self._depth(d, resolution))
            if len(ts):
                t_parts.append(ts)
                row_parts.append(np.full(len(ts), idx))
        self.motion_checks += len(A)
        if t_parts:
            ts = np.concatenate(t_parts)
            rows = np.concatenate(row_parts)
            inner = A[rows] + ts[:, None] * diff[rows]
            states = np.concatenate([B, inner])
            owners = np.concatenate(owner_parts + [rows])
        else:
            states = B
            owners = owner_parts[0]
        mask, _ = self.evaluate(states.T)
        out = np.ones(len(A), dtype=bool)
        out[owners[~mask]] = False
        return out


def check_batch(scene: Scene, robot: RobotModel, batch: ConfigBatch, backend: str | None = None) -> np.ndarray:
    """Validity of the live lanes of ``batch``; padding lanes are excluded."""
    checker = ValidityChecker(scene, robot, batch.space, width=batch.width, backend=backend)
    mask, _ = checker.evaluate(batch.lanes, batch.used)
    return mask


def check_motion(scene: Scene, robot: RobotModel, space: SpaceDescriptor, a, b, resolution: float,
                 width: int = DEFAULT_WIDTH, backend: str | None = None) -> tuple[bool, float]:
    checker = ValidityChecker(scene, robot, space, width=width, backend=backend)
    return checker.check_motion(as_state(space, a), as_state(space, b), resolution)


"""Workspace obstacles, robot geometry and the point-cloud index."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError

# Conservative inflation for box pruning in tree queries; keeps points whose
# exact test sits on the radius boundary from being pruned by rounding.
_PRUNE_REL = 1e-9
_PRUNE_ABS = 1e-12


class RobotKind(str, Enum):
    POINT2D = "Point2D"
    POINT3D = "Point3D"
    DISC = "Disc"
    PLANAR_ARM = "PlanarArm"


_KIND_CODES = {RobotKind.POINT2D: 0, RobotKind.POINT3D: 1, RobotKind.DISC: 2, RobotKind.PLANAR_ARM: 3}


@dataclass(frozen=True)
class RobotModel:
    kind: RobotKind
    radius: float = 0.0
    base: tuple[float, float] = (0.0, 0.0)
    link_lengths: tuple[float, ...] = ()
    link_thickness: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", RobotKind(self.kind))
        if self.kind == RobotKind.DISC and not self.radius > 0:
            raise ConfigurationError(f"Disc radius must be > 0, got {self.radius}")
        if self.kind == RobotKind.PLANAR_ARM:
            if not self.link_lengths:
                raise ConfigurationError("PlanarArm needs at least one link")
            if min(self.link_lengths) <= 0:
                raise ConfigurationError("PlanarArm link lengths must be > 0")
            if self.link_thickness < 0:
                raise ConfigurationError("PlanarArm link thickness must be >= 0")

    @classmethod
    def point2d(cls):
        return cls(RobotKind.POINT2D)

    @classmethod
    def point3d(cls):
        return cls(RobotKind.POINT3D)

    @classmethod
    def disc(cls, radius: float):
        return cls(RobotKind.DISC, radius=float(radius))

    @classmethod
    def planar_arm(cls, link_lengths, link_thickness: float = 0.0, base=(0.0, 0.0)):
        return cls(RobotKind.PLANAR_ARM, base=(float(base[0]), float(base[1])),
                   link_lengths=tuple(float(x) for x in link_lengths), link_thickness=float(link_thickness))

    @property
    def workspace_dim(self) -> int:
        return 3 if self.kind == RobotKind.POINT3D else 2

    @property
    def code(self) -> int:
        return _KIND_CODES[self.kind]

    @property
    def footprint_radius(self) -> float:
        """Radius swept around the robot's reference point or link segments."""
        if self.kind == RobotKind.DISC:
            return self.radius
        if self.kind == RobotKind.PLANAR_ARM:
            return 0.5 * self.link_thickness
        return 0.0


class PointCloudIndex:
    """Axis-aligned splitting tree over a fixed set of points.

    Nodes are stored in flat arrays (bounding box, point range, children) so
    the compiled kernel can walk the same structure as the Python code.
    """

    def __init__(self, points, leaf_size: int = 16):
        pts = np.array(points, dtype=float)
        if pts.ndim != 2 or len(pts) == 0:
            raise ConfigurationError("point cloud must be a non-empty list of 2D or 3D points")
        if pts.shape[1] not in (2, 3):
            raise ConfigurationError(f"point cloud points must be 2D or 3D, got dimension {pts.shape[1]}")
        if not np.all(np.isfinite(pts)):
            raise ConfigurationError("point cloud contains non-finite coordinates")
        if leaf_size < 1:
            raise ConfigurationError("leaf_size must be >= 1")
        self.leaf_size = int(leaf_size)
        self.dim = pts.shape[1]
        order = np.arange(len(pts))
        lo, hi, start, end, left, right = [], [], [], [], [], []

        def build(idx: np.ndarray) -> int:
            node = len(start)
            sub = pts[idx]
            lo.append(sub.min(axis=0))
            hi.append(sub.max(axis=0))
            start.append(0)
            end.append(0)
            left.append(-1)
            right.append(-1)
            if len(idx) <= self.leaf_size:
                start[node] = len(leaf_order)
                leaf_order.extend(idx.tolist())
                end[node] = len(leaf_order)
                return node
            axis = int(np.argmax(hi[node] - lo[node]))
            srt = idx[np.argsort(sub[:, axis], kind="stable")]
            mid = len(srt) // 2
            left[node] = build(srt[:mid])
            right[node] = build(srt[mid:])
            return node

        leaf_order: list[int] = []
        build(order)
        self.points = np.ascontiguousarray(pts[np.array(leaf_order)])
        self.node_lo = np.ascontiguousarray(np.array(lo))
        self.node_hi = np.ascontiguousarray(np.array(hi))
        self.node_start = np.array(start, dtype=np.int32)
        self.node_end = np.array(end, dtype=np.int32)
        self.node_left = np.array(left, dtype=np.int32)
        self.node_right = np.array(right, dtype=np.int32)

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_file(cls, path, leaf_size: int = 16) -> "PointCloudIndex":
        return cls(load_point_cloud(path), leaf_size=leaf_size)

    def query_sphere(self, center, radius: float, width: int = 8) -> bool:
        """True iff some point lies within ``radius`` of ``center``.

        Leaf points are tested ``width`` at a time.
        """
        if radius < 0:
            raise ConfigurationError("query radius must be >= 0")
        c = [float(x) for x in center]
        if len(c) != self.dim:
            raise ConfigurationError(f"query center has dimension {len(c)}, cloud has {self.dim}")
        rr = radius * radius
        prune = rr * (1.0 + _PRUNE_REL) + _PRUNE_ABS
        stack = [0]
        while stack:
            n = stack.pop()
            d2 = 0.0
            for k in range(self.dim):
                v = min(max(c[k], self.node_lo[n, k]), self.node_hi[n, k]) - c[k]
                d2 += v * v
            if d2 > prune:
                continue
            if self.node_left[n] < 0:
                for s in range(self.node_start[n], self.node_end[n], width):
                    e = min(s + width, self.node_end[n])
                    blk = self.points[s:e]
                    acc = (blk[:, 0] - c[0]) * (blk[:, 0] - c[0]) + (blk[:, 1] - c[1]) * (blk[:, 1] - c[1])
                    if self.dim == 3:
                        acc = acc + (blk[:, 2] - c[2]) * (blk[:, 2] - c[2])
                    if np.any(acc <= rr):
                        return True
                continue
            stack.append(self.node_right[n])
            stack.append(self.node_left[n])
        return False

    def query_capsule(self, p0, p1, radius: float) -> bool:
        """True iff some point lies within ``radius`` of the segment p0-p1 (2D)."""
        from .geometry import point_segment_d2, segment_box_d2

        rr = radius * radius
        prune = rr * (1.0 + _PRUNE_REL) + _PRUNE_ABS
        x0, y0 = float(p0[0]), float(p0[1])
        x1, y1 = float(p1[0]), float(p1[1])
        stack = [0]
        while stack:
            n = stack.pop()
            lo, hi = self.node_lo[n], self.node_hi[n]
            if segment_box_d2(x0, y0, x1, y1, lo[0], lo[1], hi[0], hi[1]) > prune:
                continue
            if self.node_left[n] < 0:
                for i in range(self.node_start[n], self.node_end[n]):
                    if point_segment_d2(self.points[i, 0], self.points[i, 1], x0, y0, x1, y1) <= rr:
                        return True
                continue
            stack.append(self.node_right[n])
            stack.append(self.node_left[n])
        return False


def load_point_cloud(path) -> np.ndarray:
    """Read whitespace-separated points, one per line; ``#`` starts a comment.

    Dimensionality comes from the first data line; every later line must match.
    """
    path = Path(path)
    rows: list[list[float]] = []
    dim = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                vals = [float(tok) for tok in text.split()]
            except ValueError as exc:
                raise ConfigurationError(f"{path}:{lineno}: bad coordinate ({exc})") from None
            if dim is None:
                dim = len(vals)
                if dim not in (2, 3):
                    raise ConfigurationError(f"{path}:{lineno}: points must have 2 or 3 coordinates")
            elif len(vals) != dim:
                raise ConfigurationError(f"{path}:{lineno}: expected {dim} coordinates, got {len(vals)}")
            rows.append(vals)
    if not rows:
        raise ConfigurationError(f"{path}: no points")
    return np.array(rows)


def build_point_cloud_index(points, leaf_size: int = 16) -> PointCloudIndex:
    return PointCloudIndex(points, leaf_size)


def query_point_cloud(index: PointCloudIndex, center, radius: float) -> bool:
    return index.query_sphere(center, radius)


@dataclass(frozen=True)
class Scene:
    """Immutable set of obstacles. Boxes are (min corner, max corner)."""

    circles2d: tuple = ()
    spheres3d: tuple = ()
    boxes: tuple = ()
    point_cloud: PointCloudIndex | None = None
    point_cloud_radius: float = 0.0
    _arrays: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        circles = tuple((float(c[0][0]), float(c[0][1]), float(c[1])) if len(c) == 2 else tuple(map(float, c))
                        for c in self.circles2d)
        spheres = tuple((*map(float, s[0]), float(s[1])) if len(s) == 2 else tuple(map(float, s))
                        for s in self.spheres3d)
        boxes = tuple((tuple(map(float, b[0])), tuple(map(float, b[1]))) for b in self.boxes)
        for c in circles:
            if len(c) != 3 or not c[2] > 0:
                raise ConfigurationError(f"circle needs center (x, y) and radius > 0, got {c}")
        for s in spheres:
            if len(s) != 4 or not s[3] > 0:
                raise ConfigurationError(f"sphere needs center (x, y, z) and radius > 0, got {s}")
        for lo, hi in boxes:
            if len(lo) != len(hi) or len(lo) not in (2, 3):
                raise ConfigurationError(f"box corners must both be 2D or 3D, got {lo}, {hi}")
            if not all(a < b for a, b in zip(lo, hi)):
                raise ConfigurationError(f"box needs min < max on every axis, got {lo}, {hi}")
        if self.point_cloud_radius < 0:
            raise ConfigurationError("point cloud collision radius must be >= 0")
        object.__setattr__(self, "circles2d", circles)
        object.__setattr__(self, "spheres3d", spheres)
        object.__setattr__(self, "boxes", boxes)

    def dims(self) -> set[int]:
        out = set()
        if self.circles2d:
            out.add(2)
        if self.spheres3d:
            out.add(3)
        out.update(len(lo) for lo, _ in self.boxes)
        if self.point_cloud is not None:
            out.add(self.point_cloud.dim)
        return out

    def arrays(self, dim: int) -> dict:
        """Contiguous obstacle arrays for the batched kernels."""
        if dim not in self._arrays:
            boxes = [list(lo) + list(hi) for lo, hi in self.boxes if len(lo) == dim]
            self._arrays[dim] = {
                "circles": np.ascontiguousarray(np.array(self.circles2d, dtype=float).reshape(-1, 3)),
                "spheres": np.ascontiguousarray(np.array(self.spheres3d, dtype=float).reshape(-1, 4)),
                "boxes": np.ascontiguousarray(np.array(boxes, dtype=float).reshape(-1, 2 * dim)),
            }
        return self._arrays[dim]

    @property
    def is_empty(self) -> bool:
        return not (self.circles2d or self.spheres3d or self.boxes or self.point_cloud is not None)


def arm_reach(robot: RobotModel) -> float:
    return math.fsum(robot.link_lengths)

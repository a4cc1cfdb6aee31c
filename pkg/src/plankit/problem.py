"""Planning problems, goals and solution paths.

A :class:`ProblemDefinition` ties a space (plain or constrained), a scene
and robot, a start state and a goal together. Paths are arrays of states
with arc-length cost measured by the space metric.
"""

from __future__ import annotations

import heapq
import io
import os
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .constrained import ConstrainedSpace, GeodesicFailed, constrained_interpolate
from .errors import ConfigurationError, ContractError, PreconditionError
from .rng import RngStream
from .spaces import SpaceDescriptor, as_state, distance, interpolate, satisfies_bounds
from .validity import RobotModel, Scene, ValidityChecker

PATH_FORMAT = "plankit-path 1"


# -- goals ----------------------------------------------------------------

@dataclass(frozen=True)
class ExactState:
    """Reach ``state`` to within ``threshold`` (None: 1e-6 x space diameter)."""

    state: tuple[float, ...]
    threshold: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "state", tuple(float(x) for x in self.state))
        if self.threshold is not None and not self.threshold >= 0:
            raise ConfigurationError(f"goal threshold must be >= 0, got {self.threshold}")

    @property
    def has_sampler(self) -> bool:
        return True

    def sample(self, rng: RngStream) -> np.ndarray:
        return np.array(self.state)


@dataclass(frozen=True)
class Region:
    """Goal set given by a membership predicate.

    ``sampler(rng)`` draws goal states (needed by bidirectional and roadmap
    planners); ``distance(q)`` is an optional distance-to-goal used to pick
    approximate solutions.
    """

    contains: Callable[[np.ndarray], bool]
    sampler: Callable[[RngStream], np.ndarray] | None = None
    distance: Callable[[np.ndarray], float] | None = None
    description: str = "region"

    @property
    def has_sampler(self) -> bool:
        return self.sampler is not None

    def sample(self, rng: RngStream) -> np.ndarray:
        if self.sampler is None:
            raise PreconditionError("goal region has no sampler")
        return np.asarray(self.sampler(rng), dtype=float)


Goal = ExactState | Region


def _metric_space(space) -> SpaceDescriptor:
    return space.ambient if isinstance(space, ConstrainedSpace) else space


def goal_satisfied(goal: Goal, space, q) -> bool:
    q = np.asarray(q, dtype=float)
    if isinstance(goal, ExactState):
        thr = 0.0 if goal.threshold is None else goal.threshold
        return distance(_metric_space(space), q, np.array(goal.state)) <= thr
    return bool(goal.contains(q))


def goal_distance(goal: Goal, space, q) -> float | None:
    """Distance from ``q`` to the goal, or None when the goal cannot say."""
    if isinstance(goal, ExactState):
        return distance(_metric_space(space), np.asarray(q, dtype=float), np.array(goal.state))
    if goal.distance is not None:
        return float(goal.distance(np.asarray(q, dtype=float)))
    return None


# -- problem --------------------------------------------------------------

@dataclass(frozen=True)
class ProblemDefinition:
    space: SpaceDescriptor | ConstrainedSpace
    scene: Scene
    robot: RobotModel
    start: tuple[float, ...]
    goal: Goal
    motion_resolution: float | None = None
    backend: str | None = field(default=None, compare=False)

    def __post_init__(self):
        amb = self.ambient
        object.__setattr__(self, "start", tuple(float(x) for x in as_state(amb, self.start)))
        if self.motion_resolution is None:
            object.__setattr__(self, "motion_resolution", 0.01 * amb.diameter())
        if not self.motion_resolution > 0:
            raise ConfigurationError("motion_resolution must be > 0")
        if isinstance(self.goal, ExactState):
            as_state(amb, self.goal.state)
            if self.goal.threshold is None:
                object.__setattr__(self, "goal", replace(self.goal, threshold=1e-6 * amb.diameter()))

    @property
    def ambient(self) -> SpaceDescriptor:
        return _metric_space(self.space)

    @property
    def constrained(self) -> ConstrainedSpace | None:
        return self.space if isinstance(self.space, ConstrainedSpace) else None

    @property
    def dim(self) -> int:
        return self.ambient.dim

    def start_state(self) -> np.ndarray:
        return np.array(self.start)

    def make_checker(self, backend: str | None = None) -> ValidityChecker:
        return ValidityChecker(self.scene, self.robot, self.ambient, backend=backend or self.backend)

    def check_start(self, checker: ValidityChecker) -> None:
        """Raise PreconditionError unless the start state is admissible."""
        s = self.start_state()
        if not satisfies_bounds(self.ambient, s):
            raise PreconditionError(f"start {list(self.start)} is outside the space bounds")
        cs = self.constrained
        if cs is not None and cs.constraint.residual_norm(s) > cs.constraint.tol:
            raise PreconditionError("start is not on the constraint manifold")
        if not checker.is_valid(s):
            raise PreconditionError(f"start {list(self.start)} is in collision")


# -- paths ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Path:
    """Ordered states of a solution; ``states`` has shape (m, dim)."""

    states: np.ndarray
    space: SpaceDescriptor | ConstrainedSpace

    def __post_init__(self):
        st = np.array(self.states, dtype=float)
        if st.ndim == 1:
            st = st.reshape(1, -1)
        if st.ndim != 2 or len(st) < 1:
            raise ContractError("a path needs at least one state")
        if st.shape[1] != self.space.dim:
            raise ContractError(f"path states have dimension {st.shape[1]}, space has {self.space.dim}")
        st.flags.writeable = False
        object.__setattr__(self, "states", st)

    def __len__(self) -> int:
        return len(self.states)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Path) and self.states.shape == other.states.shape
                and bool(np.array_equal(self.states, other.states)))

    def __hash__(self):
        return hash(self.states.tobytes())


def _as_path(space, path) -> Path:
    return path if isinstance(path, Path) else Path(np.asarray(path, dtype=float), space)


def segment_lengths(space, path) -> np.ndarray:
    path = _as_path(space, path)
    m = _metric_space(space)
    st = path.states
    return np.array([distance(m, st[i], st[i + 1]) for i in range(len(st) - 1)])


def path_cost(space, path) -> float:
    """Sum of metric distances between consecutive states."""
    total = 0.0
    for d in segment_lengths(space, path):
        total += d
    return total


def validate_path(problem: ProblemDefinition, path, checker: ValidityChecker | None = None) -> bool:
    """Every state valid (and on the manifold, if constrained) and every
    segment passing the motion check at the problem's resolution."""
    path = _as_path(problem.space, path)
    checker = checker or problem.make_checker()
    st = path.states
    cs = problem.constrained
    if cs is not None and any(cs.constraint.residual_norm(q) > cs.constraint.tol for q in st):
        return False
    if not all(satisfies_bounds(problem.ambient, q) for q in st):
        return False
    if not checker.valid_many(st).all():
        return False
    res = problem.motion_resolution
    return all(checker.check_motion(st[i], st[i + 1], res)[0] for i in range(len(st) - 1))


def _locate(cum: np.ndarray, u: float) -> tuple[int, float]:
    """Segment index and fraction for arc-length parameter ``u``."""
    i = int(np.searchsorted(cum, u, side="right")) - 1
    i = min(max(i, 0), len(cum) - 2)
    seg = cum[i + 1] - cum[i]
    f = 0.0 if seg <= 0 else (u - cum[i]) / seg
    return i, min(max(f, 0.0), 1.0)


def shortcut(problem: ProblemDefinition, path, rng: RngStream, max_attempts: int = 100,
             checker: ValidityChecker | None = None) -> Path:
    """Random shortcutting: splice in direct motions that shorten the path.

    Each attempt picks two points: with probability 1/2 each (always on
    constrained spaces) a waypoint chosen uniformly by index, otherwise a
    uniform arc-length parameter. The stretch between them is replaced by a
    direct motion when every new piece passes the motion check and the cost
    drops.
    """
    path = _as_path(problem.space, path)
    if max_attempts < 0:
        raise ContractError("max_attempts must be >= 0")
    checker = checker or problem.make_checker()
    if not validate_path(problem, path, checker):
        raise PreconditionError("shortcut needs a valid input path")
    space = problem.ambient
    cs = problem.constrained
    res = problem.motion_resolution
    states = [np.array(q) for q in path.states]
    cost = path_cost(space, path)

    for _ in range(max_attempts):
        if len(states) < 3 and not (len(states) == 2 and cs is None):
            break
        seg = segment_lengths(space, np.array(states))
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        total = cum[-1]
        if total <= 0:
            break
        ends = []
        for _ in range(2):
            if cs is not None or rng.random() < 0.5:
                # uniform over waypoints, so ones next to tiny segments still get picked
                ends.append((rng.integers(len(states)), None, 0.0))
                continue
            i, f = _locate(cum, rng.uniform(0.0, total))
            if f == 0.0:
                ends.append((i, None, 0.0))
            elif f == 1.0:
                ends.append((i + 1, None, 0.0))
            else:
                try:
                    ends.append((i, interpolate(space, states[i], states[i + 1], f), f))
                except ContractError:
                    ends.append(None)
        if None in ends:
            continue
        (i1, p1, _), (i2, p2, _) = sorted(ends, key=lambda e: (e[0], e[2]))
        # both ends on one original segment: a straight splice cannot help
        if (i2 if p2 is not None else i2 - 1) <= i1:
            continue
        # i1/i2: waypoint index when p is None, else index of the segment start
        head = states[: i1 + 1] if p1 is not None else states[:i1]
        a = p1 if p1 is not None else states[i1]
        b = p2 if p2 is not None else states[i2]
        tail = states[i2 + 1:]
        if cs is not None:
            try:
                middle = constrained_interpolate(cs, a, b)
            except (GeodesicFailed, ContractError):
                continue
        else:
            middle = [a, b]
        cand = head + middle + tail
        cand_cost = path_cost(space, np.array(cand))
        if not cand_cost < cost:
            continue
        new_pieces = []
        if p1 is not None:
            new_pieces.append((states[i1], p1))
        new_pieces.extend(zip(middle[:-1], middle[1:]))
        if p2 is not None:
            new_pieces.append((p2, states[i2 + 1]))
        fresh = [q for q in (p1, p2) if q is not None] + list(middle[1:-1])
        if fresh and not checker.valid_many(np.array(fresh)).all():
            continue
        try:
            ok = all(checker.check_motion(x, y, res)[0] for x, y in new_pieces)
        except ContractError:
            ok = False
        if ok:
            states = cand
            cost = cand_cost
    return Path(np.array(states), problem.space)


def interpolate_path(space, path, n: int) -> Path:
    """Densify to exactly ``n`` states, keeping every original waypoint.

    Extra states are handed one at a time to the segment whose pieces are
    currently longest, then each segment is subdivided evenly.
    """
    path = _as_path(space, path)
    m = len(path)
    if n < m:
        raise ContractError(f"cannot interpolate {m} states down to {n}")
    if m == 1:
        if n != 1:
            raise ContractError("a single-state path cannot be densified")
        return path
    metric = _metric_space(space)
    seg = segment_lengths(space, path)
    pieces = [1] * (m - 1)
    heap = [(-float(seg[i]), i) for i in range(m - 1)]
    heapq.heapify(heap)
    for _ in range(n - m):
        _, i = heapq.heappop(heap)
        pieces[i] += 1
        heapq.heappush(heap, (-float(seg[i]) / pieces[i], i))
    st = path.states
    out = [st[0]]
    for i in range(m - 1):
        k = pieces[i]
        if k > 1:
            ts = np.arange(1, k, dtype=float) / k
            for t in ts:
                out.append(interpolate(metric, st[i], st[i + 1], float(t)))
        out.append(st[i + 1])
    return Path(np.array(out), path.space)


# -- path files -----------------------------------------------------------

def format_path(path: Path) -> str:
    buf = io.StringIO()
    buf.write(f"# {PATH_FORMAT} {path.space.signature}\n")
    for q in path.states:
        buf.write(" ".join(repr(float(x)) for x in q))
        buf.write("\n")
    return buf.getvalue()


def write_path(path: Path, destination) -> None:
    text = format_path(path)
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        destination.write(text)


def read_path(source, space=None) -> tuple[str, np.ndarray]:
    """Parse a path file; returns ``(signature, states)``.

    When ``space`` is given its signature must match the file header.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    else:
        lines = source.read().splitlines()
    prefix = f"# {PATH_FORMAT} "
    if not lines or not lines[0].startswith(prefix):
        raise ContractError("missing path file header")
    sig = lines[0][len(prefix):]
    if space is not None and sig != space.signature:
        raise ContractError(f"path file is for {sig}, expected {space.signature}")
    rows = []
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rows.append([float(x) for x in line.split()])
        except ValueError as exc:
            raise ContractError(f"line {no}: {exc}") from exc
        if len(rows[-1]) != len(rows[0]):
            raise ContractError(f"line {no}: expected {len(rows[0])} coordinates, got {len(rows[-1])}")
    if not rows:
        raise ContractError("path file has no states")
    return sig, np.array(rows)

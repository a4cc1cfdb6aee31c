"""Shared planner machinery: specs, termination, results and the problem
context every planner works through."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

import numpy as np

from ..constrained import ConstrainedSpace, GeodesicFailed, ProjectionError, SamplingExhausted, constrained_interpolate, constrained_sample
from ..errors import ConfigurationError, ContractError, PreconditionError
from ..nn import MetricIndex
from ..problem import ExactState, Path, ProblemDefinition, goal_distance, goal_satisfied, path_cost
from ..rng import RngStream
from ..spaces import distance_trusted, interpolate, sample_uniform, satisfies_bounds
from ..validity import ValidityChecker


# -- planner specs --------------------------------------------------------

def _unit_interval(v):
    return 0.0 <= v <= 1.0


def _positive(v):
    return v > 0


def _flag(v):
    return v in (0, 1)


def _count(v):
    return v >= 1 and float(v).is_integer()


def _seed(v):
    return 0 <= v < 2 ** 64 and float(v).is_integer()


# key -> (default, check, description). None defaults are resolved per
# problem: max_edge_length = 10% of the space diameter, rewire_gamma =
# 1.5 x the space diameter.
_PARAMS = {
    "goal_bias": (0.05, _unit_interval, "in [0, 1]"),
    "max_edge_length": (None, _positive, "> 0"),
    "rewire_gamma": (None, _positive, "> 0"),
    "prm_k": (10, _count, "an integer >= 1"),
    "prm_k_star": (1.0, _positive, "> 0"),
    "return_approximate": (0, _flag, "0 or 1"),
    "seed": (None, _seed, "an unsigned 64-bit integer"),
}

PLANNER_PARAMS = {
    "rrt": ("goal_bias", "max_edge_length", "return_approximate", "seed"),
    "rrt_connect": ("max_edge_length", "return_approximate", "seed"),
    "rrt_star": ("goal_bias", "max_edge_length", "rewire_gamma", "return_approximate", "seed"),
    "prm": ("prm_k", "seed"),
    "prm_star": ("prm_k_star", "seed"),
    "lazy_prm": ("prm_k", "seed"),
}

PLANNER_NAMES = tuple(PLANNER_PARAMS)


@dataclass(frozen=True)
class PlannerSpec:
    """Planner name plus parameter overrides, validated on construction."""

    name: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in PLANNER_PARAMS:
            raise ConfigurationError(
                f"unknown planner {self.name!r}; valid names: {', '.join(PLANNER_NAMES)}")
        allowed = PLANNER_PARAMS[self.name]
        clean = {}
        for key, value in dict(self.params).items():
            if key not in allowed:
                raise ConfigurationError(
                    f"unknown parameter {key!r} for planner {self.name}; valid keys: {', '.join(allowed)}")
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigurationError(f"parameter {key} must be a finite number, got {value!r}")
            _, check, desc = _PARAMS[key]
            if not check(value):
                raise ConfigurationError(f"parameter {key} must be {desc}, got {value!r}")
            clean[key] = int(value) if key in ("prm_k", "return_approximate", "seed") else float(value)
        object.__setattr__(self, "params", dict(sorted(clean.items())))

    def effective_params(self) -> dict[str, Any]:
        """Every parameter of this planner, defaults filled in."""
        out = {k: _PARAMS[k][0] for k in PLANNER_PARAMS[self.name]}
        out.update(self.params)
        return out

    def __hash__(self):
        return hash((self.name, tuple(self.params.items())))


# -- termination ----------------------------------------------------------

class TerminationCondition:
    """Composable stopping rule.

    Build with the class methods and combine with :meth:`any_of`. A run
    asks a fresh :meth:`monitor` once per iteration; the monitor latches, so
    once it reports true it stays true.
    """

    __slots__ = ("kind", "value", "children")

    def __init__(self, kind: str, value=None, children=()):
        self.kind = kind
        self.value = value
        self.children = tuple(children)

    @classmethod
    def max_time(cls, seconds: float) -> "TerminationCondition":
        if not seconds >= 0:
            raise ConfigurationError("time limit must be >= 0")
        return cls("max_time", float(seconds))

    @classmethod
    def max_iterations(cls, count: int) -> "TerminationCondition":
        if count < 0 or not float(count).is_integer():
            raise ConfigurationError("iteration limit must be an integer >= 0")
        return cls("max_iterations", int(count))

    @classmethod
    def solved_exactly(cls) -> "TerminationCondition":
        return cls("solved_exactly")

    @classmethod
    def cost_below(cls, threshold: float) -> "TerminationCondition":
        return cls("cost_below", float(threshold))

    @classmethod
    def any_of(cls, *conds: "TerminationCondition") -> "TerminationCondition":
        if not conds:
            raise ConfigurationError("any_of needs at least one condition")
        return cls("any_of", None, conds)

    @property
    def deterministic(self) -> bool:
        if self.kind == "any_of":
            return all(c.deterministic for c in self.children)
        return self.kind != "max_time"

    def _leaves(self):
        if self.kind == "any_of":
            for c in self.children:
                yield from c._leaves()
        else:
            yield self

    def monitor(self) -> "TerminationMonitor":
        return TerminationMonitor(self)

    def to_dict(self) -> dict:
        if self.kind == "any_of":
            return {"any_of": [c.to_dict() for c in self.children]}
        return {self.kind: self.value if self.value is not None else True}

    def __eq__(self, other):
        return (isinstance(other, TerminationCondition) and self.kind == other.kind
                and self.value == other.value and self.children == other.children)

    def __hash__(self):
        return hash((self.kind, self.value, self.children))

    def __repr__(self):
        if self.kind == "any_of":
            return "AnyOf(" + ", ".join(map(repr, self.children)) + ")"
        return f"{self.kind}({'' if self.value is None else self.value})"


class TerminationMonitor:
    __slots__ = ("max_iters", "deadline", "stop_on_solution", "cost_limit", "fired")

    def __init__(self, cond: TerminationCondition):
        self.max_iters = None
        self.deadline = None
        self.stop_on_solution = False
        self.cost_limit = None
        now = time.monotonic()
        for leaf in cond._leaves():
            if leaf.kind == "max_iterations":
                self.max_iters = leaf.value if self.max_iters is None else min(self.max_iters, leaf.value)
            elif leaf.kind == "max_time":
                d = now + leaf.value
                self.deadline = d if self.deadline is None else min(self.deadline, d)
            elif leaf.kind == "solved_exactly":
                self.stop_on_solution = True
            elif leaf.kind == "cost_below":
                v = leaf.value
                self.cost_limit = v if self.cost_limit is None else max(self.cost_limit, v)
        self.fired = False

    def __call__(self, iterations: int, solved: bool = False, best_cost: float | None = None) -> bool:
        if self.fired:
            return True
        if ((self.max_iters is not None and iterations >= self.max_iters)
                or (self.stop_on_solution and solved)
                or (self.cost_limit is not None and best_cost is not None and best_cost < self.cost_limit)
                or (self.deadline is not None and time.monotonic() >= self.deadline)):
            self.fired = True
        return self.fired


# -- results --------------------------------------------------------------

class Status(str, Enum):
    SOLVED = "Solved"
    APPROXIMATE = "ApproximateSolution"
    FAILED = "Failed"
    TIMEOUT = "Timeout"


@dataclass
class PlannerStats:
    iterations: int = 0
    states_created: int = 0
    validity_checks: int = 0
    motion_checks: int = 0
    wall_time_seconds: float = 0.0
    final_cost: float | None = None
    cost_trace: list[tuple[int, float]] = field(default_factory=list)

    def deterministic_view(self) -> tuple:
        return (self.iterations, self.states_created, self.validity_checks, self.motion_checks,
                self.final_cost, tuple(self.cost_trace))


@dataclass
class PlannerResult:
    status: Status
    path: Path | None
    stats: PlannerStats
    planner: str = ""
    params: dict = field(default_factory=dict)
    roadmap: "RoadmapGraph | None" = field(default=None, repr=False, compare=False)

    @property
    def solved(self) -> bool:
        return self.status == Status.SOLVED

    def same_outcome(self, other: "PlannerResult") -> bool:
        """Equality of everything except wall time (bitwise on paths)."""
        if self.status != other.status or self.stats.deterministic_view() != other.stats.deterministic_view():
            return False
        if (self.path is None) != (other.path is None):
            return False
        return self.path is None or self.path.states.tobytes() == other.path.states.tobytes()


# -- roadmap --------------------------------------------------------------

class RoadmapGraph:
    """Undirected roadmap with per-edge ``checked`` flags and a union-find
    over edge connectivity."""

    def __init__(self):
        self.vertices: list[np.ndarray] = []
        self.edges: list[list] = []  # [u, v, length, checked, alive]
        self.adj: list[list[int]] = []
        self._uf: list[int] = []

    def __len__(self) -> int:
        return len(self.vertices)

    def add_vertex(self, q) -> int:
        self.vertices.append(q)
        self.adj.append([])
        self._uf.append(len(self._uf))
        return len(self.vertices) - 1

    def add_edge(self, u: int, v: int, length: float, checked: bool) -> int:
        self.edges.append([u, v, length, checked, True])
        e = len(self.edges) - 1
        self.adj[u].append(e)
        self.adj[v].append(e)
        self._union(u, v)
        return e

    def remove_edge(self, e: int) -> None:
        self.edges[e][4] = False

    def find(self, u: int) -> int:
        uf = self._uf
        while uf[u] != u:
            uf[u] = uf[uf[u]]
            u = uf[u]
        return u

    def _union(self, u: int, v: int) -> None:
        a, b = self.find(u), self.find(v)
        if a != b:
            if a < b:
                a, b = b, a
            self._uf[a] = b

    def connected(self, u: int, v: int) -> bool:
        """Connectivity over every edge ever added (removed edges included,
        so this over-approximates once lazy edges get invalidated)."""
        return self.find(u) == self.find(v)

    def component_labels(self) -> list[int]:
        return [self.find(u) for u in range(len(self.vertices))]

    def live_edges(self):
        return [(u, v, length, checked) for u, v, length, checked, alive in self.edges if alive]

    def shortest_path(self, src: int, dst: int) -> tuple[list[int], list[int]] | None:
        """Uniform-cost search by edge length over live edges; ties go to the
        earlier-inserted vertex. Returns (vertex ids, edge ids) or None."""
        import heapq

        dist = {src: 0.0}
        via: dict[int, tuple[int, int]] = {}
        done = set()
        heap = [(0.0, src)]
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            if u == dst:
                break
            for e in self.adj[u]:
                a, b, length, _, alive = self.edges[e]
                if not alive:
                    continue
                w = b if a == u else a
                nd = d + length
                if w not in done and nd < dist.get(w, math.inf):
                    dist[w] = nd
                    via[w] = (u, e)
                    heapq.heappush(heap, (nd, w))
        if dst not in done:
            return None
        verts, eids = [dst], []
        while verts[-1] != src:
            u, e = via[verts[-1]]
            verts.append(u)
            eids.append(e)
        return verts[::-1], eids[::-1]


# -- problem context ------------------------------------------------------

class PlanningContext:
    """The operations planners are allowed to use: sampling, metric,
    steering and motion validation, with constrained spaces handled
    transparently (edges become lists of projected waypoints)."""

    def __init__(self, problem: ProblemDefinition, rng: RngStream, checker: ValidityChecker | None = None):
        self.problem = problem
        self.space = problem.ambient
        self.cs: ConstrainedSpace | None = problem.constrained
        self.checker = checker or problem.make_checker()
        self.resolution = problem.motion_resolution
        self.goal = problem.goal
        self.diameter = self.space.diameter()
        self.rng = rng
        self.sample_rng = rng.split("sample")
        self.goal_rng = rng.split("goal")
        self.bias_rng = rng.split("bias")
        self.t0 = time.perf_counter()

    @property
    def dim(self) -> int:
        return self.cs.manifold_dim if self.cs is not None else self.space.dim

    def new_index(self, reverse: bool = False) -> MetricIndex:
        # the vectorized scan beats the pure-Python tree at planner sizes
        return MetricIndex(self.space, "LinearScan", reverse=reverse)

    def dist(self, a, b) -> float:
        return distance_trusted(self.space, a, b)

    def sample(self) -> np.ndarray | None:
        if self.cs is None:
            return sample_uniform(self.space, self.sample_rng)
        try:
            return constrained_sample(self.cs, self.sample_rng)
        except SamplingExhausted:
            return None

    def sample_valid(self) -> np.ndarray | None:
        q = self.sample()
        if q is None or not self.checker.is_valid(q):
            return None
        return q

    def goal_satisfied(self, q) -> bool:
        return goal_satisfied(self.goal, self.space, q)

    def goal_distance(self, q) -> float | None:
        return goal_distance(self.goal, self.space, q)

    def sample_goal(self) -> np.ndarray | None:
        if not self.goal.has_sampler:
            return None
        q = np.asarray(self.goal.sample(self.goal_rng), dtype=float)
        if self.cs is not None and not isinstance(self.goal, ExactState):
            try:
                q = self.cs.project(q)
            except ProjectionError:
                return None
        return q

    def goal_roots(self, attempts: int = 100) -> list[np.ndarray]:
        """Valid goal states to root a goal tree or roadmap at."""
        if not self.goal.has_sampler:
            raise PreconditionError("this planner needs a goal that can be sampled")
        tries = 1 if isinstance(self.goal, ExactState) else attempts
        for _ in range(tries):
            q = self.sample_goal()
            if (q is not None and satisfies_bounds(self.space, q) and self.goal_satisfied(q)
                    and self.checker.is_valid(q)):
                if self.cs is None or self.cs.constraint.residual_norm(q) <= self.cs.constraint.tol:
                    return [q]
        if isinstance(self.goal, ExactState):
            raise PreconditionError(f"goal state {list(self.goal.state)} is invalid")
        raise PreconditionError(f"no valid goal sample in {attempts} attempts")

    def steer(self, near, target, max_len: float) -> np.ndarray | None:
        """State at most ``max_len`` along the motion ``near -> target``."""
        try:
            d = self.dist(near, target)
            if d <= max_len:
                q = np.array(target, dtype=float)
            else:
                q = interpolate(self.space, near, target, max_len / d)
        except ContractError:
            return None
        return self._settle(q)

    def steer_back(self, target, near, max_len: float) -> np.ndarray | None:
        """State on ``target -> near`` at most ``max_len`` before ``near``
        (for trees grown backwards from the goal)."""
        try:
            d = self.dist(target, near)
            if d <= max_len:
                q = np.array(target, dtype=float)
            else:
                q = interpolate(self.space, target, near, 1.0 - max_len / d)
        except ContractError:
            return None
        return self._settle(q)

    def _settle(self, q):
        if self.cs is None:
            return q
        try:
            return self.cs.project(q)
        except ProjectionError:
            return None

    def edge(self, a, b) -> list[np.ndarray]:
        """Waypoints of the motion a -> b (two states unless constrained)."""
        if self.cs is None:
            return [a, b]
        return constrained_interpolate(self.cs, a, b)

    def motion(self, a, b, check_start: bool = False) -> list[np.ndarray] | None:
        """Validated waypoints of a -> b, or None when the motion is invalid."""
        if check_start and not self.checker.is_valid(a):
            return None
        try:
            way = self.edge(a, b)
        except (GeodesicFailed, ContractError):
            return None
        return way if self.check_waypoints(way) else None

    def check_waypoints(self, way) -> bool:
        """Motion-check consecutive waypoints (the first one is assumed valid)."""
        res = self.resolution
        try:
            return all(self.checker.check_motion(x, y, res)[0] for x, y in zip(way[:-1], way[1:]))
        except ContractError:
            return False

    def motions(self, pairs) -> list[list[np.ndarray] | None]:
        """Batched :meth:`motion`; unconstrained pairs share one kernel call."""
        if not pairs:
            return []
        if self.cs is not None:
            return [self.motion(a, b) for a, b in pairs]
        try:
            ok = self.checker.check_motions(pairs, self.resolution)
        except ContractError:
            return [self.motion(a, b) for a, b in pairs]
        return [[a, b] if good else None for (a, b), good in zip(pairs, ok)]

    def waypoint_cost(self, way) -> float:
        total = 0.0
        for x, y in zip(way[:-1], way[1:]):
            total += self.dist(x, y)
        return total

    def finish(self, status: Status, states, iterations: int, created: int, trace, planner: str,
               params: dict, roadmap=None) -> PlannerResult:
        path = None
        cost = None
        if states is not None:
            path = Path(np.array(states), self.problem.space)
            cost = float(path_cost(self.problem.space, path))
        stats = PlannerStats(
            iterations=iterations, states_created=created,
            validity_checks=self.checker.validity_checks, motion_checks=self.checker.motion_checks,
            wall_time_seconds=time.perf_counter() - self.t0, final_cost=cost,
            cost_trace=[(int(i), float(c)) for i, c in trace])
        return PlannerResult(status, path, stats, planner, params, roadmap)


def join_waypoints(segments) -> list[np.ndarray]:
    """Concatenate edge waypoint lists that share endpoints."""
    out: list[np.ndarray] = []
    for way in segments:
        out.extend(way if not out else way[1:])
    return out


# -- planner base and registry -------------------------------------------

class Planner:
    name = ""

    def __init__(self, spec: PlannerSpec):
        self.spec = spec
        self.params = spec.effective_params()

    def resolved_params(self, problem: ProblemDefinition) -> dict[str, Any]:
        p = dict(self.params)
        diam = problem.ambient.diameter()
        if "max_edge_length" in p and p["max_edge_length"] is None:
            p["max_edge_length"] = 0.1 * diam
        if "rewire_gamma" in p and p["rewire_gamma"] is None:
            p["rewire_gamma"] = 1.5 * diam
        return p

    def solve(self, problem: ProblemDefinition, tc: TerminationCondition,
              rng: RngStream | None = None, checker: ValidityChecker | None = None) -> PlannerResult:
        if rng is None:
            seed = self.params.get("seed")
            if seed is None:
                raise ConfigurationError("no random stream given and no seed parameter set")
            rng = RngStream(int(seed))
        params = self.resolved_params(problem)
        ctx = PlanningContext(problem, rng, checker)
        problem.check_start(ctx.checker)
        monitor = tc.monitor()
        if monitor(0):
            return ctx.finish(Status.TIMEOUT, None, 0, 0, [], self.name, params)
        return self._solve(ctx, params, monitor)

    def _solve(self, ctx: PlanningContext, params: dict, monitor: TerminationMonitor) -> PlannerResult:
        raise NotImplementedError


_REGISTRY: dict[str, type[Planner]] = {}


def register(cls):
    _REGISTRY[cls.name] = cls
    return cls


def planner_from_spec(spec: PlannerSpec | str, params: Mapping | None = None) -> Planner:
    if isinstance(spec, str):
        spec = PlannerSpec(spec, params or {})
    return _REGISTRY[spec.name](spec)

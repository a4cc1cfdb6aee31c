"""Sampling-based planners: RRT, RRT-Connect, RRT*, PRM, PRM* and LazyPRM.

Every planner is created from a :class:`PlannerSpec` (name plus parameter
overrides) and solved against a :class:`~plankit.problem.ProblemDefinition`
with a :class:`TerminationCondition` and a random stream.
"""

from .base import (
    PLANNER_NAMES,
    PLANNER_PARAMS,
    Planner,
    PlannerResult,
    PlannerSpec,
    PlannerStats,
    PlanningContext,
    RoadmapGraph,
    Status,
    TerminationCondition,
    planner_from_spec,
)
from .prm import PRM, LazyPRM, PRMStar
from .rrt import RRT, RRTConnect, RRTStar


def _plan(name):
    def run(problem, spec, tc, rng=None):
        if isinstance(spec, dict):
            spec = PlannerSpec(name, spec)
        elif spec.name != name:
            raise ValueError(f"spec is for {spec.name!r}, not {name!r}")
        return planner_from_spec(spec).solve(problem, tc, rng)
    run.__name__ = f"plan_{name}"
    run.__doc__ = f"Solve ``problem`` with the {name} planner."
    return run


plan_rrt = _plan("rrt")
plan_rrt_connect = _plan("rrt_connect")
plan_rrt_star = _plan("rrt_star")
plan_prm = _plan("prm")
plan_prm_star = _plan("prm_star")
plan_lazy_prm = _plan("lazy_prm")

__all__ = [
    "PLANNER_NAMES", "PLANNER_PARAMS", "PRM", "PRMStar", "LazyPRM", "Planner", "PlannerResult",
    "PlannerSpec", "PlannerStats", "PlanningContext", "RRT", "RRTConnect", "RRTStar", "RoadmapGraph",
    "Status", "TerminationCondition", "plan_lazy_prm", "plan_prm", "plan_prm_star", "plan_rrt",
    "plan_rrt_connect", "plan_rrt_star", "planner_from_spec",
]

import math
import statistics

import numpy as np
import pytest

from plankit.errors import ConfigurationError, PreconditionError
from plankit.planners import (
    PLANNER_NAMES,
    PlannerSpec,
    RoadmapGraph,
    Status,
    TerminationCondition,
    plan_rrt,
    planner_from_spec,
)
from plankit.problem import ExactState, ProblemDefinition, Region, goal_satisfied, path_cost, validate_path
from plankit.rng import RngStream
from plankit.spaces import distance, dubins, real_vector, reeds_shepp, se2
from plankit.validity import RobotModel, Scene

SQUARE = real_vector([(0, 1), (0, 1)])
BLOCK = Scene(boxes=[((0.4, 0.25), (0.6, 0.75))])
WALL = Scene(boxes=[((0.45, -0.1), (0.55, 1.1))])
ROOMS = Scene(boxes=[((0.475, 0.0), (0.525, 0.7)), ((0.475, 0.9), (0.525, 1.0))])
ROADMAPS = ("prm", "prm_star", "lazy_prm")
ANYTIME = ("rrt_star", "prm", "prm_star")


def iters(n):
    return TerminationCondition.max_iterations(n)


def _problem(scene=Scene(), start=(0.0, 0.0), goal=(1.0, 1.0), threshold=0.1, space=SQUARE, robot=None):
    return ProblemDefinition(space, scene, robot or RobotModel.point2d(), start, ExactState(goal, threshold))


def _solve(name, problem, tc, seed, **params):
    return planner_from_spec(PlannerSpec(name, params)).solve(problem, tc, RngStream(seed))


def _assert_contract(problem, res):
    st = res.path.states
    assert tuple(st[0]) == problem.start
    assert goal_satisfied(problem.goal, problem.space, st[-1])
    assert validate_path(problem, res.path)
    assert abs(res.stats.final_cost - path_cost(problem.space, res.path)) <= 1e-9
    costs = [c for _, c in res.stats.cost_trace]
    assert all(b <= a for a, b in zip(costs, costs[1:]))


# ---- correctness on simple scenes ----

def test_rrt_empty_scene_all_seeds():
    prob = _problem()
    for seed in range(100):
        res = plan_rrt(prob, {}, iters(10000), RngStream(seed))
        assert res.status == Status.SOLVED, seed
        _assert_contract(prob, res)


@pytest.mark.parametrize("name", PLANNER_NAMES)
def test_every_planner_solves_box_scene(name):
    prob = _problem(BLOCK, (0.1, 0.5), (0.9, 0.5), 0.01)
    for seed in range(3):
        res = _solve(name, prob, iters(3000), seed)
        assert res.solved, (name, seed)
        _assert_contract(prob, res)
        assert res.stats.final_cost >= 0.8


@pytest.mark.parametrize("name", PLANNER_NAMES)
def test_determinism(name):
    prob = _problem(BLOCK, (0.1, 0.5), (0.9, 0.5), 0.01)
    a = _solve(name, prob, iters(800), 11)
    b = _solve(name, prob, iters(800), 11)
    assert a.same_outcome(b)
    assert a.path.states.tobytes() == b.path.states.tobytes()
    c = _solve(name, prob, iters(800), 12)
    assert not c.same_outcome(a)


def test_rrt_connect_fewer_iterations_than_rrt():
    prob = _problem()
    rrt = [_solve("rrt", prob, iters(10000), s).stats.iterations for s in range(100)]
    con = [_solve("rrt_connect", prob, iters(10000), s).stats.iterations for s in range(100)]
    assert statistics.median(con) < statistics.median(rrt)


def test_rrt_connect_narrow_passage():
    prob = _problem(ROOMS, (0.1, 0.1), (0.9, 0.1), 0.01)
    solved = sum(_solve("rrt_connect", prob, iters(100_000), s).solved for s in range(100))
    assert solved >= 95


@pytest.mark.parametrize("name", ROADMAPS + ("rrt", "rrt_connect", "rrt_star"))
def test_wall_is_never_solved(name):
    prob = _problem(WALL, (0.1, 0.5), (0.9, 0.5), 0.01)
    for seed in range(3):
        res = _solve(name, prob, iters(500), seed)
        assert res.status == Status.FAILED
        assert res.path is None


@pytest.mark.parametrize("name", ROADMAPS)
def test_roadmap_cost_at_least_straight_line(name):
    prob = _problem(start=(0.1, 0.1), goal=(0.9, 0.8), threshold=0.0)
    res = _solve(name, prob, iters(500), 5)
    assert res.solved
    assert res.stats.final_cost >= distance(SQUARE, [0.1, 0.1], [0.9, 0.8]) - 1e-12


def test_prm_star_not_worse_than_prm():
    prob = _problem(BLOCK, (0.1, 0.5), (0.9, 0.5), 0.01)
    prm = [_solve("prm", prob, iters(10_000), s).stats.final_cost for s in range(20)]
    star = [_solve("prm_star", prob, iters(10_000), s).stats.final_cost for s in range(20)]
    assert statistics.median(star) <= statistics.median(prm)


# ---- termination and status ----

@pytest.mark.parametrize("name", PLANNER_NAMES)
def test_zero_budget_is_timeout(name):
    for tc in (iters(0), TerminationCondition.max_time(0.0)):
        res = _solve(name, _problem(), tc, 0)
        assert res.status == Status.TIMEOUT
        assert res.path is None


@pytest.mark.parametrize("name", ANYTIME)
def test_anytime_planners_improve_and_stop_on_request(name):
    prob = _problem(BLOCK, (0.1, 0.5), (0.9, 0.5), 0.01)
    full = _solve(name, prob, iters(2000), 4)
    assert full.stats.iterations == 2000
    first = _solve(name, prob, TerminationCondition.any_of(iters(2000), TerminationCondition.solved_exactly()), 4)
    assert first.solved and first.stats.iterations < 2000
    assert full.stats.final_cost <= first.stats.final_cost
    costs = [c for _, c in full.stats.cost_trace]
    assert all(b <= a for a, b in zip(costs, costs[1:]))


def test_cost_below_stops_rrt_star():
    prob = _problem(start=(0.05, 0.05), goal=(0.95, 0.95), threshold=0.01)
    tc = TerminationCondition.any_of(iters(20000), TerminationCondition.cost_below(1.4))
    res = _solve("rrt_star", prob, tc, 2)
    assert res.solved and res.stats.final_cost < 1.4
    assert res.stats.iterations < 20000


@pytest.mark.parametrize("name", ("rrt", "rrt_connect", "rrt_star"))
def test_approximate_solution(name):
    prob = _problem(WALL, (0.1, 0.5), (0.9, 0.5), 0.01)
    res = _solve(name, prob, iters(300), 1, return_approximate=1)
    assert res.status == Status.APPROXIMATE
    assert tuple(res.path.states[0]) == prob.start
    assert validate_path(prob, res.path)
    assert res.stats.final_cost is not None


def test_start_in_collision_is_precondition_error():
    prob = _problem(BLOCK, (0.5, 0.5), (0.9, 0.5))
    for name in PLANNER_NAMES:
        with pytest.raises(PreconditionError):
            _solve(name, prob, iters(10), 0)


def test_roadmaps_reject_asymmetric_metric():
    prob = _problem(start=(0.1, 0.1, 0.0), goal=(0.9, 0.9, 0.0), space=dubins([(0, 1), (0, 1)], 0.1))
    for name in ROADMAPS:
        with pytest.raises(PreconditionError):
            _solve(name, prob, iters(10), 0)


def test_bidirectional_needs_goal_sampler():
    prob = ProblemDefinition(SQUARE, Scene(), RobotModel.point2d(), (0.1, 0.1), Region(lambda q: q[0] > 0.9))
    for name in ("rrt_connect",) + ROADMAPS:
        with pytest.raises(PreconditionError):
            _solve(name, prob, iters(10), 0)
    assert _solve("rrt", prob, iters(5000), 0).solved


def test_region_goal_with_sampler():
    region = Region(lambda q: q[0] >= 0.9, sampler=lambda rng: np.array([rng.uniform(0.9, 1.0), rng.uniform(0, 1)]))
    prob = ProblemDefinition(SQUARE, BLOCK, RobotModel.point2d(), (0.1, 0.5), region)
    for name in PLANNER_NAMES:
        res = _solve(name, prob, iters(3000), 1)
        assert res.solved, name
        assert res.path.states[-1][0] >= 0.9


@pytest.mark.parametrize("space", [se2([(0, 1), (0, 1)]), dubins([(0, 1), (0, 1)], 0.1),
                                   reeds_shepp([(0, 1), (0, 1)], 0.1)])
def test_car_spaces(space):
    prob = _problem(BLOCK, (0.1, 0.5, 0.0), (0.9, 0.5, 0.0), 0.05, space=space, robot=RobotModel.disc(0.02))
    for name in ("rrt", "rrt_connect", "rrt_star"):
        res = _solve(name, prob, iters(5000), 3)
        assert res.solved, name
        _assert_contract(prob, res)


# ---- stats ----

def test_stats_are_consistent():
    prob = _problem(BLOCK, (0.1, 0.5), (0.9, 0.5), 0.01)
    res = _solve("rrt", prob, iters(3000), 8)
    st = res.stats
    assert 1 <= st.iterations <= 3000
    assert st.states_created >= len(res.path)
    assert st.validity_checks > 0 and st.motion_checks > 0
    assert st.wall_time_seconds >= 0
    assert res.params["goal_bias"] == 0.05
    assert math.isclose(res.params["max_edge_length"], 0.1 * math.sqrt(2))


# ---- specs ----

def test_spec_defaults_and_errors():
    assert PlannerSpec("rrt").effective_params()["goal_bias"] == 0.05
    assert PlannerSpec("prm").effective_params()["prm_k"] == 10
    with pytest.raises(ConfigurationError, match="valid names"):
        planner_from_spec(PlannerSpec("rrtstar"))
    with pytest.raises(ConfigurationError):
        PlannerSpec("rrt", {"goal_bias": 1.5})
    with pytest.raises(ConfigurationError):
        PlannerSpec("rrt", {"max_edge_length": 0.0})
    with pytest.raises(ConfigurationError):
        PlannerSpec("rrt_connect", {"goal_bias": 0.1})
    with pytest.raises(ConfigurationError):
        PlannerSpec("prm", {"prm_k": 2.5})
    with pytest.raises(ConfigurationError):
        PlannerSpec("rrt", {"goal_bias": "x"})
    with pytest.raises(ConfigurationError):
        PlannerSpec("rrt", {"goal_bias": float("nan")})


def test_termination_conditions():
    assert iters(5).deterministic
    assert not TerminationCondition.any_of(iters(5), TerminationCondition.max_time(1.0)).deterministic
    mon = TerminationCondition.any_of(iters(3), TerminationCondition.cost_below(1.0)).monitor()
    assert not mon(1, False, None)
    assert mon(1, True, 0.5)
    assert mon(2, False, None)  # monotone: once fired, stays fired
    assert iters(3).monitor()(3)
    assert TerminationCondition.solved_exactly().monitor()(1, True)


def test_roadmap_graph():
    g = RoadmapGraph()
    ids = [g.add_vertex([float(i), 0.0]) for i in range(4)]
    g.add_edge(ids[0], ids[1], 1.0, True)
    e = g.add_edge(ids[1], ids[2], 1.0, False)
    g.add_edge(ids[0], ids[2], 5.0, True)
    assert g.connected(ids[0], ids[2]) and not g.connected(ids[0], ids[3])
    verts, _ = g.shortest_path(ids[0], ids[2])
    assert verts == [ids[0], ids[1], ids[2]]
    g.remove_edge(e)
    verts, _ = g.shortest_path(ids[0], ids[2])
    assert verts == [ids[0], ids[2]]
    assert g.shortest_path(ids[0], ids[3]) is None

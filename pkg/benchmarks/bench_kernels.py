"""Compare the compiled kernels with their pure-Python fallbacks.

Usage: python benchmarks/bench_kernels.py [--quick]

Reports states/second for the batched validity kernel on each backend,
batched motion checking against the scalar reference predicate,
Reeds-Shepp distances per second on each backend, and the RRT-Connect
solve rate on an empty square.
"""

from __future__ import annotations

import argparse
import contextlib
import time

import numpy as np

from plankit.planners import PlannerSpec, TerminationCondition, planner_from_spec
from plankit.problem import ExactState, ProblemDefinition
from plankit.rng import RngStream
from plankit.spaces import distance, real_vector, steering
from plankit.validity import RobotModel, Scene, ValidityChecker, available_backends, is_state_valid

SQUARE = real_vector([(0, 1), (0, 1)])


def _rate(count: int, fn) -> float:
    t0 = time.perf_counter()
    fn()
    return count / (time.perf_counter() - t0)


def _scene(rng, n_circles=10, n_boxes=5):
    circles = [(tuple(rng.uniform(0, 1, 2)), float(rng.uniform(0.02, 0.08))) for _ in range(n_circles)]
    boxes = []
    for _ in range(n_boxes):
        lo = rng.uniform(0, 0.8, 2)
        boxes.append((tuple(lo), tuple(lo + rng.uniform(0.05, 0.2, 2))))
    return Scene(circles2d=circles, boxes=boxes)


def bench_validity(n: int) -> None:
    rng = np.random.default_rng(0)
    scene = _scene(rng)
    cases = {
        "disc": (SQUARE, RobotModel.disc(0.02), rng.uniform(0, 1, (n, 2))),
        "planar_arm": (real_vector([(-np.pi, np.pi)] * 4), RobotModel.planar_arm([0.15] * 4, 0.01, base=(0.5, 0.5)),
                       rng.uniform(-np.pi, np.pi, (n, 4))),
    }
    print("batched validity, states/s")
    for name, (space, robot, X) in cases.items():
        row = []
        for backend in available_backends():
            checker = ValidityChecker(scene, robot, space, backend=backend)
            row.append(f"{backend}={_rate(n, lambda: checker.valid_many(X)):,.0f}")
        scalar = _rate(min(n, 20_000), lambda: [is_state_valid(scene, robot, space, q) for q in X[:20_000]])
        print(f"  {name:<11} " + "  ".join(row) + f"  scalar={scalar:,.0f}")


def bench_motion(n_pairs: int) -> None:
    rng = np.random.default_rng(1)
    scene = Scene(circles2d=[((0.3, 0.7), 0.05), ((0.7, 0.3), 0.05), ((0.8, 0.8), 0.04)])
    robot = RobotModel.disc(0.02)
    checker = ValidityChecker(scene, robot, SQUARE, width=8)
    pairs = []
    while len(pairs) < n_pairs:
        a, b = rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)
        if checker.is_valid(a) and checker.is_valid(b):
            pairs.append((a, b))
    res = 0.002
    checker.validity_checks = 0
    t0 = time.perf_counter()
    for a, b in pairs:
        checker.check_motion(a, b, res)
    batched = checker.validity_checks / (time.perf_counter() - t0)
    states = []
    for a, b in pairs:
        k = 1 << checker._depth(distance(SQUARE, a, b), res)
        states.extend(a + (b - a) * (i / k) for i in range(1, k + 1))
    scalar = _rate(len(states), lambda: [is_state_valid(scene, robot, SQUARE, q) for q in states])
    print(f"motion checking at W=8, states/s\n  batched={batched:,.0f}  scalar={scalar:,.0f}  "
          f"speedup={batched / scalar:.1f}x")


@contextlib.contextmanager
def _pure_python_steering():
    saved = steering._compiled
    steering._compiled = None
    try:
        yield
    finally:
        steering._compiled = saved


def bench_reeds_shepp(n: int) -> None:
    rng = np.random.default_rng(2)
    Q = np.column_stack([rng.uniform(0, 1, (n, 2)), rng.uniform(-np.pi, np.pi, n)])
    q = np.array([0.5, 0.5, 0.3])
    row = []
    if steering._compiled is not None:
        row.append(f"cython={_rate(n, lambda: steering.reeds_shepp_distance_many(Q, q, 0.1)):,.0f}")
    with _pure_python_steering():
        m = min(n, 5000)
        row.append(f"python={_rate(m, lambda: steering.reeds_shepp_distance_many(Q[:m], q, 0.1)):,.0f}")
    print("Reeds-Shepp distances/s\n  " + "  ".join(row))


def bench_rrt_connect(n: int) -> None:
    prob = ProblemDefinition(SQUARE, Scene(), RobotModel.point2d(), (0.05, 0.05), ExactState((0.95, 0.95)))
    tc = TerminationCondition.max_iterations(10_000)
    planner = planner_from_spec(PlannerSpec("rrt_connect"))
    rate = _rate(n, lambda: [planner.solve(prob, tc, RngStream(s)) for s in range(n)])
    print(f"RRT-Connect on the empty square\n  solves/s={rate:,.0f}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()
    scale = 10 if args.quick else 1
    print(f"backends: {', '.join(available_backends())}")
    bench_validity(200_000 // scale)
    bench_motion(400 // scale)
    bench_reeds_shepp(50_000 // scale)
    bench_rrt_connect(300 // scale)


if __name__ == "__main__":
    main()

"""Run scenario x planner x run grids, serially or in worker processes."""

from __future__ import annotations

import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..errors import ConfigurationError, PlankitError
from ..planners import PlannerSpec, TerminationCondition, planner_from_spec
from ..problem import ProblemDefinition
from ..rng import RngStream, derive_seed
from .records import RunRecord


def planner_label(spec: PlannerSpec) -> str:
    """Display key of a planner spec: its name plus any overrides."""
    if not spec.params:
        return spec.name
    return spec.name + "(" + ";".join(f"{k}={v!r}" for k, v in spec.params.items()) + ")"


@dataclass(frozen=True)
class BenchmarkSuite:
    scenarios: Mapping[str, ProblemDefinition]
    planner_specs: Sequence[PlannerSpec]
    runs_per_pair: int
    tc: TerminationCondition
    master_seed: int
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.scenarios or not self.planner_specs:
            raise ConfigurationError("a benchmark suite needs at least one scenario and one planner")
        if self.runs_per_pair < 1:
            raise ConfigurationError("runs_per_pair must be >= 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigurationError("master_seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "scenarios", dict(self.scenarios))
        object.__setattr__(self, "planner_specs", tuple(self.planner_specs))
        labels = self.labels or tuple(planner_label(s) for s in self.planner_specs)
        if len(labels) != len(self.planner_specs) or len(set(labels)) != len(labels):
            raise ConfigurationError(f"planner labels must be unique, got {list(labels)}")
        object.__setattr__(self, "labels", tuple(labels))

    def tasks(self) -> list[tuple[str, int, int]]:
        return [(s, p, i) for s in self.scenarios for p in range(len(self.planner_specs))
                for i in range(self.runs_per_pair)]

    def run_seed(self, scenario: str, label: str, index: int) -> int:
        return derive_seed(self.master_seed, scenario, label, index)


def run_one(suite: BenchmarkSuite, scenario: str, planner_idx: int, index: int) -> RunRecord:
    problem = suite.scenarios[scenario]
    spec = suite.planner_specs[planner_idx]
    label = suite.labels[planner_idx]
    seed = suite.run_seed(scenario, label, index)
    try:
        res = planner_from_spec(spec).solve(problem, suite.tc, RngStream(seed))
    except PlankitError as exc:
        note = " ".join(f"{type(exc).__name__}: {exc}".split())
        return RunRecord(scenario, label, index, seed, "Failed", 0.0, None, 0, 0, 0, 0, note)
    st = res.stats
    cost = st.final_cost if res.status.value in ("Solved", "ApproximateSolution") else None
    return RunRecord(scenario, label, index, seed, res.status.value, st.wall_time_seconds, cost,
                     st.iterations, st.states_created, st.validity_checks, st.motion_checks)


# worker-process state, installed by the pool initializer (inherited, not
# pickled, under the fork start method)
_WORKER_SUITE: BenchmarkSuite | None = None


def _init_worker(suite: BenchmarkSuite) -> None:
    global _WORKER_SUITE
    _WORKER_SUITE = suite


def _run_task(task: tuple[str, int, int]) -> RunRecord:
    return run_one(_WORKER_SUITE, *task)


def default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return max(1, os.cpu_count() or 1)


def run_benchmark(suite: BenchmarkSuite, jobs: int = 1) -> list[RunRecord]:
    """Every (scenario, planner, run) of the suite, sorted by that key.

    With ``jobs > 1`` runs are spread over worker processes; the sorted
    output is the same as a serial run apart from wall times.
    """
    if jobs < 1:
        raise ConfigurationError("jobs must be >= 1")
    tasks = suite.tasks()
    if jobs == 1 or len(tasks) == 1:
        records = [run_one(suite, *t) for t in tasks]
    else:
        methods = multiprocessing.get_all_start_methods()
        ctx = multiprocessing.get_context("fork" if "fork" in methods else "spawn")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx, initializer=_init_worker,
                                 initargs=(suite,)) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return sorted(records, key=lambda r: r.sort_key)

"""Command-line front end: ``plankit plan | benchmark | report``.

Exit codes: 0 solved (or command succeeded), 2 planner did not solve,
1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import datetime
import logging
import os
import sys
import time

from .bench import BenchmarkSuite, RunRecord, default_jobs, emit_report, read_log, run_benchmark, write_log
from .bench.harness import planner_label
from .bench.records import LogFormatError
from .errors import PlankitError, PreconditionError
from .planners import Status, planner_from_spec
from .problem import write_path
from .rng import RngStream
from .scenario import load_scenario, load_suite

EXIT_OK, EXIT_CONFIG, EXIT_UNSOLVED = 0, 1, 2

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("plankit")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2, which means "unsolved" here
        raise _UsageError(f"{self.prog}: {message}")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="plankit", description="Sampling-based motion planning and benchmarking.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    pl = sub.add_parser("plan", help="run one planner on a scenario file")
    pl.add_argument("scenario", help="scenario file (YAML)")
    pl.add_argument("overrides", nargs="*", metavar="key.path=value", help="scenario overrides")
    pl.add_argument("--output", "-o", help="path file to write (default: <scenario stem>.path)")
    pl.add_argument("--seed", type=int, help="overrides the scenario seed")
    pl.add_argument("--quiet", "-q", action="store_true", help="print nothing on success")

    bm = sub.add_parser("benchmark", help="run a benchmark suite and write log plus report")
    bm.add_argument("suite", help="suite file (YAML)")
    bm.add_argument("overrides", nargs="*", metavar="key.path=value", help="suite overrides")
    bm.add_argument("--out-dir", "-o", default="benchmark-out", help="output directory")
    bm.add_argument("--jobs", "-j", type=int, default=None, help="worker processes (default: all processors)")
    bm.add_argument("--seed", type=int, help="overrides the suite master_seed")
    bm.add_argument("--quiet", "-q", action="store_true")

    rp = sub.add_parser("report", help="regenerate summary CSV and box plots from a log")
    rp.add_argument("log", help="benchmark log file")
    rp.add_argument("--out-dir", "-o", default=None, help="output directory (default: next to the log)")
    rp.add_argument("--quiet", "-q", action="store_true")
    return p


def _setup_logging() -> None:
    name = os.environ.get("PLAN_LOG_LEVEL", "warn").strip().lower()
    if name not in LOG_LEVELS:
        raise _UsageError(f"PLAN_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {name!r}")
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(LOG_LEVELS[name])
    log.propagate = False


def _emit(quiet: bool, pairs) -> None:
    if quiet:
        return
    for key, value in pairs:
        print(f"{key}: {value}")


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def cmd_plan(args) -> int:
    scenario = load_scenario(args.scenario, args.overrides)
    spec = scenario.planner
    planner = planner_from_spec(spec)
    if args.seed is not None:
        seed = args.seed
    else:
        seed = int(spec.params.get("seed", scenario.seed))
    problem = scenario.problem
    checker = problem.make_checker()
    try:
        problem.check_start(checker)
    except PreconditionError as exc:
        raise _UsageError(f"{args.scenario}: start: {exc}") from None
    log.info("planning %s with %s (seed %d)", scenario.name, spec.name, seed)
    res = planner.solve(problem, scenario.tc, RngStream(seed), checker=checker)
    st = res.stats

    out = args.output or os.path.splitext(os.path.basename(args.scenario))[0] + ".path"
    if res.path is not None:
        write_path(res.path, out)
    has_cost = res.status in (Status.SOLVED, Status.APPROXIMATE)
    record = RunRecord(scenario.name, planner_label(spec), 0, seed, res.status.value, st.wall_time_seconds,
                       st.final_cost if has_cost else None, st.iterations, st.states_created,
                       st.validity_checks, st.motion_checks)
    write_log([record], out + ".log", {"seed": seed, "deterministic": str(scenario.tc.deterministic).lower()})

    pairs = [("scenario", scenario.name), ("planner", spec.name), ("status", res.status.value),
             ("cost", _fmt(st.final_cost if has_cost else None)), ("time", _fmt(st.wall_time_seconds)),
             ("iterations", st.iterations), ("states_created", st.states_created),
             ("validity_checks", st.validity_checks), ("motion_checks", st.motion_checks), ("seed", seed)]
    pairs += [(f"param.{k}", _fmt(v)) for k, v in sorted(res.params.items())]
    pairs += [("waypoints", len(res.path.states) if res.path is not None else 0),
              ("path_file", out if res.path is not None else "none"), ("log_file", out + ".log")]
    _emit(args.quiet, pairs)
    return EXIT_OK if res.status == Status.SOLVED else EXIT_UNSOLVED


def cmd_benchmark(args) -> int:
    sf = load_suite(args.suite, args.overrides)
    master = sf.master_seed if args.seed is None else args.seed
    suite = BenchmarkSuite({k: s.problem for k, s in sf.scenarios.items()}, sf.planners, sf.runs, sf.tc,
                           master, sf.labels)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    if jobs < 1:
        raise _UsageError("--jobs must be >= 1")
    log.info("running %d tasks on %d worker(s)", len(suite.tasks()), jobs)
    t0 = time.perf_counter()
    records = run_benchmark(suite, jobs)
    elapsed = time.perf_counter() - t0
    os.makedirs(args.out_dir, exist_ok=True)
    log_path = os.path.join(args.out_dir, "benchmark.log")
    stamp = datetime.datetime.now(datetime.timezone.utc).replace(microsecond=0).isoformat()
    write_log(records, log_path, {"master_seed": master, "timestamp": stamp,
                                  "deterministic": str(sf.tc.deterministic).lower()})
    written = emit_report(None, records, args.out_dir)
    solved = sum(r.status == "Solved" for r in records)
    _emit(args.quiet, [("runs", len(records)), ("solved", solved), ("jobs", jobs),
                       ("elapsed", _fmt(elapsed)), ("log_file", log_path)]
          + [("report_file", p) for p in written])
    return EXIT_OK


def cmd_report(args) -> int:
    _, records = read_log(args.log)
    out_dir = args.out_dir or os.path.dirname(os.path.abspath(args.log))
    written = emit_report(None, records, out_dir)
    _emit(args.quiet, [("runs", len(records))] + [("report_file", p) for p in written])
    return EXIT_OK


COMMANDS = {"plan": cmd_plan, "benchmark": cmd_benchmark, "report": cmd_report}


def main(argv=None) -> int:
    args = None
    try:
        _setup_logging()
        parser = _parser()
        args, extra = parser.parse_known_args(argv)
        # overrides may follow option flags; anything else left over is an error
        stray = [a for a in extra if a.startswith("-") or "=" not in a or not hasattr(args, "overrides")]
        if stray:
            parser.error(f"unrecognized arguments: {' '.join(stray)}")
        if extra:
            args.overrides = list(args.overrides) + extra
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
    except LogFormatError as exc:
        print(f"{getattr(args, 'log', '')}: {exc}", file=sys.stderr)
    except (PlankitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Benchmark harness: run grids, versioned logs, aggregation and reports."""

from .harness import BenchmarkSuite, default_jobs, planner_label, run_benchmark, run_one
from .records import COLUMNS, LOG_VERSION, LogFormatError, LogVersionError, RunRecord, format_log, parse_log, read_log, write_log
from .report import SUMMARY_COLUMNS, emit_report, format_summary, render_boxplot
from .stats import CellStats, ResultsTable, Summary, aggregate, median, quantile

__all__ = [
    "COLUMNS", "LOG_VERSION", "SUMMARY_COLUMNS", "BenchmarkSuite", "CellStats", "LogFormatError",
    "LogVersionError", "ResultsTable", "RunRecord", "Summary", "aggregate", "default_jobs", "emit_report",
    "format_log", "format_summary", "median", "parse_log", "planner_label", "quantile", "read_log",
    "render_boxplot", "run_benchmark", "run_one", "write_log",
]

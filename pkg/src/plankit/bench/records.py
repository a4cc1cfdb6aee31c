"""Benchmark run records and the versioned text log that stores them."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, fields

from ..errors import ContractError, PlankitError

LOG_MAGIC = "# plankit benchmark log"
LOG_VERSION = "1"
COLUMNS = ("scenario", "planner", "run_index", "seed", "status", "wall_time_seconds", "cost",
           "iterations", "states_created", "validity_checks", "motion_checks", "note")
STATUSES = ("Solved", "ApproximateSolution", "Failed", "Timeout")


class LogFormatError(PlankitError, ValueError):
    """Malformed benchmark log; ``line`` is the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class LogVersionError(LogFormatError):
    pass


@dataclass(frozen=True)
class RunRecord:
    scenario: str
    planner: str
    run_index: int
    seed: int
    status: str
    wall_time_seconds: float
    cost: float | None
    iterations: int
    states_created: int
    validity_checks: int
    motion_checks: int
    note: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ContractError(f"unknown run status {self.status!r}")
        has_cost = self.status in ("Solved", "ApproximateSolution")
        if has_cost != (self.cost is not None):
            raise ContractError(f"cost must be present exactly for solved runs ({self.status}, cost={self.cost})")
        for name in ("scenario", "planner", "note"):
            v = getattr(self, name)
            if "\n" in v or "\r" in v:
                raise ContractError(f"{name} must not contain line breaks")

    @property
    def sort_key(self) -> tuple:
        return (self.scenario, self.planner, self.run_index)

    def deterministic_view(self) -> tuple:
        """All fields except wall time."""
        return tuple(getattr(self, f.name) for f in fields(self) if f.name != "wall_time_seconds")


def _row(r: RunRecord) -> list[str]:
    return [r.scenario, r.planner, str(r.run_index), str(r.seed), r.status, repr(float(r.wall_time_seconds)),
            "" if r.cost is None else repr(float(r.cost)), str(r.iterations), str(r.states_created),
            str(r.validity_checks), str(r.motion_checks), r.note]


def format_log(records, metadata: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(LOG_MAGIC + "\n")
    buf.write(f"# format_version: {LOG_VERSION}\n")
    for key, value in (metadata or {}).items():
        if key == "format_version" or "\n" in str(value) or ":" in str(key):
            raise ContractError(f"bad metadata entry {key!r}")
        buf.write(f"# {key}: {value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow(_row(r))
    return buf.getvalue()


def write_log(records, destination, metadata: dict | None = None) -> None:
    text = format_log(records, metadata)
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        destination.write(text)


def _int(s: str, line: int, col: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise LogFormatError(f"column {col}: expected an integer, got {s!r}", line) from None


def _float(s: str, line: int, col: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise LogFormatError(f"column {col}: expected a number, got {s!r}", line) from None


def read_log(source) -> tuple[dict[str, str], list[RunRecord]]:
    """Parse a log into ``(metadata, records)``."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != LOG_MAGIC:
        raise LogFormatError("not a plankit benchmark log (bad first line)", 1)
    meta: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][1:].strip()
        key, sep, value = body.partition(":")
        if not sep:
            raise LogFormatError(f"metadata line without 'key: value': {lines[i]!r}", i + 1)
        meta[key.strip()] = value.strip()
        i += 1
    version = meta.get("format_version")
    if version is None:
        raise LogVersionError("log has no format_version header", 2)
    if version != LOG_VERSION:
        raise LogVersionError(f"unsupported log format version {version!r} (this build reads {LOG_VERSION})")
    if i >= len(lines):
        raise LogFormatError("missing column header", i + 1)
    header = next(csv.reader([lines[i]]))
    if tuple(header) != COLUMNS:
        raise LogFormatError(f"unexpected columns {header}", i + 1)
    records = []
    for lineno in range(i + 2, len(lines) + 1):
        raw = lines[lineno - 1]
        try:
            row = next(csv.reader([raw], strict=True))
        except (csv.Error, StopIteration) as exc:
            raise LogFormatError(f"unparseable record: {exc}", lineno) from None
        if len(row) != len(COLUMNS):
            raise LogFormatError(f"expected {len(COLUMNS)} fields, got {len(row)} (truncated record?)", lineno)
        status = row[4]
        if status not in STATUSES:
            raise LogFormatError(f"unknown status {status!r}", lineno)
        try:
            rec = RunRecord(
                scenario=row[0], planner=row[1], run_index=_int(row[2], lineno, "run_index"),
                seed=_int(row[3], lineno, "seed"), status=status,
                wall_time_seconds=_float(row[5], lineno, "wall_time_seconds"),
                cost=None if row[6] == "" else _float(row[6], lineno, "cost"),
                iterations=_int(row[7], lineno, "iterations"),
                states_created=_int(row[8], lineno, "states_created"),
                validity_checks=_int(row[9], lineno, "validity_checks"),
                motion_checks=_int(row[10], lineno, "motion_checks"), note=row[11])
        except ContractError as exc:
            raise LogFormatError(str(exc), lineno) from None
        records.append(rec)
    return meta, records


def parse_log(source) -> list[RunRecord]:
    return read_log(source)[1]

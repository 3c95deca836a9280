"""Task-lifetime extraction from cluster event logs.

Input is CSV with one event per row: job_id, task_id, kind, timestamp.  A
header row naming those columns is optional; with a header the columns may
appear in any order (or under other names via ``columns=``).  ``kind`` is
SCHEDULE or FINISH, or the numeric codes 1 and 4 used by the Google cluster
trace.  Timestamps are non-negative integers in trace units.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from .distributions import Empirical

__all__ = [
    "SCHEDULE",
    "FINISH",
    "TaskEvent",
    "JobRecord",
    "ParseResult",
    "BuildResult",
    "MissingColumnsError",
    "EmptySelectionError",
    "parse_events",
    "build_job_records",
    "empirical_model",
    "tail_points",
    "write_tail_csv",
    "events_from_lifetimes",
    "write_events_csv",
]

SCHEDULE, FINISH = "SCHEDULE", "FINISH"
REQUIRED = ("job_id", "task_id", "kind", "timestamp")
_KIND_ALIASES = {"SCHEDULE": SCHEDULE, "FINISH": FINISH, "1": SCHEDULE, "4": FINISH}


class MissingColumnsError(ValueError):
    pass


class EmptySelectionError(ValueError):
    pass


@dataclass(frozen=True)
class TaskEvent:
    job_id: str
    task_id: str
    kind: str
    timestamp: int


@dataclass(frozen=True)
class JobRecord:
    job_id: str
    lifetimes: tuple

    @property
    def k(self) -> int:
        return len(self.lifetimes)


@dataclass
class ParseResult:
    events: list
    errors: list = field(default_factory=list)  # (line number, message)


def _text(stream: Union[IO[str], IO[bytes]]) -> IO[str]:
    probe = stream.read(0)
    if isinstance(probe, bytes):
        return io.TextIOWrapper(stream, encoding="utf-8", newline="")
    return stream


def parse_events(stream, columns: Optional[dict] = None) -> ParseResult:
    """Read events in input order; bad rows go to ``errors`` instead of raising.

    ``columns`` maps the canonical names (job_id, task_id, kind, timestamp) to
    header names.  Without a header row the canonical column order is used.
    """
    try:
        reader = csv.reader(_text(stream))
        rows = enumerate(reader, start=1)
        first = next(rows, None)
    except (OSError, UnicodeDecodeError) as exc:
        raise OSError(f"unreadable event stream: {exc}") from exc
    result = ParseResult(events=[])
    if first is None:
        return result

    names = {c: (columns or {}).get(c, c) for c in REQUIRED}
    lineno, row = first
    header = [h.strip() for h in row]
    if columns is not None or set(names.values()) & set(header):
        missing = [c for c in REQUIRED if names[c] not in header]
        if missing:
            raise MissingColumnsError(f"header lacks required columns: {', '.join(missing)}")
        idx = [header.index(names[c]) for c in REQUIRED]
        pending = []
    else:
        idx = [0, 1, 2, 3]
        pending = [first]

    def consume(lineno, row):
        if not row or all(not f.strip() for f in row):
            return
        if len(row) <= max(idx):
            result.errors.append((lineno, f"expected at least {max(idx) + 1} fields, got {len(row)}"))
            return
        job, task, kind, ts = (row[i].strip() for i in idx)
        canon = _KIND_ALIASES.get(kind.upper())
        if canon is None:
            result.errors.append((lineno, f"skipped unknown event kind {kind!r}"))
            return
        try:
            t = int(ts)
        except ValueError:
            result.errors.append((lineno, f"timestamp {ts!r} is not an integer"))
            return
        if t < 0:
            result.errors.append((lineno, f"negative timestamp {t}"))
            return
        result.events.append(TaskEvent(job, task, canon, t))

    try:
        for lineno, row in pending:
            consume(lineno, row)
        for lineno, row in rows:
            consume(lineno, row)
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise OSError(f"unreadable event stream: {exc}") from exc
    return result


@dataclass
class BuildResult:
    records: list
    dropped: int = 0
    duplicates: int = 0
    problems: list = field(default_factory=list)

    @property
    def task_count(self) -> int:
        return sum(r.k for r in self.records)


def build_job_records(events: Iterable[TaskEvent]) -> BuildResult:
    """Lifetime per task = first FINISH after the first SCHEDULE, minus that SCHEDULE.

    Tasks missing either event, finishing before they are scheduled, or with
    a zero lifetime are dropped and counted.  Repeated SCHEDULE events
    (resubmissions) are counted as duplicates; the first one wins.
    """
    sched: dict = {}
    fin: dict = {}
    early_finish: set = set()
    order: dict = {}
    out = BuildResult(records=[])
    for ev in events:
        key = (ev.job_id, ev.task_id)
        order.setdefault(ev.job_id, {}).setdefault(key, None)
        if ev.kind == SCHEDULE:
            if key in sched:
                out.duplicates += 1
            else:
                sched[key] = ev.timestamp
        elif key not in sched:
            early_finish.add(key)
        elif key not in fin:
            fin[key] = ev.timestamp

    for job, tasks in order.items():
        lifetimes = []
        for key in tasks:
            if key not in sched or key not in fin:
                why = "finish before schedule" if key in early_finish else "missing SCHEDULE or FINISH"
                out.problems.append(f"{key[0]}/{key[1]}: {why}")
                out.dropped += 1
                continue
            life = fin[key] - sched[key]
            if life <= 0:
                out.problems.append(f"{key[0]}/{key[1]}: finish before schedule" if life < 0
                                    else f"{key[0]}/{key[1]}: zero lifetime")
                out.dropped += 1
                continue
            lifetimes.append(life)
        if lifetimes:
            out.records.append(JobRecord(job, tuple(lifetimes)))
    return out


def _matches(k: int, k_filter) -> bool:
    if k_filter is None:
        return True
    if isinstance(k_filter, (tuple, list)):
        lo, hi = k_filter
        return lo <= k <= hi
    return k == k_filter


def empirical_model(records: Sequence[JobRecord], k_filter=None, time_unit: float = 1.0) -> Empirical:
    """Pool task lifetimes of jobs whose size matches ``k_filter``.

    ``k_filter`` is an int, an inclusive (lo, hi) pair, or None for all jobs.
    Lifetimes are multiplied by ``time_unit`` (e.g. 1e-6 for microseconds).
    """
    pooled = [life for r in records if _matches(r.k, k_filter) for life in r.lifetimes]
    if not pooled:
        raise EmptySelectionError(f"no jobs match k filter {k_filter!r}")
    return Empirical(np.asarray(pooled, dtype=float) * time_unit)


def tail_points(model: Empirical, grid: Sequence[float]) -> list:
    g = np.asarray(grid, dtype=float)
    if np.any(g <= 0) or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be positive and strictly ascending")
    return list(zip(g.tolist(), np.atleast_1d(model.tail(g)).tolist()))


def write_tail_csv(points, stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["t", "tail"])
    for t, s in points:
        w.writerow([repr(float(t)), repr(float(s))])


def events_from_lifetimes(lifetimes: Sequence[int], job_size: int, start: int = 0) -> list:
    """Synthetic SCHEDULE/FINISH pairs, ``job_size`` tasks per job."""
    events = []
    for i, life in enumerate(lifetimes):
        job, task = f"j{i // job_size}", f"t{i % job_size}"
        t0 = start + i
        events.append(TaskEvent(job, task, SCHEDULE, t0))
        events.append(TaskEvent(job, task, FINISH, t0 + int(life)))
    return events


def write_events_csv(events: Iterable[TaskEvent], stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(REQUIRED)
    for ev in events:
        w.writerow([ev.job_id, ev.task_id, ev.kind, ev.timestamp])

"""File formats: observation CSV and grouping-scheme files.

Observation CSV carries a `time,status` header and one row per subject.
A grouping-scheme file has one interval per line as
`lower,upper,representative,closure` with closure in {oo, oc, co, cc}.
All parsing is locale-independent with a decimal point.
"""

from __future__ import annotations

import csv

from .core import CLOSURES, Dataset, GroupingScheme, Interval

__all__ = ["InputFormatError", "read_observations_csv", "read_grouping_scheme", "write_observations_csv"]


class InputFormatError(ValueError):
    """Malformed input file; message carries the path and line number."""

    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def read_observations_csv(path) -> Dataset:
    """Read observations from a `time,status` CSV."""
    times: list[float] = []
    statuses: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputFormatError(path, 1, "empty file, expected header 'time,status'") from None
        if [h.strip().lower() for h in header] != ["time", "status"]:
            raise InputFormatError(path, 1, f"expected header 'time,status', got {','.join(header)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise InputFormatError(path, lineno, f"expected 2 fields, got {len(row)}")
            try:
                t = float(row[0])
            except ValueError:
                raise InputFormatError(path, lineno, f"invalid time {row[0]!r}") from None
            try:
                s = int(row[1])
            except ValueError:
                raise InputFormatError(path, lineno, f"invalid status {row[1]!r}") from None
            if s < 0:
                raise InputFormatError(path, lineno, f"status must be nonnegative, got {s}")
            times.append(t)
            statuses.append(s)
    if not times:
        raise InputFormatError(path, 2, "no observations")
    return Dataset(times, statuses)


def write_observations_csv(path, dataset: Dataset):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "status"])
        for t, s in zip(dataset.times, dataset.statuses):
            writer.writerow([format(float(t), ".12g"), int(s)])


def read_grouping_scheme(path) -> GroupingScheme:
    """Read a grouping scheme, one `lower,upper,representative,closure` per line."""
    intervals: list[Interval] = []
    reps: list[float] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 4:
                raise InputFormatError(path, lineno, f"expected 4 fields, got {len(parts)}")
            try:
                lower, upper, rep = float(parts[0]), float(parts[1]), float(parts[2])
            except ValueError:
                raise InputFormatError(path, lineno, f"invalid number in {line!r}") from None
            closure = parts[3]
            if closure not in CLOSURES:
                raise InputFormatError(path, lineno, f"closure must be one of {CLOSURES}, got {closure!r}")
            try:
                intervals.append(Interval(lower, upper, closure))
            except ValueError as exc:
                raise InputFormatError(path, lineno, str(exc)) from None
            reps.append(rep)
    if not intervals:
        raise InputFormatError(path, 1, "no intervals")
    return GroupingScheme(intervals, reps)

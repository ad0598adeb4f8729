"""Reading and writing datasets and change point files.

Two dataset formats are supported:

``long-csv``
    Header ``t,value`` then one row per observation. ``t`` is an integer
    ``>= 1``; repeated ``t`` give several observations at that time. Times
    must start at 1 and never skip; rows of one time must be consecutive.
``ragged-json``
    A JSON array of non-empty arrays of numbers, one per time point.

Floats are written with ``repr`` so both formats round-trip exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .data import Dataset

FORMATS = ("long-csv", "ragged-json")


class ParseError(ValueError):
    """Malformed input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = None if path is None else str(path)
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.reason = message


def guess_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "long-csv"
    if suffix == ".json":
        return "ragged-json"
    raise ParseError(f"cannot infer format from suffix {suffix!r}; pass one of {FORMATS}")


def _parse_float(text, line):
    try:
        x = float(text)
    except ValueError:
        raise ParseError(f"non-numeric value {text!r}", line) from None
    if not math.isfinite(x):
        raise ParseError(f"non-finite value {text!r}", line)
    return x


def parse_long_csv(text: str) -> Dataset:
    rows = csv.reader(text.splitlines())
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != ["t", "value"]:
        raise ParseError("header must be 't,value'", 1)
    samples: list[list[float]] = []
    for line, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", line)
        try:
            t = int(row[0])
        except ValueError:
            raise ParseError(f"time {row[0]!r} is not an integer", line) from None
        x = _parse_float(row[1], line)
        cur = len(samples)
        if t == cur and cur > 0:
            samples[-1].append(x)
        elif t == cur + 1:
            samples.append([x])
        elif t > cur + 1:
            raise ParseError(f"missing time {cur + 1}", line)
        else:
            raise ParseError(f"time {t} out of order after time {cur}", line)
    if not samples:
        raise ParseError("no observations")
    return Dataset(samples)


def parse_ragged_json(text: str) -> Dataset:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(raw, list) or not raw:
        raise ParseError("expected a non-empty array of arrays")
    samples = []
    for i, obs in enumerate(raw, start=1):
        if not isinstance(obs, list) or not obs:
            raise ParseError(f"time {i} must be a non-empty array")
        for x in obs:
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise ParseError(f"time {i} has a non-numeric value {x!r}")
        samples.append([float(x) for x in obs])
    return Dataset(samples)


def ingest(path, fmt: str | None = None) -> Dataset:
    """Read a dataset from ``path``; ``fmt`` defaults to the file suffix."""
    fmt = fmt or guess_format(path)
    text = Path(path).read_text()
    try:
        if fmt == "long-csv":
            return parse_long_csv(text)
        if fmt == "ragged-json":
            return parse_ragged_json(text)
    except ParseError as exc:
        exc.path = str(path)
        raise
    raise ParseError(f"unknown format {fmt!r}; choose from {FORMATS}")


def dumps(data: Dataset, fmt: str) -> str:
    if fmt == "long-csv":
        lines = ["t,value"]
        for t in range(1, data.T + 1):
            lines.extend(f"{t},{float(x)!r}" for x in data.at(t))
        return "\n".join(lines) + "\n"
    if fmt == "ragged-json":
        return json.dumps(data.samples()) + "\n"
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def emit(data: Dataset, path, fmt: str | None = None) -> None:
    """Write ``data`` so that :func:`ingest` reads back an equal dataset."""
    fmt = fmt or guess_format(path)
    Path(path).write_text(dumps(data, fmt))


def read_points(path) -> list[int]:
    """Change points from a JSON file.

    Accepts a bare array of integers or an object with a ``change_points``
    array (such as a ``detect`` report).
    """
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, path) from None
    if isinstance(raw, dict):
        raw = raw.get("change_points")
    if not isinstance(raw, list) or not all(
        isinstance(p, int) and not isinstance(p, bool) for p in raw
    ):
        raise ParseError("expected an array of integers or an object with 'change_points'", None, path)
    return sorted(set(raw))

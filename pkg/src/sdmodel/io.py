"""File formats: history CSVs, trajectory CSV/JSON, parameter files, run metadata.

CSV files use a comma separator, ``\\n`` line endings and no quoting (history
files may quote cells; they are read with the ``csv`` module).  Numbers
are written with 17 significant digits so every float64 survives a write/read
cycle bit for bit, and parsing accepts only dot-decimal literals regardless
of locale.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .engine import (
    SNAPSHOT_KEYS,
    STATE_KEYS,
    IndicatorSnapshot,
    LandAllocation,
    Record,
    SimulationState,
    Trajectory,
)
from .errors import (
    DuplicateYear,
    IngestError,
    MissingCell,
    MissingColumn,
    NonIncreasingYear,
    NonNumericCell,
    UnknownColumn,
)

HISTORY_COLUMNS = ("Y", "L", "K", "P", "PPFL", "POP", "LAND", "GREEN_LAND",
                   "C", "I", "G", "X", "M", "EU_GDPP_PPP")
DEFAULT_UNITS = {
    "year": "year", "Y": "currency/year", "L": "persons", "K": "capital-units",
    "P": "land-units", "PPFL": "persons/year", "POP": "persons", "LAND": "land-units",
    "GREEN_LAND": "land-units", "C": "currency/year", "I": "currency/year",
    "G": "currency/year", "X": "currency/year", "M": "currency/year",
    "EU_GDPP_PPP": "currency/person",
}
PRODUCTION_COLUMNS = ("Y", "L", "K", "P")
FLOW_COLUMNS = ("PPFL", "POP", "LAND", "GREEN_LAND")

_NUMBER = re.compile(r"[+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")


def format_number(x: float) -> str:
    return format(float(x), ".17g")


def parse_number(text: str, source: str, row: int, column: str) -> float:
    if not _NUMBER.fullmatch(text):
        raise NonNumericCell(source, row, column, text)
    return float(text)


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# -- history tables ---------------------------------------------------------

@dataclass(frozen=True)
class HistoryTable:
    years: tuple[float, ...]
    columns: dict[str, tuple[float, ...]]
    units: dict[str, str]

    def __len__(self) -> int:
        return len(self.years)

    def rows(self) -> list[dict[str, float]]:
        return [{"year": y, **{c: v[i] for c, v in self.columns.items()}}
                for i, y in enumerate(self.years)]


def _read_lines(path: Path) -> list[str]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"{path}: cannot read file ({exc.strerror})") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def ingest_history(path: str | Path, expected_columns: Iterable[str] = ()) -> HistoryTable:
    """Read a yearly history CSV.

    The header must start with ``year``.  An optional second row whose first
    cell is ``units`` labels the columns; missing labels fall back to
    ``DEFAULT_UNITS``.  Line numbers in errors are 1-based file lines.
    """
    path = Path(path)
    source = str(path)
    rows = list(csv.reader(_read_lines(path)))
    if not rows or not rows[0] or rows[0][0] != "year":
        raise MissingColumn(source, "year")
    header = rows[0]
    for pos, name in enumerate(header[1:], start=2):
        if name not in HISTORY_COLUMNS:
            raise UnknownColumn(source, name, pos)
    if len(set(header)) != len(header):
        dup = next(h for h in header if header.count(h) > 1)
        raise IngestError(f"{source}:1: column '{dup}' declared twice")
    for name in expected_columns:
        if name not in header:
            raise MissingColumn(source, name)

    units = {name: DEFAULT_UNITS[name] for name in header}
    body_start = 1
    if len(rows) > 1 and rows[1] and rows[1][0] == "units":
        for name, label in zip(header[1:], rows[1][1:]):
            if label:
                units[name] = label
        body_start = 2

    years: list[float] = []
    values: dict[str, list[float]] = {name: [] for name in header[1:]}
    for lineno, cells in enumerate(rows[body_start:], start=body_start + 1):
        if not any(c.strip() for c in cells):
            continue
        if len(cells) > len(header):
            raise IngestError(f"{source}:{lineno}: {len(cells)} cells for {len(header)} columns")
        cells = cells + [""] * (len(header) - len(cells))
        for name, cell in zip(header, cells):
            if cell.strip() == "":
                raise MissingCell(source, lineno, name)
        year = parse_number(cells[0], source, lineno, "year")
        if year in years:
            raise DuplicateYear(source, year, lineno)
        if years and year < years[-1]:
            raise NonIncreasingYear(source, year, lineno)
        years.append(year)
        for name, cell in zip(header[1:], cells[1:]):
            values[name].append(parse_number(cell, source, lineno, name))
    return HistoryTable(tuple(years), {k: tuple(v) for k, v in values.items()}, units)


# -- trajectories -----------------------------------------------------------

def trajectory_header(land_types: Sequence[str]) -> list[str]:
    return [*STATE_KEYS, *(f"land_{t}" for t in land_types), *SNAPSHOT_KEYS]


def _land_types(trajectory: Trajectory) -> list[str]:
    return list(trajectory[0].state.land.areas) if len(trajectory) else []


def trajectory_csv(trajectory: Trajectory) -> str:
    header = trajectory_header(_land_types(trajectory))
    lines = [",".join(header)]
    for row in trajectory.rows():
        lines.append(",".join(format_number(row[key]) for key in header))
    return "\n".join(lines) + "\n"


def trajectory_json(trajectory: Trajectory) -> str:
    header = trajectory_header(_land_types(trajectory))
    records = [{key: row[key] for key in header} for row in trajectory.rows()]
    return json.dumps(records, indent=2) + "\n"


def emit_trajectory(trajectory: Trajectory, fmt: str, path: str | Path) -> None:
    if fmt == "csv":
        text = trajectory_csv(trajectory)
    elif fmt == "json":
        text = trajectory_json(trajectory)
    else:
        raise ValueError(f"unknown trajectory format {fmt!r}")
    Path(path).write_text(text, encoding="utf-8", newline="")


def _rows_to_trajectory(rows: list[dict[str, float]], land_types: list[str]) -> Trajectory:
    records = []
    for row in rows:
        state = SimulationState(
            time=row["year"],
            population=row["population"],
            capital=row["capital"],
            land=LandAllocation({t: row[f"land_{t}"] for t in land_types}, ()),
            resource_stock=row["resource_stock"],
        )
        records.append(Record(state, IndicatorSnapshot(**{k: row[k] for k in SNAPSHOT_KEYS})))
    return Trajectory(tuple(records))


def _check_header(source: str, header: list[str]) -> list[str]:
    n_state = len(STATE_KEYS)
    n_snap = len(SNAPSHOT_KEYS)
    if len(header) < n_state + n_snap:
        missing = next(k for k in [*STATE_KEYS, *SNAPSHOT_KEYS] if k not in header)
        raise MissingColumn(source, missing)
    land = header[n_state:len(header) - n_snap]
    expected = trajectory_header([h[len("land_"):] for h in land])
    for pos, (got, want) in enumerate(zip(header, expected), start=1):
        if got != want:
            raise IngestError(f"{source}:1: column {pos} is '{got}', expected '{want}'")
    return [h[len("land_"):] for h in land]


def read_trajectory(path: str | Path, fmt: str | None = None) -> Trajectory:
    """Read back a trajectory written by :func:`emit_trajectory`."""
    path = Path(path)
    source = str(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    if fmt == "json":
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise IngestError(f"{source}: cannot read file ({exc.strerror})") from None
        except json.JSONDecodeError as exc:
            raise IngestError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(data, list):
            raise IngestError(f"{source}: expected a JSON array of records")
        if not data:
            return Trajectory()
        header = list(data[0]) if isinstance(data[0], dict) else []
        land = _check_header(source, header)
        rows = []
        for i, rec in enumerate(data):
            if not isinstance(rec, dict) or list(rec) != header:
                raise IngestError(f"{source}: record {i} does not match the first record's keys")
            for k, v in rec.items():
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise NonNumericCell(source, i, k, repr(v))
            rows.append({k: float(v) for k, v in rec.items()})
        return _rows_to_trajectory(rows, land)

    lines = _read_lines(path)
    if not lines:
        raise MissingColumn(source, "year")
    header = lines[0].split(",")
    land = _check_header(source, header)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise IngestError(f"{source}:{lineno}: {len(cells)} cells for {len(header)} columns")
        rows.append({k: parse_number(c, source, lineno, k) for k, c in zip(header, cells)})
    years = [r["year"] for r in rows]
    for i in range(1, len(years)):
        if years[i] == years[i - 1]:
            raise DuplicateYear(source, years[i], i + 2)
        if years[i] < years[i - 1]:
            raise NonIncreasingYear(source, years[i], i + 2)
    return _rows_to_trajectory(rows, land)


# -- run artifacts and parameter files --------------------------------------

def run_metadata(scenario_name: str, scenario_text: str, version: str,
                 timestamp: datetime | None = None) -> dict[str, Any]:
    timestamp = timestamp or datetime.now(timezone.utc)
    return {
        "scenario": scenario_name,
        "scenario_sha256": content_hash(scenario_text),
        "engine_version": version,
        "timestamp": timestamp.isoformat(timespec="seconds"),
    }


def write_json(path: str | Path, data: Any) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def write_table_csv(path: str | Path, rows: Sequence[Mapping[str, Any]]) -> None:
    if not rows:
        Path(path).write_text("", encoding="utf-8")
        return
    header = list(rows[0])
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for key in header:
            v = row[key]
            if isinstance(v, float):
                cells.append(format_number(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")

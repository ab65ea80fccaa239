"""CSV and JSON readers / writers for events, drivers, activations and fit reports.

Formats:
    events CSV       header ``time``; optional leading ``# duration: T`` line
    drivers CSV      header ``driver_id,time``; ascending within each id
    activations CSV  header ``time,value``
    fit report JSON  ``mu``, ``support``, ``drivers``, ``nll_history``, ``termination``, ``iterations_run``

CSV floats are written with 17 significant digits and JSON floats with their
round-trip repr, so a write/read cycle is exact.
"""
import csv
import json
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from dripp.exceptions import ArtifactIOError, DrippError, ParseError
from dripp.models.events import ActivationStream, Driver, EventSequence
from dripp.models.params import ModelParams
from dripp.models.report import FitReport

DURATION_PREFIX = "# duration:"


def format_float(value: float) -> str:
    return f"{value:.17g}"


def _open_rows(path: Path, columns: Sequence[str]) -> Tuple[Optional[float], Iterator[Tuple[int, dict]]]:
    """Read a CSV file, check its header and yield (line number, row) pairs."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise ArtifactIOError(f"cannot read {path}: {e}") from e

    duration = None
    start = 0
    if lines and lines[0].startswith(DURATION_PREFIX):
        duration = _parse_float(lines[0][len(DURATION_PREFIX):], path, 1, "duration")
        start = 1
    reader = csv.DictReader(lines[start:])
    header = reader.fieldnames or []
    for column in columns:
        if column not in header:
            raise ParseError(f"missing column '{column}' (header: {','.join(header)})",
                             path=path, line=start + 1, column=column)

    def rows():
        for offset, row in enumerate(reader):
            yield start + 2 + offset, row

    return duration, rows()


def _parse_float(text: Optional[str], path: Path, line: int, column: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"column '{column}' is not a number: {text!r}", path=path, line=line, column=column) from None
    if not math.isfinite(value):
        raise ParseError(f"column '{column}' is not finite: {text!r}", path=path, line=line, column=column)
    return value


def _check_ascending(times: List[float], lines: List[int], path: Path, what: str) -> None:
    for previous, current, line in zip(times, times[1:], lines[1:]):
        if current <= previous:
            raise ParseError(f"{what} timestamps must be strictly increasing ({current!r} after {previous!r})",
                             path=path, line=line)


def read_events(path, duration: Optional[float] = None) -> EventSequence:
    """Events CSV to EventSequence; T is the argument, else the file's duration line, else the last event."""
    path = Path(path)
    file_duration, rows = _open_rows(path, ["time"])
    times, lines = [], []
    for line, row in rows:
        times.append(_parse_float(row["time"], path, line, "time"))
        lines.append(line)
    _check_ascending(times, lines, path, "event")
    duration = duration if duration is not None else file_duration
    if duration is None:
        if not times:
            raise ParseError("cannot infer the duration of an empty events file", path=path)
        duration = times[-1]
    try:
        return EventSequence(events=times, duration=duration)
    except DrippError as e:
        raise ParseError(str(e), path=path) from None


def read_drivers(path) -> List[Driver]:
    """Drivers CSV to one Driver per id, ordered by id."""
    path = Path(path)
    _, rows = _open_rows(path, ["driver_id", "time"])
    times: Dict[str, List[float]] = defaultdict(list)
    lines: Dict[str, List[int]] = defaultdict(list)
    for line, row in rows:
        driver_id = (row["driver_id"] or "").strip()
        if not driver_id:
            raise ParseError("empty driver_id", path=path, line=line, column="driver_id")
        times[driver_id].append(_parse_float(row["time"], path, line, "time"))
        lines[driver_id].append(line)
    drivers = []
    for driver_id in sorted(times):
        _check_ascending(times[driver_id], lines[driver_id], path, f"driver {driver_id!r}")
        drivers.append(Driver(id=driver_id, events=times[driver_id]))
    return drivers


def read_activations(path) -> ActivationStream:
    """Activations CSV to ActivationStream labelled by the file stem."""
    path = Path(path)
    _, rows = _open_rows(path, ["time", "value"])
    times, values, lines = [], [], []
    for line, row in rows:
        times.append(_parse_float(row["time"], path, line, "time"))
        values.append(_parse_float(row["value"], path, line, "value"))
        lines.append(line)
        if values[-1] < 0:
            raise ParseError(f"negative activation value {values[-1]!r}", path=path, line=line, column="value")
    _check_ascending(times, lines, path, "activation")
    return ActivationStream(times=times, values=values, label=path.stem)


def _write_rows(path, header: Sequence[str], rows, comment: Optional[str] = None) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            if comment:
                f.write(comment + "\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    except OSError as e:
        raise ArtifactIOError(f"cannot write {path}: {e}") from e
    return path


def write_events(events: EventSequence, path) -> Path:
    return _write_rows(path, ["time"], ([float(t)] for t in events.events),
                       comment=f"{DURATION_PREFIX} {format_float(events.duration)}")


def write_drivers(drivers: Sequence[Driver], path) -> Path:
    rows = ([str(d.id), float(t)] for d in sorted(drivers, key=lambda d: str(d.id)) for t in d.events)
    return _write_rows(path, ["driver_id", "time"], rows)


def write_activations(stream: ActivationStream, path) -> Path:
    return _write_rows(path, ["time", "value"],
                       ([float(t), float(v)] for t, v in zip(stream.times, stream.values)))


def write_table(rows: Sequence[dict], columns: Sequence[str], path) -> Path:
    """Write dict rows as CSV with the given column order."""
    return _write_rows(path, columns, ([row.get(c, "") for c in columns] for row in rows))


def write_json(document: dict, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(document, indent=2) + "\n")
    except OSError as e:
        raise ArtifactIOError(f"cannot write {path}: {e}") from e
    return path


def write_fit_report(report: FitReport, path) -> Path:
    return write_json(report.to_dict(), path)


def _read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except OSError as e:
        raise ArtifactIOError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", path=path, line=e.lineno) from None


def read_fit_report(path) -> FitReport:
    return FitReport.from_dict(_read_json(path))


def read_params(path) -> ModelParams:
    """Model parameters from a fit report or a bare parameter document."""
    return ModelParams.from_dict(_read_json(path))

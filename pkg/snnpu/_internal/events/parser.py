"""
Event file codecs.

csv: one event per row, columns t,x,y,p; an optional header row is skipped.
bin: packed little-endian records, t u64 (us), x u16, y u16, p u8.
"""

from __future__ import annotations

import csv
import io
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from snnpu._internal.errors import EventBoundsError, EventFormatError
from snnpu._internal.events.schema import (
    EVENT_DTYPE,
    EventFileFormat,
    EventStream,
    SensorGeometry,
)

logger = logging.getLogger(__name__)

CSV_HEADER = ("t", "x", "y", "p")


def _parse_csv(text: str) -> np.ndarray:
    rows = []
    for number, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip():
            continue
        if number == 1 and tuple(c.strip().lower() for c in row) == CSV_HEADER:
            continue
        if len(row) != 4:
            raise EventFormatError(f"row {number}: expected 4 columns t,x,y,p, got {len(row)}")
        try:
            t, x, y, p = (int(c.strip()) for c in row)
        except ValueError:
            raise EventFormatError(f"row {number}: non-integer field in {row!r}") from None
        if t < 0 or x < 0 or y < 0:
            raise EventFormatError(f"row {number}: negative field in {row!r}")
        if p not in (0, 1):
            raise EventFormatError(f"row {number}: polarity must be 0 or 1, got {p}")
        rows.append((t, x, y, p))
    return np.array(rows, dtype=EVENT_DTYPE) if rows else np.zeros(0, dtype=EVENT_DTYPE)


def _parse_bin(data: bytes) -> np.ndarray:
    if len(data) % EVENT_DTYPE.itemsize:
        raise EventFormatError(
            f"{len(data)} bytes is not a whole number of {EVENT_DTYPE.itemsize}-byte records"
        )
    events = np.frombuffer(data, dtype=EVENT_DTYPE).copy()
    bad = np.flatnonzero(events["p"] > 1)
    if bad.size:
        raise EventFormatError(f"record {int(bad[0])}: polarity must be 0 or 1")
    return events


def check_bounds(events: np.ndarray, geometry: SensorGeometry) -> None:
    """Raise EventBoundsError on the first event outside the sensor."""
    bad = np.flatnonzero((events["x"] >= geometry.width) | (events["y"] >= geometry.height))
    if bad.size:
        e = events[int(bad[0])]
        raise EventBoundsError(
            f"event {int(bad[0])} at x={int(e['x'])}, y={int(e['y'])} outside "
            f"{geometry.width}x{geometry.height} sensor"
        )


def parse_event_stream(
    data: Union[bytes, str],
    format: EventFileFormat = "csv",
    geometry: SensorGeometry = SensorGeometry(),
) -> EventStream:
    """
    Decode an event file into a time-sorted stream.

    Out-of-order timestamps are fixed with a stable sort, so events sharing
    a timestamp keep their file order.

    Raises:
        EventFormatError: malformed row or record.
        EventBoundsError: coordinate outside the sensor.
    """
    if format == "csv":
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        events = _parse_csv(text)
    elif format == "bin":
        events = _parse_bin(data.encode("latin-1") if isinstance(data, str) else data)
    else:
        raise EventFormatError(f"unknown event format {format!r}")

    check_bounds(events, geometry)
    if events.size > 1 and np.any(np.diff(events["t"].astype(np.int64)) < 0):
        logger.debug("sorting %d out-of-order events", events.size)
        events = events[np.argsort(events["t"], kind="stable")]
    return EventStream(geometry=geometry, events=events)


def encode_event_stream(stream: EventStream, format: EventFileFormat = "csv") -> bytes:
    """Encode a stream in one of the event file formats."""
    if format == "bin":
        return np.ascontiguousarray(stream.events, dtype=EVENT_DTYPE).tobytes()
    if format != "csv":
        raise EventFormatError(f"unknown event format {format!r}")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(stream.events.tolist())
    return out.getvalue().encode("utf-8")


def infer_event_format(path: Union[str, Path]) -> EventFileFormat:
    return "csv" if Path(path).suffix.lower() in (".csv", ".txt") else "bin"


def load_event_file(
    path: Union[str, Path],
    geometry: SensorGeometry = SensorGeometry(),
    format: Optional[EventFileFormat] = None,
) -> EventStream:
    """
    Read an event file; the format follows the suffix unless given.

    Raises:
        FileNotFoundError: if the file does not exist.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Event file not found: {path}")
    return parse_event_stream(path.read_bytes(), format or infer_event_format(path), geometry)


def write_event_file(
    stream: EventStream, path: Union[str, Path], format: Optional[EventFileFormat] = None
) -> str:
    path = Path(path)
    path.write_bytes(encode_event_stream(stream, format or infer_event_format(path)))
    return str(path)

"""
Event Schema - camera events, windows, frames and spike lists

Design rules:
- Events are kept as a numpy structured array, never as per-event objects
- Frame channel order is fixed: 0 = negative polarity, 1 = positive
- Spike lists are sorted by (channel, y, x)
"""

from __future__ import annotations

from typing import Iterator, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from snnpu._internal.errors import EngineInputError, NonBinaryFrameError


EVENT_DTYPE = np.dtype([("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "u1")])

NEGATIVE = 0
POSITIVE = 1

AccumulationMode = Literal["binary", "sum"]
EventFileFormat = Literal["csv", "bin"]


class SensorGeometry(BaseModel):
    """Pixel grid of the event camera."""
    model_config = ConfigDict(frozen=True)

    width: int = Field(default=240, ge=1)
    height: int = Field(default=304, ge=1)

    @property
    def frame_shape(self) -> tuple[int, int, int]:
        return (2, self.height, self.width)


class EventRecord(BaseModel):
    """One camera event: timestamp in microseconds, pixel and polarity."""
    model_config = ConfigDict(frozen=True)

    t: int = Field(ge=0)
    x: int = Field(ge=0)
    y: int = Field(ge=0)
    p: Literal[0, 1]


def empty_events() -> np.ndarray:
    return np.zeros(0, dtype=EVENT_DTYPE)


class EventStream(BaseModel):
    """A time-sorted event sequence on a sensor."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    geometry: SensorGeometry = SensorGeometry()
    events: np.ndarray = Field(default_factory=empty_events)

    def __len__(self) -> int:
        return int(self.events.size)

    def __iter__(self) -> Iterator[EventRecord]:  # type: ignore[override]
        for t, x, y, p in self.events.tolist():
            yield EventRecord(t=t, x=x, y=y, p=p)

    @property
    def duration_us(self) -> int:
        if not self.events.size:
            return 0
        return int(self.events["t"][-1]) + 1

    @classmethod
    def from_records(
        cls, records: list[EventRecord], geometry: SensorGeometry = SensorGeometry()
    ) -> "EventStream":
        events = np.array([(r.t, r.x, r.y, r.p) for r in records], dtype=EVENT_DTYPE)
        return cls(geometry=geometry, events=events)


class EventWindow(BaseModel):
    """Events with t in [start_us, end_us)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    index: int
    start_us: int
    end_us: int
    events: np.ndarray

    def __len__(self) -> int:
        return int(self.events.size)


class EventFrame(BaseModel):
    """
    Dense 2-channel accumulation of one window, shape (2, H, W).

    Binary frames hold presence flags; sum frames hold exact counts.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    mode: AccumulationMode = "binary"
    window_index: int = 0

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(self.values.shape)  # type: ignore[return-value]

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.values == 0) | (self.values == 1)))

    @property
    def active(self) -> int:
        return int(np.count_nonzero(self.values))


class SpikeList(BaseModel):
    """
    Sparse spike coordinates of one timestep.

    entries is an (N, 3) int array of (channel, y, x), sorted, no duplicates.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    timestep: int = 0
    shape: tuple[int, int, int]
    entries: np.ndarray

    @model_validator(mode="after")
    def _check_entries(self) -> "SpikeList":
        e = self.entries
        if min(self.shape) < 1:
            raise EngineInputError(f"spike list shape {self.shape} must be positive")
        if e.ndim != 2 or e.shape[1] != 3:
            raise EngineInputError(f"spike entries must be (N, 3), got shape {e.shape}")
        if not len(e):
            return self
        if not np.issubdtype(e.dtype, np.integer):
            raise EngineInputError(f"spike entries must be integers, got {e.dtype}")
        if np.any(e < 0) or np.any(e >= np.array(self.shape)):
            raise EngineInputError("spike coordinates outside the frame")
        flat = np.ravel_multi_index(e.T, self.shape)
        if np.unique(flat).size != flat.size:
            raise NonBinaryFrameError("duplicate spike coordinates")
        if np.any(np.diff(flat) < 0):
            raise EngineInputError("spike entries must be sorted by (channel, y, x)")
        return self

    def __len__(self) -> int:
        return int(self.entries.shape[0])

    @property
    def density(self) -> float:
        c, h, w = self.shape
        return len(self) / float(c * h * w)


class WindowStats(BaseModel):
    """Per-window ingest metrics."""
    model_config = ConfigDict(frozen=True)

    index: int
    start_us: int
    events: int
    active_pixels: int

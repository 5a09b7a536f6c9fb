"""
Windowing, frame accumulation and sparse spike encoding.
"""

from __future__ import annotations

import csv
import io
from typing import Optional, Union

import numpy as np

from snnpu._internal.errors import EngineInputError, NonBinaryFrameError
from snnpu._internal.events.parser import check_bounds
from snnpu._internal.events.schema import (
    AccumulationMode,
    EventFrame,
    EventStream,
    EventWindow,
    SensorGeometry,
    SpikeList,
    WindowStats,
)


def window_events(
    events: Union[EventStream, np.ndarray],
    window_us: int,
    duration_us: Optional[int] = None,
) -> list[EventWindow]:
    """
    Partition time-sorted events into half-open windows [k*w, (k+1)*w).

    Windows are counted from t = 0. Empty windows between events are kept,
    as is the trailing partial window. With duration_us, the window count
    is ceil(duration_us / window_us) even when the tail has no events.
    """
    if window_us < 1:
        raise ValueError(f"window_us must be >= 1, got {window_us}")
    array = events.events if isinstance(events, EventStream) else events
    t = array["t"]
    count = int(t[-1]) // window_us + 1 if t.size else 0
    if duration_us is not None:
        count = max(count, -(-int(duration_us) // window_us))

    bounds = np.arange(count + 1, dtype=np.uint64) * np.uint64(window_us)
    cuts = np.searchsorted(t, bounds, side="left")
    return [
        EventWindow(
            index=k,
            start_us=k * window_us,
            end_us=(k + 1) * window_us,
            events=array[cuts[k]:cuts[k + 1]],
        )
        for k in range(count)
    ]


def accumulate_frame(
    group: Union[EventWindow, np.ndarray],
    mode: AccumulationMode = "binary",
    geometry: SensorGeometry = SensorGeometry(),
) -> EventFrame:
    """
    Accumulate a window into a (2, H, W) frame.

    sum mode counts events per (p, y, x); binary mode keeps presence flags.
    """
    array = group.events if isinstance(group, EventWindow) else group
    index = group.index if isinstance(group, EventWindow) else 0
    check_bounds(array, geometry)
    values = np.zeros(geometry.frame_shape, dtype=np.int32)
    np.add.at(
        values,
        (array["p"].astype(np.intp), array["y"].astype(np.intp), array["x"].astype(np.intp)),
        1,
    )
    if mode == "binary":
        np.minimum(values, 1, out=values)
    elif mode != "sum":
        raise ValueError(f"unknown accumulation mode {mode!r}")
    return EventFrame(values=values, mode=mode, window_index=index)


def binarize(frame: EventFrame) -> EventFrame:
    """min(values, 1) elementwise."""
    return EventFrame(
        values=np.minimum(frame.values, 1).astype(np.int32),
        mode="binary",
        window_index=frame.window_index,
    )


def frame_to_spikelist(
    frame: Union[EventFrame, np.ndarray],
    timestep: Optional[int] = None,
    binarize_counts: bool = False,
) -> SpikeList:
    """
    Sorted (channel, y, x) coordinates of the nonzero entries of a frame.

    Raises:
        NonBinaryFrameError: a value other than 0/1, unless binarize_counts.
    """
    if isinstance(frame, EventFrame):
        values = frame.values
        step = frame.window_index if timestep is None else timestep
    else:
        values = np.asarray(frame)
        step = 0 if timestep is None else timestep
    if values.ndim != 3:
        raise EngineInputError(f"frames must be (C, H, W), got shape {values.shape}")
    if not binarize_counts and np.any((values != 0) & (values != 1)):
        raise NonBinaryFrameError(
            "frame holds values other than 0/1; binarize it or use binary accumulation"
        )
    entries = np.argwhere(values != 0).astype(np.int64)
    return SpikeList(timestep=step, shape=tuple(values.shape), entries=entries)


def densify(spikes: SpikeList) -> np.ndarray:
    """Dense (C, H, W) binary array of a spike list."""
    values = np.zeros(spikes.shape, dtype=np.int32)
    if len(spikes):
        e = spikes.entries
        values[e[:, 0], e[:, 1], e[:, 2]] = 1
    return values


def stream_to_frames(
    stream: EventStream,
    window_us: int,
    mode: AccumulationMode = "binary",
    duration_us: Optional[int] = None,
) -> list[EventFrame]:
    return [
        accumulate_frame(w, mode, stream.geometry)
        for w in window_events(stream, window_us, duration_us)
    ]


def window_stats(windows: list[EventWindow], geometry: SensorGeometry) -> list[WindowStats]:
    """Event count and distinct active (p, y, x) sites per window."""
    stats = []
    for w in windows:
        frame = accumulate_frame(w, "binary", geometry)
        stats.append(
            WindowStats(index=w.index, start_us=w.start_us, events=len(w), active_pixels=frame.active)
        )
    return stats


def window_stats_csv(stats: list[WindowStats]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["window", "start_us", "events", "active_pixels"])
    for s in stats:
        writer.writerow([s.index, s.start_us, s.events, s.active_pixels])
    return out.getvalue()

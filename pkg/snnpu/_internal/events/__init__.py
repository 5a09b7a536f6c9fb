"""
Events - camera event parsing, windowing, frames and spike lists.
"""

from snnpu._internal.events.schema import (
    EVENT_DTYPE,
    NEGATIVE,
    POSITIVE,
    EventFrame,
    EventRecord,
    EventStream,
    EventWindow,
    SensorGeometry,
    SpikeList,
    WindowStats,
)
from snnpu._internal.events.parser import (
    encode_event_stream,
    load_event_file,
    parse_event_stream,
    write_event_file,
)
from snnpu._internal.events.frames import (
    accumulate_frame,
    binarize,
    densify,
    frame_to_spikelist,
    stream_to_frames,
    window_events,
    window_stats,
    window_stats_csv,
)
from snnpu._internal.events.synthetic import synthetic_event_stream

__all__ = [
    "EVENT_DTYPE",
    "NEGATIVE",
    "POSITIVE",
    "EventFrame",
    "EventRecord",
    "EventStream",
    "EventWindow",
    "SensorGeometry",
    "SpikeList",
    "WindowStats",
    "encode_event_stream",
    "load_event_file",
    "parse_event_stream",
    "write_event_file",
    "accumulate_frame",
    "binarize",
    "densify",
    "frame_to_spikelist",
    "stream_to_frames",
    "window_events",
    "window_stats",
    "window_stats_csv",
    "synthetic_event_stream",
]

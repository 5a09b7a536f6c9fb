"""
Synthetic event streams for desk-scale runs.

Half of the events follow a blob drifting across the sensor, the rest is
uniform background activity.
"""

from __future__ import annotations

import numpy as np

from snnpu._internal.events.schema import EVENT_DTYPE, EventStream, SensorGeometry


def synthetic_event_stream(
    geometry: SensorGeometry = SensorGeometry(),
    duration_us: int = 1_000_000,
    rate_hz: float = 50_000.0,
    seed: int = 0,
    blob_fraction: float = 0.5,
    blob_radius: float = 8.0,
) -> EventStream:
    """Poisson event stream over [0, duration_us), time sorted."""
    if duration_us < 0 or rate_hz < 0:
        raise ValueError("duration_us and rate_hz must be >= 0")
    rng = np.random.default_rng(seed)
    count = int(rng.poisson(rate_hz * duration_us / 1e6))
    t = np.sort(rng.integers(0, max(duration_us, 1), size=count, dtype=np.int64))

    # blob center sweeps left to right, bouncing vertically
    phase = t / max(duration_us, 1)
    cx = phase * (geometry.width - 1)
    cy = (geometry.height - 1) * (0.5 + 0.4 * np.sin(2 * np.pi * phase))
    in_blob = rng.random(count) < blob_fraction
    x = np.where(
        in_blob,
        cx + rng.normal(0.0, blob_radius, count),
        rng.uniform(0, geometry.width, count),
    )
    y = np.where(
        in_blob,
        cy + rng.normal(0.0, blob_radius, count),
        rng.uniform(0, geometry.height, count),
    )

    events = np.zeros(count, dtype=EVENT_DTYPE)
    events["t"] = t
    events["x"] = np.clip(np.floor(x), 0, geometry.width - 1).astype(np.uint16)
    events["y"] = np.clip(np.floor(y), 0, geometry.height - 1).astype(np.uint16)
    events["p"] = rng.integers(0, 2, size=count).astype(np.uint8)
    return EventStream(geometry=geometry, events=events)

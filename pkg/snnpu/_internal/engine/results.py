"""
Engine Results - spike counts, feature maps, traces and derived metrics

Design rules:
- Results are immutable once a run completes
- Feature maps are binary (uint8) in display shape, (C, H, W) or (C, L)
- Trace rows are in emission order: timestep, then receiving layer, then
  raster order of the incoming spikes
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from snnpu._internal.errors import EngineInputError, TimestepOutOfRangeError
from snnpu._internal.model.schema import ModelStats


def activity(total_spikes: int, neurons: int, timesteps: int = 1) -> float:
    """Emitted spikes over (spiking neurons x timesteps), in percent."""
    if neurons <= 0 or timesteps <= 0:
        raise EngineInputError("activity needs positive neuron and timestep counts")
    return 100.0 * total_spikes / (neurons * timesteps)


def _renumber(rows: np.ndarray, t: int) -> np.ndarray:
    out = rows.astype(np.int64).reshape(-1, 4).copy()
    out[:, 0] = t
    return out


class SpikeTrace(BaseModel):
    """
    Ordered log of spikes delivered to layers, with their scatter work.

    Row i: at `timestep`, `layer` received a spike at input coordinate
    (`channel`, `y`, `x`) which caused `updates` membrane updates.
    `emitted[t, l]` counts spikes fired by layer l at timestep t.
    `output` holds the (timestep, channel, y, x) spikes fired by the last
    layer, which no layer receives.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    network: str
    timesteps: int
    layer_neurons: tuple[int, ...]
    timestep: np.ndarray
    layer: np.ndarray
    channel: np.ndarray
    y: np.ndarray
    x: np.ndarray
    updates: np.ndarray
    emitted: np.ndarray
    output: np.ndarray = Field(default_factory=lambda: np.zeros((0, 4), dtype=np.int64))

    def __len__(self) -> int:
        return int(self.timestep.size)

    @property
    def layers(self) -> int:
        return len(self.layer_neurons)

    @property
    def total_updates(self) -> int:
        return int(self.updates.sum())

    def layer_updates(self) -> np.ndarray:
        """Total membrane updates per receiving layer."""
        return np.bincount(self.layer, weights=self.updates, minlength=self.layers).astype(np.int64)

    def layer_spikes_in(self) -> np.ndarray:
        return np.bincount(self.layer, minlength=self.layers).astype(np.int64)

    def emissions(self, layer: int) -> np.ndarray:
        """(timestep, channel, y, x) rows of the spikes fired by a layer."""
        if not 0 <= layer < self.layers:
            raise EngineInputError(f"layer {layer} outside 0..{self.layers - 1}")
        if layer == self.layers - 1:
            return self.output
        mask = self.layer == layer + 1
        return np.column_stack(
            [self.timestep[mask], self.channel[mask], self.y[mask], self.x[mask]]
        ).astype(np.int64)

    @classmethod
    def concatenate(cls, network: str, layer_neurons: tuple[int, ...], parts: list["SpikeTrace"]) -> "SpikeTrace":
        """Join per-timestep traces; timesteps are renumbered in order."""
        if not parts:
            return cls.empty(network, layer_neurons)
        steps = [np.full(len(p), t, dtype=np.int64) for t, p in enumerate(parts)]
        return cls(
            network=network,
            timesteps=len(parts),
            layer_neurons=layer_neurons,
            timestep=np.concatenate(steps),
            layer=np.concatenate([p.layer for p in parts]),
            channel=np.concatenate([p.channel for p in parts]),
            y=np.concatenate([p.y for p in parts]),
            x=np.concatenate([p.x for p in parts]),
            updates=np.concatenate([p.updates for p in parts]),
            emitted=np.concatenate([p.emitted for p in parts]),
            output=np.concatenate([_renumber(p.output, t) for t, p in enumerate(parts)]),
        )

    @classmethod
    def empty(cls, network: str, layer_neurons: tuple[int, ...], timesteps: int = 0) -> "SpikeTrace":
        z = np.zeros(0, dtype=np.int64)
        return cls(
            network=network,
            timesteps=timesteps,
            layer_neurons=layer_neurons,
            timestep=z, layer=z, channel=z, y=z, x=z, updates=z,
            emitted=np.zeros((timesteps, len(layer_neurons)), dtype=np.int64),
        )


class StepOutput(BaseModel):
    """Outcome of one timestep of an inference context."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    timestep: int
    spike_counts: np.ndarray
    spike_maps: list[np.ndarray]
    feature_maps: list[np.ndarray]
    trace: Optional[SpikeTrace] = None

    @property
    def total_spikes(self) -> int:
        return int(self.spike_counts.sum())


class WindowMetrics(BaseModel):
    """Per-timestep (per event window) spike metrics."""
    model_config = ConfigDict(frozen=True)

    index: int
    spikes: int
    activity_percent: float
    extract_spikes: list[int] = Field(default_factory=list)


class RunResult(BaseModel):
    """
    Outcome of a complete run.

    spike_counts is (T, L). feature_maps[t][k] is the binary map of the
    k-th extraction layer at timestep t. spike_maps, when recorded, holds
    every layer's binary output per timestep.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    network: str
    engine: Literal["dense", "event"]
    arithmetic: Literal["real", "fixed"]
    layer_neurons: tuple[int, ...]
    extract_indices: tuple[int, ...]
    spike_counts: np.ndarray
    feature_maps: list[list[np.ndarray]]
    final_potentials: list[np.ndarray]
    saturations: int = 0
    spike_maps: Optional[list[list[np.ndarray]]] = None

    @property
    def timesteps(self) -> int:
        return int(self.spike_counts.shape[0])

    @property
    def total_spikes(self) -> int:
        return int(self.spike_counts.sum())

    @property
    def neurons(self) -> int:
        return int(sum(self.layer_neurons))

    def layer_totals(self) -> np.ndarray:
        return self.spike_counts.sum(axis=0)

    def activity(self, stats: Optional[ModelStats] = None) -> float:
        """Activity in percent over the whole run."""
        neurons = stats.neurons if stats is not None else self.neurons
        return activity(self.total_spikes, neurons, max(self.timesteps, 1))

    def spikes_per_output(self, timesteps_per_output: int = 1) -> float:
        outputs = max(1, -(-self.timesteps // timesteps_per_output))
        return self.total_spikes / outputs

    def window_metrics(self) -> list[WindowMetrics]:
        return [
            WindowMetrics(
                index=t,
                spikes=int(row.sum()),
                activity_percent=activity(int(row.sum()), self.neurons, 1),
                extract_spikes=[int(row[i]) for i in self.extract_indices],
            )
            for t, row in enumerate(self.spike_counts)
        ]


def extract_features(result: RunResult, timestep: int) -> list[np.ndarray]:
    """
    Feature maps of one timestep, dequantized to 0.0 / 1.0.

    Raises:
        TimestepOutOfRangeError: timestep outside [0, T).
    """
    if not 0 <= timestep < result.timesteps:
        raise TimestepOutOfRangeError(
            f"timestep {timestep} outside run of {result.timesteps} timesteps"
        )
    return [m.astype(np.float64) for m in result.feature_maps[timestep]]


class LayerDivergence(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    real_spikes: int
    fixed_spikes: int

    @property
    def delta(self) -> int:
        return self.fixed_spikes - self.real_spikes


class DivergenceReport(BaseModel):
    """Spike-count difference between a real and a fixed-point run."""
    model_config = ConfigDict(frozen=True)

    layers: list[LayerDivergence]

    @property
    def real_total(self) -> int:
        return sum(d.real_spikes for d in self.layers)

    @property
    def fixed_total(self) -> int:
        return sum(d.fixed_spikes for d in self.layers)

    @property
    def delta(self) -> int:
        return self.fixed_total - self.real_total

    @property
    def relative_delta(self) -> float:
        return self.delta / self.real_total if self.real_total else 0.0


def divergence_report(real: RunResult, fixed: RunResult) -> DivergenceReport:
    """Per-layer spike-count deltas of two runs over the same network and input."""
    if real.layer_neurons != fixed.layer_neurons:
        raise EngineInputError("runs are not over the same network")
    real_totals, fixed_totals = real.layer_totals(), fixed.layer_totals()
    return DivergenceReport(
        layers=[
            LayerDivergence(index=i, real_spikes=int(r), fixed_spikes=int(f))
            for i, (r, f) in enumerate(zip(real_totals, fixed_totals))
        ]
    )

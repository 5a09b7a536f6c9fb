"""
Inference Context - persistent membrane state across frames of a clip

Design rules:
- One context per clip (or per server connection); single-threaded
- Potentials persist across step() calls and are zeroed only by reset()
- Every timestep has two phases: charge (dense conv or spike scatter into
  an accumulator), then the barrier (bias, neuron step, fire, reset)
"""

from __future__ import annotations

import logging
from typing import Literal, Optional, Union

import numpy as np

from snnpu._internal.engine.ops import conv_dense, overlap_counts, scatter_spikes
from snnpu._internal.engine.prepared import Arithmetic, PreparedLayer, prepare_network
from snnpu._internal.engine.results import SpikeTrace, StepOutput
from snnpu._internal.errors import EngineConfigurationError, EngineInputError
from snnpu._internal.events.frames import densify, frame_to_spikelist
from snnpu._internal.events.schema import EventFrame, SpikeList
from snnpu._internal.fixedpoint import SaturationCounter
from snnpu._internal.model.schema import NetworkSpec

logger = logging.getLogger(__name__)

EngineKind = Literal["dense", "event"]
FrameInput = Union[EventFrame, SpikeList, np.ndarray]


class InferenceContext:
    """
    Runs a network one timestep at a time.

    The dense engine evaluates full convolutions; the event engine scatters
    each incoming spike into the receiving layer and records a trace. The
    event engine requires fixed-point arithmetic.
    """

    def __init__(
        self,
        spec: NetworkSpec,
        engine: EngineKind = "dense",
        arithmetic: Arithmetic = "fixed",
    ):
        if engine not in ("dense", "event"):
            raise EngineConfigurationError(f"unknown engine {engine!r}")
        if engine == "event" and arithmetic != "fixed":
            raise EngineConfigurationError(
                "the event-driven engine runs in fixed-point arithmetic only"
            )
        self.spec = spec
        self.engine = engine
        self.arithmetic = arithmetic
        self.counter = SaturationCounter()
        self.layers: list[PreparedLayer] = prepare_network(spec, arithmetic, self.counter)
        self.input_shape = spec.input_shape_3d
        self.extract_indices = tuple(spec.extract_indices)
        self.potentials: list[np.ndarray] = []
        self.timestep = 0
        self.reset()

    @property
    def layer_neurons(self) -> tuple[int, ...]:
        return tuple(layer.geometry.neurons for layer in self.layers)

    def reset(self) -> None:
        """Zero every membrane potential and restart the timestep count."""
        self.potentials = [layer.zero_potentials() for layer in self.layers]
        self.timestep = 0

    def display_shape(self, shape: tuple[int, int, int]) -> tuple[int, ...]:
        return (shape[0], shape[2]) if self.spec.is_1d else shape

    # -------------------------------------------------------------------------
    # Input normalization
    # -------------------------------------------------------------------------

    def _as_dense(self, frame: FrameInput) -> np.ndarray:
        if isinstance(frame, SpikeList):
            values = densify(frame)
        elif isinstance(frame, EventFrame):
            values = frame.values
        else:
            values = np.asarray(frame)
        if self.spec.is_1d and values.ndim == 2:
            values = values[:, None, :]
        if tuple(values.shape) != self.input_shape:
            raise EngineInputError(
                f"frame shape {tuple(values.shape)} does not match network input "
                f"{self.spec.input_shape}"
            )
        if np.any(values < 0):
            raise EngineInputError("frames must be nonnegative")
        return values

    def _as_spikes(self, frame: FrameInput) -> np.ndarray:
        if isinstance(frame, SpikeList):
            if tuple(frame.shape) != self.input_shape:
                raise EngineInputError(
                    f"spike list shape {frame.shape} does not match network input "
                    f"{self.spec.input_shape}"
                )
            return frame.entries.astype(np.int64)
        # frame_to_spikelist rejects non-binary values
        return frame_to_spikelist(self._as_dense(frame)).entries.astype(np.int64)

    # -------------------------------------------------------------------------
    # Stepping
    # -------------------------------------------------------------------------

    def step(self, frame: FrameInput) -> StepOutput:
        """Advance one timestep with one input frame."""
        if self.engine == "event":
            output = self._step_event(self._as_spikes(frame))
        else:
            output = self._step_dense(self._as_dense(frame))
        logger.debug(
            "%s t=%d spikes=%d", self.spec.name, output.timestep, output.total_spikes
        )
        self.timestep += 1
        return output

    def _charge_dense(self, layer: PreparedLayer, x: np.ndarray) -> np.ndarray:
        if layer.is_fixed:
            dtype = layer.weight_format.array_dtype
            return conv_dense(np.asarray(x, dtype=dtype), layer.weight, layer.geometry)
        x = np.asarray(x, dtype=np.float64)
        if layer.bn_scale is not None:
            # BN normalizes the layer input before its zero padding
            x = x * layer.bn_scale[:, None, None] + layer.bn_shift[:, None, None]
        return conv_dense(x, layer.weight, layer.geometry)

    def _step_dense(self, x: np.ndarray) -> StepOutput:
        counts = np.zeros(len(self.layers), dtype=np.int64)
        spike_maps = []
        for i, layer in enumerate(self.layers):
            acc = self._charge_dense(layer, x)
            fired, self.potentials[i] = layer.fire(self.potentials[i], acc, self.counter)
            counts[i] = int(np.count_nonzero(fired))
            spike_maps.append(fired)
            x = fired.astype(np.int64)
        return self._output(counts, spike_maps, None)

    def _step_event(self, entries: np.ndarray) -> StepOutput:
        counts = np.zeros(len(self.layers), dtype=np.int64)
        spike_maps = []
        rows: list[tuple[int, np.ndarray, np.ndarray]] = []
        for i, layer in enumerate(self.layers):
            acc = layer.zero_accumulator()
            updates = overlap_counts(layer, entries)
            scatter_spikes(layer, entries, acc)
            rows.append((i, entries, updates))
            fired, self.potentials[i] = layer.fire(self.potentials[i], acc, self.counter)
            counts[i] = int(np.count_nonzero(fired))
            spike_maps.append(fired)
            entries = np.argwhere(fired).astype(np.int64)

        trace = SpikeTrace(
            network=self.spec.name,
            timesteps=1,
            layer_neurons=self.layer_neurons,
            timestep=np.zeros(sum(len(e) for _, e, _ in rows), dtype=np.int64),
            layer=np.concatenate([np.full(len(e), i, dtype=np.int64) for i, e, _ in rows]),
            channel=np.concatenate([e[:, 0] for _, e, _ in rows]),
            y=np.concatenate([e[:, 1] for _, e, _ in rows]),
            x=np.concatenate([e[:, 2] for _, e, _ in rows]),
            updates=np.concatenate([u for _, _, u in rows]),
            emitted=counts[None, :].copy(),
            output=np.column_stack([np.zeros(len(entries), dtype=np.int64), entries]),
        )
        return self._output(counts, spike_maps, trace)

    def _output(
        self,
        counts: np.ndarray,
        spike_maps: list[np.ndarray],
        trace: Optional[SpikeTrace],
    ) -> StepOutput:
        features = [
            spike_maps[i].astype(np.uint8).reshape(self.display_shape(spike_maps[i].shape))
            for i in self.extract_indices
        ]
        return StepOutput(
            timestep=self.timestep,
            spike_counts=counts,
            spike_maps=spike_maps,
            feature_maps=features,
            trace=trace,
        )

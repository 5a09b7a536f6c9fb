"""
Whole-clip runs of the dense and event-driven engines.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from snnpu._internal.engine.context import EngineKind, FrameInput, InferenceContext
from snnpu._internal.engine.prepared import Arithmetic
from snnpu._internal.engine.results import RunResult, SpikeTrace, StepOutput
from snnpu._internal.model.schema import NetworkSpec

logger = logging.getLogger(__name__)


def _collect(
    ctx: InferenceContext, outputs: list[StepOutput], record_spikes: bool
) -> RunResult:
    counts = (
        np.stack([o.spike_counts for o in outputs])
        if outputs
        else np.zeros((0, len(ctx.layers)), dtype=np.int64)
    )
    return RunResult(
        network=ctx.spec.name,
        engine=ctx.engine,
        arithmetic=ctx.arithmetic,
        layer_neurons=ctx.layer_neurons,
        extract_indices=ctx.extract_indices,
        spike_counts=counts,
        feature_maps=[o.feature_maps for o in outputs],
        final_potentials=[v.copy() for v in ctx.potentials],
        saturations=ctx.counter.count,
        spike_maps=[o.spike_maps for o in outputs] if record_spikes else None,
    )


def run_clip(
    spec: NetworkSpec,
    frames: Sequence[FrameInput],
    engine: EngineKind = "dense",
    arithmetic: Arithmetic = "fixed",
    record_spikes: bool = False,
) -> tuple[RunResult, SpikeTrace | None]:
    """Run one clip from zeroed potentials; the trace is None for dense runs."""
    ctx = InferenceContext(spec, engine=engine, arithmetic=arithmetic)
    outputs = [ctx.step(frame) for frame in frames]
    result = _collect(ctx, outputs, record_spikes)
    if result.saturations:
        logger.warning("%s: %d saturated values during the run", spec.name, result.saturations)
    logger.info(
        "%s %s/%s: %d timesteps, %d spikes",
        spec.name, engine, arithmetic, result.timesteps, result.total_spikes,
    )
    if engine != "event":
        return result, None
    trace = SpikeTrace.concatenate(
        spec.name, ctx.layer_neurons, [o.trace for o in outputs if o.trace is not None]
    )
    return result, trace


def run_dense(
    spec: NetworkSpec,
    frames: Sequence[FrameInput],
    arithmetic: Arithmetic = "fixed",
    record_spikes: bool = False,
) -> RunResult:
    """
    Timestep-synchronous reference run: every layer convolves its full input.

    Raises:
        EngineInputError: frame shape mismatch.
        UnfusedBatchNormError: fixed arithmetic on a network with BN.
    """
    result, _ = run_clip(spec, frames, "dense", arithmetic, record_spikes)
    return result


def run_event_driven(
    spec: NetworkSpec,
    spikelists: Sequence[FrameInput],
    arithmetic: Arithmetic = "fixed",
    record_spikes: bool = False,
) -> tuple[RunResult, SpikeTrace]:
    """
    Event-driven run: each layer scatters its incoming spikes one by one.

    Equals run_dense(spec, frames, "fixed") bit for bit.

    Raises:
        EngineConfigurationError: arithmetic other than fixed.
        NonBinaryFrameError: non-binary input frame.
    """
    result, trace = run_clip(spec, spikelists, "event", arithmetic, record_spikes)
    assert trace is not None
    return result, trace

"""
Pipeline Latency Model - discrete-event simulation of one NPU stage per layer

Each layer is a stage with an unbounded FIFO. The source feeds stage 0 the
input spikes of a timestep followed by a barrier marker. A stage serves a
spike in (updates * cycles_per_update + cycles_per_spike_overhead) / npus
cycles and a barrier in neurons * cycles_per_fire / npus cycles; after a
barrier it forwards the spikes it fired, then its own barrier, to the next
stage. Stages run concurrently, so consecutive timesteps overlap across
layers. Simulation time is in clock cycles.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Union

import numpy as np
import simpy

from snnpu._internal.engine.results import SpikeTrace
from snnpu._internal.errors import CalibrationError, TraceMismatchError
from snnpu._internal.model.schema import NetworkSpec
from snnpu._internal.model.shapes import layer_geometry
from snnpu._internal.perf.schema import HardwareConfig, LatencyReport

logger = logging.getLogger(__name__)

_SPIKE = 0
_BARRIER = 1


def resolve_npus(spec: NetworkSpec, hw: HardwareConfig) -> tuple[int, ...]:
    """NPU count per layer: the hardware override, else the network's."""
    if hw.npu_per_layer is None:
        return tuple(layer.npu_count for layer in spec.layers)
    if len(hw.npu_per_layer) != len(spec.layers):
        raise TraceMismatchError(
            f"npu_per_layer has {len(hw.npu_per_layer)} entries, "
            f"network has {len(spec.layers)} layers"
        )
    return hw.npu_per_layer


def _check_trace(trace: SpikeTrace, spec: NetworkSpec) -> None:
    geometry = layer_geometry(spec)
    neurons = tuple(g.neurons for g in geometry)
    if trace.layer_neurons != neurons:
        raise TraceMismatchError(
            f"trace of {trace.network!r} does not match network {spec.name!r} "
            f"({trace.layer_neurons} vs {neurons} neurons per layer)"
        )
    if len(trace):
        limits = np.array([g.max_updates_per_spike for g in geometry])
        if np.any(trace.updates > limits[trace.layer]):
            raise TraceMismatchError("trace records more updates per spike than a kernel covers")
        keys = trace.timestep * len(neurons) + trace.layer
        if np.any(np.diff(keys) < 0):
            raise TraceMismatchError("trace rows are not in emission order")


def layer_work_cycles(trace: SpikeTrace, spec: NetworkSpec, hw: HardwareConfig) -> np.ndarray:
    """Total cycles each layer needs on a single NPU (queueing excluded)."""
    _check_trace(trace, spec)
    updates = trace.layer_updates().astype(np.float64)
    spikes = trace.layer_spikes_in().astype(np.float64)
    neurons = np.array(trace.layer_neurons, dtype=np.float64)
    return (
        updates * hw.cycles_per_update
        + spikes * hw.cycles_per_spike_overhead
        + trace.timesteps * neurons * hw.cycles_per_fire
    )


def _group_updates(trace: SpikeTrace, layers: int) -> list[list[np.ndarray]]:
    """updates per (timestep, receiving layer), rows in emission order."""
    keys = trace.timestep * layers + trace.layer
    bounds = np.searchsorted(keys, np.arange(trace.timesteps * layers + 1), side="left")
    return [
        [trace.updates[bounds[t * layers + l]:bounds[t * layers + l + 1]] for l in range(layers)]
        for t in range(trace.timesteps)
    ]


def simulate_latency(
    trace: SpikeTrace, spec: NetworkSpec, hw: HardwareConfig = HardwareConfig()
) -> LatencyReport:
    """
    Simulate the NPU pipeline over a spike trace.

    Raises:
        TraceMismatchError: the trace was not produced on this network.
    """
    _check_trace(trace, spec)
    npus = resolve_npus(spec, hw)
    layers = len(spec.layers)
    extract = set(spec.extract_indices)
    work = _group_updates(trace, layers)
    neurons = trace.layer_neurons

    env = simpy.Environment()
    queues = [simpy.Store(env) for _ in range(layers)]
    readout = simpy.Store(env)
    busy = [0.0] * layers
    wait = [0.0] * layers
    done = [0.0] * trace.timesteps

    def feed(layer: int, t: int) -> None:
        for u in work[t][layer]:
            queues[layer].put((_SPIKE, t, int(u), env.now))
        queues[layer].put((_BARRIER, t, 0, env.now))

    def source():
        period = hw.input_period_s * hw.clock_hz
        for t in range(trace.timesteps):
            arrival = t * period
            if arrival > env.now:
                yield env.timeout(arrival - env.now)
            feed(0, t)

    def stage(layer: int):
        npu = npus[layer]
        while True:
            kind, t, updates, enqueued = yield queues[layer].get()
            wait[layer] += env.now - enqueued
            if kind == _SPIKE:
                cost = (updates * hw.cycles_per_update + hw.cycles_per_spike_overhead) / npu
            else:
                cost = neurons[layer] * hw.cycles_per_fire / npu
            if cost:
                yield env.timeout(cost)
                busy[layer] += cost
            if kind != _BARRIER:
                continue
            if layer in extract:
                readout.put((t, int(trace.emitted[t, layer])))
            if layer + 1 < layers:
                feed(layer + 1, t)
            else:
                readout.put((t, None))

    def reader():
        while True:
            t, count = yield readout.get()
            if count is None:
                done[t] = env.now
                continue
            cost = count * hw.readout_cycles_per_spike
            if cost:
                yield env.timeout(cost)

    env.process(source())
    for layer in range(layers):
        env.process(stage(layer))
    env.process(reader())
    env.run()

    clock = hw.clock_hz
    report = LatencyReport(
        network=spec.name,
        clock_hz=clock,
        npus=npus,
        busy_s=tuple(b / clock for b in busy),
        queue_wait_s=tuple(w / clock for w in wait),
        spikes_in=tuple(int(n) for n in trace.layer_spikes_in()),
        updates=tuple(int(n) for n in trace.layer_updates()),
        timestep_done_s=tuple(d / clock for d in done),
        end_to_end_s=max(done, default=0.0) / clock,
        bottleneck=int(np.argmax(busy)) if busy else 0,
    )
    logger.debug(
        "%s: latency %.6g s, bottleneck layer %d", spec.name, report.end_to_end_s, report.bottleneck
    )
    return report


def _npu_tuple(npus: Union[int, Sequence[int]], layers: int) -> tuple[int, ...]:
    if isinstance(npus, int):
        return (npus,) * layers
    return tuple(npus)


def npu_speedup(
    trace: SpikeTrace,
    spec: NetworkSpec,
    hw: HardwareConfig,
    npus_a: Union[int, Sequence[int]],
    npus_b: Union[int, Sequence[int]],
) -> float:
    """Latency with npus_a divided by latency with npus_b."""
    layers = len(spec.layers)
    a = simulate_latency(trace, spec, hw.with_npus(_npu_tuple(npus_a, layers)))
    b = simulate_latency(trace, spec, hw.with_npus(_npu_tuple(npus_b, layers)))
    if b.end_to_end_s == 0:
        return 1.0
    return a.end_to_end_s / b.end_to_end_s


def balance_npus(
    trace: SpikeTrace, spec: NetworkSpec, hw: HardwareConfig, total_npus: int
) -> tuple[int, ...]:
    """
    Distribute total_npus over the layers, one NPU per layer first, each
    further NPU to the layer with the largest busy time (lowest index on ties).
    """
    layers = len(spec.layers)
    if total_npus < layers:
        raise ValueError(f"{total_npus} NPUs cannot cover {layers} layers")
    work = layer_work_cycles(trace, spec, hw)
    npus = np.ones(layers, dtype=np.int64)
    for _ in range(total_npus - layers):
        npus[int(np.argmax(work / npus))] += 1
    return tuple(int(n) for n in npus)


def calibrate_hardware(
    trace: SpikeTrace,
    spec: NetworkSpec,
    hw: HardwareConfig,
    target_latency_s: float,
    rel_tolerance: float = 1e-6,
    max_iterations: int = 200,
) -> HardwareConfig:
    """
    Fit cycles_per_spike_overhead so the trace reproduces a target latency.

    cycles_per_update stays fixed. Latency grows monotonically with the
    overhead, so the fit is a bisection.

    Raises:
        CalibrationError: the target is below the zero-overhead latency, or
            the trace has no spikes to carry an overhead.
    """
    def latency(overhead: float) -> float:
        candidate = hw.model_copy(update={"cycles_per_spike_overhead": overhead})
        return simulate_latency(trace, spec, candidate).end_to_end_s

    floor = latency(0.0)
    if target_latency_s < floor * (1 - rel_tolerance):
        raise CalibrationError(
            f"target {target_latency_s:.6g} s is below the zero-overhead latency {floor:.6g} s"
        )
    if abs(target_latency_s - floor) <= rel_tolerance * target_latency_s:
        return hw.model_copy(update={"cycles_per_spike_overhead": 0.0})
    if not len(trace):
        raise CalibrationError("trace has no spikes; overhead cannot change the latency")

    low, high = 0.0, 1.0
    while latency(high) < target_latency_s:
        high *= 2.0
        if high > 1e15:
            raise CalibrationError("target latency not reachable")
    for _ in range(max_iterations):
        mid = (low + high) / 2.0
        value = latency(mid)
        if abs(value - target_latency_s) <= rel_tolerance * target_latency_s:
            low = high = mid
            break
        if value < target_latency_s:
            low = mid
        else:
            high = mid
    fitted = (low + high) / 2.0
    logger.info("calibrated per-spike overhead: %.4f cycles", fitted)
    return hw.model_copy(update={"cycles_per_spike_overhead": fitted})


def estimate_step_latency(
    trace: SpikeTrace, spec: NetworkSpec, hw: Optional[HardwareConfig] = None
) -> float:
    """End-to-end latency of a single-timestep trace, in seconds."""
    return simulate_latency(trace, spec, hw or HardwareConfig()).end_to_end_s

"""
PIPELINE LATENCY TESTS

Proves the NPU pipeline simulation:
  - One layer with no overheads takes updates * cycles / clock exactly
  - Latency does not grow with more NPUs and does not shrink with more spikes
  - 16 NPUs instead of 4 give a speedup of at most 4
  - Balancing, calibration and trace validation behave
"""

import numpy as np
import pytest

from snnpu import (
    HardwareConfig,
    balance_npus,
    calibrate_hardware,
    estimate_step_latency,
    npu_speedup,
    parse_model_config,
    randomize_weights,
    run_event_driven,
    simulate_latency,
)
from snnpu._internal.perf import format_latency_report, latency_csv, layer_work_cycles
from snnpu.errors import CalibrationError, TraceMismatchError


HW = HardwareConfig()


def _single_layer():
    return randomize_weights(parse_model_config("input 32 8 8\n32c3s1!\n"), seed=0)


def _toy(timesteps: int = 4):
    text = f"input 2 16 16\ntimesteps {timesteps}\nneuron if vth=0.5\n8c3s1\n8c3s1\n8c3s1\n8c3s1!\n"
    return randomize_weights(parse_model_config(text), seed=1)


def _trace(spec, seed: int = 0, density: float = 0.3):
    rng = np.random.default_rng(seed)
    frames = [
        (rng.random(spec.input_shape_3d) < density).astype(np.int64)
        for _ in range(spec.timesteps)
    ]
    _, trace = run_event_driven(spec, frames)
    return trace


def _one_spike_trace(spec, y: int = 4, x: int = 4):
    frame = np.zeros(spec.input_shape_3d, dtype=np.int64)
    frame[0, y, x] = 1
    _, trace = run_event_driven(spec, [frame])
    return trace


# ── Single stage ────────────────────────────────────────────────────

class TestSingleStage:
    """Exact cycle arithmetic on one layer."""

    def test_interior_spike_takes_288_cycles(self):
        spec = _single_layer()
        report = simulate_latency(_one_spike_trace(spec), spec, HW)
        assert report.updates == (288,)
        assert report.busy_s[0] == pytest.approx(2.88e-6)
        assert report.end_to_end_s == pytest.approx(2.88e-6)

    def test_exact_total(self):
        spec = _single_layer()
        trace = _trace(spec, seed=3)
        report = simulate_latency(trace, spec, HW)
        assert report.end_to_end_s == pytest.approx(trace.total_updates / HW.clock_hz)

    def test_cycles_per_update_scales(self):
        spec = _single_layer()
        trace = _trace(spec, seed=3)
        slow = HardwareConfig(cycles_per_update=3.0)
        assert simulate_latency(trace, spec, slow).end_to_end_s == pytest.approx(
            3 * simulate_latency(trace, spec, HW).end_to_end_s
        )

    def test_spike_overhead(self):
        spec = _single_layer()
        hw = HardwareConfig(cycles_per_spike_overhead=12.0)
        assert estimate_step_latency(_one_spike_trace(spec), spec, hw) == pytest.approx(300e-8)

    def test_barrier_cost(self):
        spec = _single_layer()
        hw = HardwareConfig(cycles_per_update=0.0, cycles_per_fire=1.0)
        report = simulate_latency(_one_spike_trace(spec), spec, hw)
        assert report.end_to_end_s == pytest.approx(32 * 8 * 8 / HW.clock_hz)

    def test_empty_trace(self):
        spec = _single_layer()
        _, trace = run_event_driven(spec, [np.zeros((32, 8, 8), dtype=np.int64)])
        assert simulate_latency(trace, spec, HW).end_to_end_s == 0.0


# ── Pipeline ────────────────────────────────────────────────────────

class TestPipeline:
    """Concurrent stages over several timesteps."""

    def test_end_to_end_covers_busiest_stage(self):
        spec = _toy()
        report = simulate_latency(_trace(spec), spec, HW)
        assert report.end_to_end_s >= max(report.busy_s) - 1e-15
        assert all(w >= 0 for w in report.queue_wait_s)
        assert len(report.timestep_done_s) == spec.timesteps

    def test_stages_overlap(self):
        spec = _toy()
        report = simulate_latency(_trace(spec), spec, HW)
        assert report.end_to_end_s <= sum(report.busy_s) + 1e-15

    def test_bottleneck_is_busiest(self):
        spec = _toy()
        report = simulate_latency(_trace(spec), spec, HW)
        assert report.bottleneck == int(np.argmax(report.busy_s))

    def test_timesteps_complete_in_order(self):
        spec = _toy()
        done = simulate_latency(_trace(spec), spec, HW).timestep_done_s
        assert list(done) == sorted(done)

    def test_input_period(self):
        spec = _toy()
        hw = HardwareConfig(input_period_s=1e-3)
        report = simulate_latency(_trace(spec), spec, hw)
        assert report.end_to_end_s >= (spec.timesteps - 1) * 1e-3

    def test_more_spikes_never_faster(self):
        spec = _single_layer()
        rng = np.random.default_rng(8)
        big = (rng.random((32, 8, 8)) < 0.3).astype(np.int64)
        small = big * (rng.random((32, 8, 8)) < 0.5)
        _, t_small = run_event_driven(spec, [small])
        _, t_big = run_event_driven(spec, [big])
        assert (
            simulate_latency(t_small, spec, HW).end_to_end_s
            <= simulate_latency(t_big, spec, HW).end_to_end_s
        )

    def test_more_npus_never_slower(self):
        spec = _toy()
        trace = _trace(spec)
        rng = np.random.default_rng(2)
        npus = np.ones(len(spec.layers), dtype=int)
        previous = simulate_latency(trace, spec, HW.with_npus(tuple(npus))).end_to_end_s
        for _ in range(10):
            npus[int(rng.integers(len(npus)))] += 1
            current = simulate_latency(trace, spec, HW.with_npus(tuple(npus))).end_to_end_s
            assert current <= previous + 1e-15
            previous = current

    def test_doubling_npus_halves_busy(self):
        spec = _toy()
        trace = _trace(spec)
        one = simulate_latency(trace, spec, HW.with_npus((1, 1, 1, 1)))
        two = simulate_latency(trace, spec, HW.with_npus((2, 2, 2, 2)))
        for a, b in zip(one.busy_s, two.busy_s):
            assert b == pytest.approx(a / 2)


class TestNpuScaling:
    """Speedup and balancing."""

    def test_sixteen_vs_four(self):
        spec = _toy()
        speedup = npu_speedup(_trace(spec), spec, HW, 1, 4)
        assert 1.0 < speedup <= 4.0 + 1e-9

    def test_balance_covers_every_layer(self):
        spec = _toy()
        npus = balance_npus(_trace(spec), spec, HW, 16)
        assert sum(npus) == 16
        assert all(n >= 1 for n in npus)

    def test_balance_favours_heavy_layers(self):
        spec = _toy()
        trace = _trace(spec)
        work = layer_work_cycles(trace, spec, HW)
        npus = balance_npus(trace, spec, HW, 12)
        assert npus[int(np.argmax(work))] == max(npus)

    def test_balance_too_few(self):
        spec = _toy()
        with pytest.raises(ValueError):
            balance_npus(_trace(spec), spec, HW, 3)

    def test_layer_npu_counts_from_network(self):
        spec = randomize_weights(parse_model_config("input 32 8 8\n32c3s1! npu=4\n"), seed=0)
        report = simulate_latency(_one_spike_trace(spec), spec, HW)
        assert report.npus == (4,)
        assert report.end_to_end_s == pytest.approx(72e-8)


class TestCalibration:
    """Fitting the per-spike overhead."""

    def test_recovers_overhead(self):
        spec = _toy()
        trace = _trace(spec)
        target = simulate_latency(
            trace, spec, HW.model_copy(update={"cycles_per_spike_overhead": 3.0})
        ).end_to_end_s
        fitted = calibrate_hardware(trace, spec, HW, target)
        assert fitted.cycles_per_spike_overhead == pytest.approx(3.0, rel=1e-3)

    def test_target_below_floor(self):
        spec = _toy()
        trace = _trace(spec)
        floor = simulate_latency(trace, spec, HW).end_to_end_s
        with pytest.raises(CalibrationError):
            calibrate_hardware(trace, spec, HW, floor / 2)

    def test_target_at_floor(self):
        spec = _toy()
        trace = _trace(spec)
        floor = simulate_latency(trace, spec, HW).end_to_end_s
        assert calibrate_hardware(trace, spec, HW, floor).cycles_per_spike_overhead == 0.0


class TestTraceValidation:
    """Traces only replay on the network that produced them."""

    def test_other_network(self):
        trace = _trace(_toy())
        with pytest.raises(TraceMismatchError):
            simulate_latency(trace, _single_layer(), HW)

    def test_npu_override_length(self):
        spec = _toy()
        with pytest.raises(TraceMismatchError):
            simulate_latency(_trace(spec), spec, HW.with_npus((1, 2)))

    def test_invalid_npu_count(self):
        with pytest.raises(ValueError):
            HardwareConfig(npu_per_layer=(1, 0))


class TestLatencyReports:
    """Text and CSV output."""

    def test_text_and_csv(self):
        spec = _toy()
        report = simulate_latency(_trace(spec), spec, HW)
        text = format_latency_report(report)
        assert "bottleneck" in text
        assert "End-to-end latency" in text
        rows = latency_csv(report).splitlines()
        assert rows[0].startswith("layer,npus,spikes_in,updates")
        assert rows[-1].startswith("total,")
        assert len(rows) == 2 + len(spec.layers)
        assert "utilization" in rows[0].split(",")

    def test_utilization_and_timestep_latency(self):
        spec = _toy()
        report = simulate_latency(_trace(spec), spec, HW)
        utilization = report.utilization()
        assert len(utilization) == len(spec.layers)
        assert all(0.0 <= u <= 1.0 + 1e-9 for u in utilization)
        assert utilization[report.bottleneck] == max(utilization)
        steps = report.timestep_latency_s()
        assert len(steps) == len(report.timestep_done_s)
        assert sum(steps) == pytest.approx(report.timestep_done_s[-1])
        assert "Slowest timestep: t=" in format_latency_report(report)

"""
NEURON DYNAMICS TESTS

Proves IF/LIF neurons:
  - Hard reset to 0 on every fire
  - Fire exactly at the threshold
  - IF potentials never decrease under nonnegative input
  - LIF potentials decay toward 0 without input
  - Vectorized steps equal the scalar reference step
  - The fixed step is the real step with a floor quantization after each phase
"""

import math

import numpy as np
import pytest

from snnpu import (
    Q8_8,
    FixedNeuronParams,
    FixedValue,
    NeuronParams,
    NeuronState,
    SaturationCounter,
    neuron_step,
    quantize_neuron,
    quantize_value,
    step_fixed,
    step_real,
)
from snnpu.errors import NeuronQuantizationError


IF = NeuronParams(kind="IF", tau=None, v_threshold=1.0)
LIF = NeuronParams(kind="LIF", tau=2.0, v_threshold=1.0)
LIF_SHIFT = NeuronParams(kind="LIF", tau=4.0, v_threshold=1.0, leak_form="shift_leak")


# ── Parameters ──────────────────────────────────────────────────────

class TestNeuronParams:
    """Validation and quantization of parameters."""

    def test_defaults(self):
        p = NeuronParams()
        assert p.kind == "LIF" and p.tau == 2.0 and p.v_threshold == 1.0

    def test_nonpositive_threshold_rejected(self):
        with pytest.raises(ValueError):
            NeuronParams(kind="IF", tau=None, v_threshold=0.0)

    def test_soft_reset_rejected(self):
        with pytest.raises(ValueError):
            NeuronParams(v_reset=0.5)

    def test_lif_tau_must_exceed_one(self):
        with pytest.raises(ValueError):
            NeuronParams(kind="LIF", tau=1.0)

    def test_quantize_lif(self):
        q = quantize_neuron(LIF, Q8_8)
        assert isinstance(q, FixedNeuronParams)
        assert q.v_threshold.raw == 256
        assert q.inv_tau.raw == 128
        assert q.format == Q8_8

    def test_inv_tau_floors(self):
        q = quantize_neuron(NeuronParams(kind="LIF", tau=3.0), Q8_8)
        assert q.inv_tau.raw == 85

    def test_if_has_no_leak(self):
        assert quantize_neuron(IF).inv_tau is None

    def test_threshold_underflow_rejected(self):
        with pytest.raises(NeuronQuantizationError):
            quantize_neuron(NeuronParams(kind="IF", tau=None, v_threshold=0.001))

    def test_leak_underflow_rejected(self):
        with pytest.raises(NeuronQuantizationError):
            quantize_neuron(NeuronParams(kind="LIF", tau=1000.0))


# ── Scalar step ─────────────────────────────────────────────────────

class TestScalarStep:
    """Real and fixed-point reference step."""

    def test_if_integrates(self):
        fired, state = neuron_step(NeuronState(v=0.25), 0.5, IF)
        assert not fired and state.v == 0.75

    def test_fires_exactly_at_threshold(self):
        fired, state = neuron_step(NeuronState(v=0.0), 1.0, IF)
        assert fired and state.v == 0.0

    def test_just_below_threshold_does_not_fire(self):
        q = quantize_neuron(IF)
        x = FixedValue(raw=255, format=Q8_8)
        fired, state = neuron_step(NeuronState(v=FixedValue(raw=0, format=Q8_8)), x, q)
        assert not fired and state.v.raw == 255

    def test_fixed_fires_at_threshold(self):
        q = quantize_neuron(IF)
        x = FixedValue(raw=256, format=Q8_8)
        fired, state = neuron_step(NeuronState(), x, q)
        assert fired and state.v.raw == 0

    def test_lif_decay_input(self):
        # h = v + (x - v) / tau
        fired, state = neuron_step(NeuronState(v=0.5), 1.0, LIF)
        assert not fired and state.v == 0.75

    def test_lif_shift_leak(self):
        # h = v / tau + x
        fired, state = neuron_step(NeuronState(v=0.8), 0.5, LIF_SHIFT)
        assert not fired and state.v == pytest.approx(0.7)

    def test_hard_reset_after_overshoot(self):
        fired, state = neuron_step(NeuronState(v=0.9), 5.0, IF)
        assert fired and state.v == 0.0

    def test_if_monotone_under_nonnegative_input(self):
        rng = np.random.default_rng(5)
        q = quantize_neuron(NeuronParams(kind="IF", tau=None, v_threshold=100.0))
        state = NeuronState(v=FixedValue(raw=0, format=Q8_8))
        for x in rng.integers(0, 300, 200):
            before = state.v.raw
            fired, state = neuron_step(state, FixedValue(raw=int(x), format=Q8_8), q)
            assert fired or state.v.raw >= before

    @pytest.mark.parametrize("params", [LIF, LIF_SHIFT])
    def test_lif_decays_toward_zero(self, params):
        q = quantize_neuron(params.model_copy(update={"v_threshold": 100.0}))
        state = NeuronState(v=quantize_value(50.0))
        zero = FixedValue(raw=0, format=Q8_8)
        previous = state.v.raw
        for _ in range(40):
            fired, state = neuron_step(state, zero, q)
            assert not fired
            assert 0 <= state.v.raw <= previous
            previous = state.v.raw
        assert state.v.raw == 0

    def test_real_lif_decays(self):
        v = 0.9
        for _ in range(20):
            _, state = neuron_step(NeuronState(v=v), 0.0, LIF)
            assert abs(state.v) < abs(v)
            v = state.v


# ── Vectorized steps ────────────────────────────────────────────────

class TestArraySteps:
    """step_real / step_fixed agree with the scalar step."""

    @pytest.mark.parametrize("params", [IF, LIF, LIF_SHIFT])
    def test_fixed_matches_scalar(self, params):
        rng = np.random.default_rng(13)
        q = quantize_neuron(params)
        v = rng.integers(-400, 250, 256)
        x = rng.integers(-300, 400, 256)
        fired, h = step_fixed(v, x, q)
        for i in range(v.size):
            f, s = neuron_step(
                NeuronState(v=FixedValue(raw=int(v[i]), format=Q8_8)),
                FixedValue(raw=int(x[i]), format=Q8_8),
                q,
            )
            assert bool(fired[i]) == f
            assert int(h[i]) == s.v.raw

    @pytest.mark.parametrize("params", [IF, LIF, LIF_SHIFT])
    def test_fixed_is_real_step_floored_per_phase(self, params):
        scale = 1 << Q8_8.fraction_bits

        def floor_q(r: float) -> float:
            raw = min(max(math.floor(r * scale), Q8_8.min_raw), Q8_8.max_raw)
            return raw / scale

        vth = floor_q(params.v_threshold)
        inv_tau = floor_q(1.0 / params.tau) if params.kind == "LIF" else None
        rng = np.random.default_rng(31)
        v = rng.integers(-2000, 1000, 400)
        x = rng.integers(-1500, 2000, 400)
        fired, h = step_fixed(v, x, quantize_neuron(params))

        for i in range(v.size):
            vr, xr = v[i] / scale, x[i] / scale
            if params.kind == "IF":
                hr = floor_q(vr + xr)
            elif params.leak_form == "decay_input":
                hr = floor_q(vr + floor_q(floor_q(xr - vr) * inv_tau))
            else:
                hr = floor_q(floor_q(vr * inv_tau) + xr)
            expect_fire = hr >= vth
            assert bool(fired[i]) == expect_fire
            assert int(h[i]) == (0 if expect_fire else round(hr * scale))

    @pytest.mark.parametrize("params", [IF, LIF, LIF_SHIFT])
    def test_real_matches_scalar(self, params):
        rng = np.random.default_rng(17)
        v = rng.uniform(-1.0, 1.0, 64)
        x = rng.uniform(-1.0, 2.0, 64)
        fired, h = step_real(v, x, params)
        for i in range(v.size):
            f, s = neuron_step(NeuronState(v=float(v[i])), float(x[i]), params)
            assert bool(fired[i]) == f
            assert h[i] == pytest.approx(s.v)

    def test_fixed_saturates(self):
        q = quantize_neuron(NeuronParams(kind="IF", tau=None, v_threshold=127.0))
        counter = SaturationCounter()
        fired, h = step_fixed(np.array([32000]), np.array([32000]), q, counter)
        assert fired[0]
        assert counter.count == 1

"""
MODEL CONFIG, SHAPES AND ACCOUNTING TESTS

Proves the network description:
  - Parses the config grammar and reports errors with line and column
  - Renders back to text that parses to the same structure
  - Infers output shapes with floor((in + 2p - k) / s) + 1
  - Counts synapses, kernels, inputs and neurons exactly
"""

import pytest

from snnpu import (
    REFERENCE_MODELS,
    BatchNormParams,
    NetworkSpec,
    LayerSpec,
    activity,
    extraction_shapes,
    infer_shapes,
    layer_geometry,
    load_reference,
    model_stats,
    parse_model_config,
    render_model_config,
)
from snnpu.errors import EngineInputError, ModelSyntaxError, ShapeError


TOY = """\
name toy
input 2 8 8
timesteps 3
neuron lif tau=2.0 vth=1.0
format q 8 8

4c3x3s1           # same padding
8c3x3s2! npu=2
avg2s2
fc5! neuron=if vth=0.5
"""


# ── Parsing ─────────────────────────────────────────────────────────

class TestParse:
    """Grammar, options and defaults."""

    def test_header(self):
        spec = parse_model_config(TOY)
        assert spec.name == "toy"
        assert spec.input_shape == (2, 8, 8)
        assert spec.timesteps == 3
        assert spec.default_formats.weights.name == "Q8,8"

    def test_layers(self):
        spec = parse_model_config(TOY)
        kinds = [layer.kind for layer in spec.layers]
        assert kinds == ["conv2d", "conv2d", "avgpool", "fully_connected"]
        assert spec.layers[0].padding == (1, 1)
        assert spec.layers[1].stride == (2, 2)
        assert spec.layers[1].npu_count == 2
        assert spec.extract_indices == [1, 3]

    def test_avgpool_keeps_channels(self):
        spec = parse_model_config(TOY)
        assert spec.layers[2].out_channels == 8
        assert not spec.layers[2].has_bias

    def test_layer_neuron_override(self):
        spec = parse_model_config(TOY)
        assert spec.layers[0].neuron.kind == "LIF"
        assert spec.layers[3].neuron.kind == "IF"
        assert spec.layers[3].neuron.v_threshold == 0.5

    def test_even_kernel_has_no_default_padding(self):
        spec = parse_model_config("input 2 8 8\n4c4x4s4\n")
        assert spec.layers[0].padding == (0, 0)

    def test_explicit_padding(self):
        spec = parse_model_config("input 2 8 8\n4c3x3s1p0\n")
        assert spec.layers[0].padding == (0, 0)

    def test_bn_and_nobias(self):
        spec = parse_model_config("input 3 8 8\n4c3s1 bn nobias\n")
        layer = spec.layers[0]
        assert layer.batchnorm == BatchNormParams.identity(3)
        assert not layer.has_bias

    def test_role_formats(self):
        spec = parse_model_config("input 1 4 4\nformat potentials q 16 16\n2c3s1 weights=q4.4\n")
        assert spec.default_formats.potentials.name == "Q16,16"
        assert spec.default_formats.weights.name == "Q8,8"
        assert spec.layer_formats(0).weights.name == "Q4,4"

    def test_zero_weights_attached(self):
        spec = parse_model_config(TOY)
        assert spec.weights[0].shape == (4, 2, 3, 3)
        assert spec.weights[2] is None
        assert spec.weights[3].shape == (5, 8, 2, 2)

    def test_1d_network(self):
        spec = parse_model_config("input 10 24\n48c3s1p1\n35c1s1!\n")
        assert spec.is_1d
        assert spec.layers[0].kind == "conv1d"
        assert spec.layers[0].kernel == (1, 3)
        assert spec.layers[0].padding == (0, 1)
        assert infer_shapes(spec) == [(48, 24), (35, 24)]


class TestSyntaxErrors:
    """Errors carry the line and column of the offending token."""

    def test_unknown_layer_kind(self):
        with pytest.raises(ModelSyntaxError) as exc:
            parse_model_config("input 2 8 8\n\nconv3\n")
        assert exc.value.line == 3
        assert exc.value.column == 1

    def test_unknown_option(self):
        with pytest.raises(ModelSyntaxError) as exc:
            parse_model_config("input 2 8 8\n4c3s1 foo\n")
        assert exc.value.line == 2
        assert exc.value.column == 7

    def test_no_layers(self):
        with pytest.raises(ModelSyntaxError):
            parse_model_config("input 2 8 8\n")

    def test_missing_input(self):
        with pytest.raises(ModelSyntaxError) as exc:
            parse_model_config("name x\n4c3s1\n")
        assert exc.value.line == 2

    def test_bad_timesteps(self):
        with pytest.raises(ModelSyntaxError):
            parse_model_config("input 2 8 8\ntimesteps zero\n4c3s1\n")

    def test_1d_rejects_rectangular_kernel(self):
        with pytest.raises(ModelSyntaxError):
            parse_model_config("input 4 16\n8c3x3s1\n")

    def test_error_code(self):
        with pytest.raises(ModelSyntaxError) as exc:
            parse_model_config("input 2 8 8\nbogus\n")
        assert exc.value.code == "SNNPU_E201"
        assert str(exc.value).startswith("[SNNPU_E201]")


class TestRender:
    """render_model_config is the inverse of the parser."""

    @pytest.mark.parametrize("name", sorted(REFERENCE_MODELS))
    def test_reference_round_trip(self, name):
        spec = load_reference(name)
        again = parse_model_config(render_model_config(spec))
        assert again.layers == spec.layers
        assert again.input_shape == spec.input_shape
        assert again.timesteps == spec.timesteps
        assert again.default_formats == spec.default_formats

    def test_toy_round_trip(self):
        spec = parse_model_config(TOY)
        again = parse_model_config(render_model_config(spec))
        assert again.layers == spec.layers
        assert again.name == "toy"

    def test_uniform_formats_render_one_line(self):
        text = render_model_config(parse_model_config(TOY))
        assert "format q 8 8" in text.splitlines()
        assert "format potentials" not in text

    def test_mixed_formats_render_per_role(self):
        spec = parse_model_config("input 1 4 4\nformat potentials q 16 16\n2c3s1\n")
        assert not spec.default_formats.is_uniform
        text = render_model_config(spec)
        assert "format potentials q 16 16" in text.splitlines()
        assert parse_model_config(text).default_formats == spec.default_formats


# ── Shapes ──────────────────────────────────────────────────────────

class TestShapes:
    """Shape inference."""

    def test_toy_shapes(self):
        assert infer_shapes(parse_model_config(TOY)) == [
            (4, 8, 8), (8, 4, 4), (8, 2, 2), (5, 1, 1),
        ]

    def test_vgg_extraction_shapes(self):
        spec = load_reference("small-32-st-vgg")
        assert extraction_shapes(spec) == [
            (64, 38, 30), (128, 19, 15), (128, 10, 8), (128, 5, 4), (128, 3, 2), (128, 2, 1),
        ]

    def test_vgg_stem(self):
        spec = load_reference("small-32-st-vgg")
        assert infer_shapes(spec)[0] == (32, 76, 60)

    def test_collapsing_layer_rejected(self):
        spec = parse_model_config("input 1 2 2\n8c3s1p0\n")
        with pytest.raises(ShapeError):
            infer_shapes(spec)

    def test_fc_kernel_covers_input(self):
        geometry = layer_geometry(parse_model_config(TOY))
        assert geometry[3].kernel == (2, 2)
        assert geometry[3].fan_in == 8 * 2 * 2

    def test_max_updates_per_spike(self):
        geometry = layer_geometry(parse_model_config("input 32 8 8\n32c3s1\n"))
        assert geometry[0].max_updates_per_spike == 288

    def test_bn_channel_mismatch(self):
        spec = NetworkSpec(
            input_shape=(3, 8, 8),
            layers=(LayerSpec(out_channels=4, batchnorm=BatchNormParams.identity(2)),),
        )
        with pytest.raises(ShapeError):
            layer_geometry(spec)


# ── Accounting ──────────────────────────────────────────────────────

class TestModelStats:
    """Synapses, kernels, inputs and neurons."""

    def test_vgg_backbone(self):
        stats = model_stats(load_reference("small-32-st-vgg"))
        assert stats.synapses == 886752
        assert stats.kernels == 992
        assert stats.inputs == 145920
        assert stats.neurons == 670464

    def test_scnn(self):
        stats = model_stats(load_reference("scnn-gsc"))
        assert stats.synapses == 25763
        assert stats.kernels == 227
        assert stats.inputs == 240
        assert stats.neurons == 5448
        assert [row.synapses for row in stats.layers] == [1488, 6960, 13920, 3395]

    def test_avgpool_has_no_synapses(self):
        stats = model_stats(parse_model_config(TOY))
        assert stats.layers[2].synapses == 0
        assert stats.layers[2].kernels == 0
        assert stats.kernels == 4 + 8 + 5

    def test_nobias(self):
        stats = model_stats(parse_model_config("input 1 4 4\n2c3s1 nobias\n"))
        assert stats.synapses == 2 * 1 * 3 * 3


class TestActivity:
    """activity = spikes / (neurons * timesteps), in percent."""

    @pytest.mark.parametrize(
        "spikes,expected", [(214800, 32.04), (213500, 31.84), (214900, 32.05)]
    )
    def test_vgg_activity(self, spikes, expected):
        assert round(activity(spikes, 670464, 1), 2) == expected

    def test_timesteps_divide(self):
        assert activity(100, 50, 4) == 50.0

    def test_zero_neurons_rejected(self):
        with pytest.raises(EngineInputError):
            activity(1, 0, 1)

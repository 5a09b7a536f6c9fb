"""
Model Config Parser

Text grammar, one statement per line, '#' starts a comment:

    name small-32-st-vgg
    input 2 304 240            # C H W (2D) or C L (1D)
    timesteps 1
    neuron lif tau=2.0 vth=1.0 leak=decay_input
    format q 8 8               # every role
    format potentials q 16 16  # one role
    32c4x4s4p0                 # <out>c<kh>[x<kw>]s<s>[p<p>][!]
    64c3x3s1! npu=4 bn         # '!' marks an extraction point
    fc10                       # fully connected
    avg2s2                     # average pooling

Layer options (after the layer token): bn, nobias, npu=<n>, neuron=<if|lif>,
tau=<r>, vth=<r>, leak=<decay_input|shift_leak>, format=q<m>.<n>,
weights=q<m>.<n>, potentials=q<m>.<n>, thresholds=q<m>.<n>.

When p is omitted, odd kernels get padding k // 2 and even kernels 0.
"""

from __future__ import annotations

import re
from typing import Any, Optional

import numpy as np

from snnpu._internal.errors import ModelSyntaxError, ShapeError
from snnpu._internal.fixedpoint import FixedFormat
from snnpu._internal.model.schema import (
    BatchNormParams,
    FormatSet,
    LayerSpec,
    LayerWeights,
    NetworkSpec,
)
from snnpu._internal.model.shapes import layer_geometry
from snnpu._internal.neuron import NeuronParams


_CONV = re.compile(
    r"^(?P<out>\d+)c(?P<kh>\d+)(?:x(?P<kw>\d+))?s(?P<s>\d+)(?:p(?P<p>\d+))?(?P<ex>!)?$"
)
_FC = re.compile(r"^fc(?P<out>\d+)(?P<ex>!)?$")
_POOL = re.compile(
    r"^avg(?P<kh>\d+)(?:x(?P<kw>\d+))?s(?P<s>\d+)(?:p(?P<p>\d+))?(?P<ex>!)?$"
)

_ROLES = ("weights", "potentials", "thresholds")


class _Line:
    """A tokenized source line; columns are 1-based."""

    def __init__(self, number: int, text: str):
        self.number = number
        self.tokens: list[tuple[str, int]] = [
            (m.group(0), m.start() + 1) for m in re.finditer(r"\S+", text)
        ]

    def error(self, message: str, token_index: int = 0) -> ModelSyntaxError:
        column = self.tokens[token_index][1] if token_index < len(self.tokens) else 1
        return ModelSyntaxError(message, line=self.number, column=column)


def _default_padding(kernel: int) -> int:
    return kernel // 2 if kernel % 2 == 1 else 0


def _positive_int(line: _Line, text: str, what: str, index: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise line.error(f"{what} must be an integer, got {text!r}", index) from None
    if value < 1:
        raise line.error(f"non-positive {what}: {value}", index)
    return value


def _real(line: _Line, text: str, what: str, index: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise line.error(f"{what} must be a number, got {text!r}", index) from None


def _format(line: _Line, text: str, index: int) -> FixedFormat:
    try:
        return FixedFormat.parse(text)
    except ValueError as e:
        raise line.error(str(e), index) from None


def _neuron_fields(line: _Line, start: int, fields: dict[str, Any]) -> dict[str, Any]:
    """Read key=value neuron settings from tokens[start:]."""
    for i in range(start, len(line.tokens)):
        token = line.tokens[i][0]
        key, _, value = token.partition("=")
        if not value:
            raise line.error(f"expected key=value, got {token!r}", i)
        if key == "tau":
            fields["tau"] = _real(line, value, "tau", i)
        elif key == "vth":
            fields["v_threshold"] = _real(line, value, "vth", i)
        elif key == "leak":
            if value not in ("decay_input", "shift_leak"):
                raise line.error(f"unknown leak form {value!r}", i)
            fields["leak_form"] = value
        else:
            raise line.error(f"unknown neuron setting {key!r}", i)
    return fields


def _neuron_kind(line: _Line, text: str, index: int) -> str:
    kind = text.upper()
    if kind not in ("IF", "LIF"):
        raise line.error(f"unknown neuron kind {text!r}", index)
    return kind


def _build_neuron(line: _Line, fields: dict[str, Any]) -> NeuronParams:
    try:
        return NeuronParams(**fields)
    except ValueError as e:
        raise line.error(f"invalid neuron parameters: {e}") from None


def parse_model_config(
    text: str, weights: Optional[list[Optional[LayerWeights]]] = None
) -> NetworkSpec:
    """
    Parse a model config document.

    Weights are zero-initialized unless a weight list is attached.

    Raises:
        ModelSyntaxError: with line and column of the offending token.
    """
    name = "network"
    input_shape: Optional[tuple[int, ...]] = None
    timesteps = 1
    neuron_fields: dict[str, Any] = {}
    formats = {role: None for role in _ROLES}
    raw_layers: list[tuple[_Line, re.Match, str]] = []

    for number, raw in enumerate(text.splitlines(), start=1):
        line = _Line(number, raw.split("#", 1)[0])
        if not line.tokens:
            continue
        head = line.tokens[0][0]
        args = [t for t, _ in line.tokens[1:]]

        if head == "name":
            if not args:
                raise line.error("name needs a value")
            name = " ".join(args)
        elif head == "input":
            if len(args) not in (2, 3):
                raise line.error("input needs C H W or C L")
            input_shape = tuple(
                _positive_int(line, a, "input dimension", i + 1) for i, a in enumerate(args)
            )
        elif head == "timesteps":
            if len(args) != 1:
                raise line.error("timesteps needs one value")
            timesteps = _positive_int(line, args[0], "timesteps", 1)
        elif head == "neuron":
            if not args:
                raise line.error("neuron needs a kind (if | lif)")
            neuron_fields = {"kind": _neuron_kind(line, args[0], 1)}
            _neuron_fields(line, 2, neuron_fields)
        elif head == "format":
            if args and args[0] in _ROLES:
                formats[args[0]] = _format(line, " ".join(args[1:]), 2)
            else:
                fmt = _format(line, " ".join(args), 1)
                formats = {role: fmt for role in _ROLES}
        else:
            for kind, pattern in (("conv", _CONV), ("fc", _FC), ("avgpool", _POOL)):
                match = pattern.match(head)
                if match:
                    raw_layers.append((line, match, kind))
                    break
            else:
                raise line.error(f"unknown layer kind {head!r}")

    if not raw_layers:
        raise ModelSyntaxError("model declares no layers", line=1, column=1)
    if input_shape is None:
        first = raw_layers[0][0]
        raise first.error("input shape must be declared before layers can be resolved")

    default_neuron = _build_neuron(raw_layers[0][0], dict(neuron_fields))
    default_formats = FormatSet(**{r: f for r, f in formats.items() if f is not None})

    is_1d = len(input_shape) == 2
    channels = input_shape[0]
    layers = []
    for line, match, kind in raw_layers:
        layer = _build_layer(
            line, match, kind, is_1d, channels, neuron_fields, default_neuron
        )
        layers.append(layer)
        channels = layer.out_channels

    spec = NetworkSpec(
        name=name,
        input_shape=input_shape,
        timesteps=timesteps,
        layers=tuple(layers),
        default_formats=default_formats,
    )
    if weights is None:
        try:
            weights = zero_weights(spec)
        except ShapeError:
            # left unresolved; infer_shapes reports the problem
            weights = []
    return spec.with_weights(weights)


def _build_layer(
    line: _Line,
    match: re.Match,
    kind: str,
    is_1d: bool,
    in_channels: int,
    neuron_fields: dict[str, Any],
    default_neuron: NeuronParams,
) -> LayerSpec:
    groups = match.groupdict()
    fields: dict[str, Any] = {"extract": groups.get("ex") == "!"}

    if kind == "fc":
        fields["kind"] = "fully_connected"
        fields["out_channels"] = _positive_int(line, groups["out"], "channels", 0)
        fields["kernel"] = (1, 1)
    else:
        kh = _positive_int(line, groups["kh"], "kernel", 0)
        kw = _positive_int(line, groups["kw"], "kernel", 0) if groups["kw"] else kh
        stride = _positive_int(line, groups["s"], "stride", 0)
        if is_1d:
            if groups["kw"]:
                raise line.error("1D layers take a single kernel size")
            fields["kernel"] = (1, kh)
            fields["stride"] = (1, stride)
            pad = int(groups["p"]) if groups["p"] else _default_padding(kh)
            fields["padding"] = (0, pad)
        else:
            fields["kernel"] = (kh, kw)
            fields["stride"] = (stride, stride)
            if groups["p"]:
                fields["padding"] = (int(groups["p"]),) * 2
            else:
                fields["padding"] = (_default_padding(kh), _default_padding(kw))
        if kind == "avgpool":
            fields["kind"] = "avgpool"
            fields["out_channels"] = in_channels
            fields["has_bias"] = False
        else:
            fields["kind"] = "conv1d" if is_1d else "conv2d"
            fields["out_channels"] = _positive_int(line, groups["out"], "channels", 0)

    overrides: dict[str, Any] = {}
    layer_formats: dict[str, FixedFormat] = {}
    for i in range(1, len(line.tokens)):
        token = line.tokens[i][0]
        key, eq, value = token.partition("=")
        if not eq:
            if key == "bn":
                fields["batchnorm"] = BatchNormParams.identity(in_channels)
            elif key == "nobias":
                fields["has_bias"] = False
            else:
                raise line.error(f"unknown layer option {token!r}", i)
        elif key == "npu":
            fields["npu_count"] = _positive_int(line, value, "npu count", i)
        elif key == "neuron":
            overrides["kind"] = _neuron_kind(line, value, i)
        elif key in ("tau", "vth", "leak"):
            _neuron_fields_single(line, i, overrides)
        elif key == "format":
            fmt = _format(line, value, i)
            layer_formats = {role: fmt for role in _ROLES}
        elif key in _ROLES:
            layer_formats[key] = _format(line, value, i)
        else:
            raise line.error(f"unknown layer option {key!r}", i)

    if overrides:
        merged = {**neuron_fields, **overrides}
        fields["neuron"] = _build_neuron(line, merged)
    else:
        fields["neuron"] = default_neuron
    if layer_formats:
        fields["formats"] = FormatSet(**layer_formats)

    try:
        return LayerSpec(**fields)
    except ValueError as e:
        raise line.error(f"invalid layer: {e}") from None


def _neuron_fields_single(line: _Line, index: int, fields: dict[str, Any]) -> None:
    key, _, value = line.tokens[index][0].partition("=")
    if key == "tau":
        fields["tau"] = _real(line, value, "tau", index)
    elif key == "vth":
        fields["v_threshold"] = _real(line, value, "vth", index)
    elif value in ("decay_input", "shift_leak"):
        fields["leak_form"] = value
    else:
        raise line.error(f"unknown leak form {value!r}", index)


def zero_weights(spec: NetworkSpec) -> list[Optional[LayerWeights]]:
    """Zero real weights (out, in, kh, kw) for every trainable layer."""
    weights: list[Optional[LayerWeights]] = []
    for g, layer in zip(layer_geometry(spec), spec.layers):
        if not layer.trainable:
            weights.append(None)
            continue
        shape = (layer.out_channels, g.in_shape[0], g.kernel[0], g.kernel[1])
        bias = np.zeros(layer.out_channels) if layer.has_bias else None
        weights.append(LayerWeights(weight=np.zeros(shape), bias=bias))
    return weights


# =============================================================================
# Rendering (inverse of the parser)
# =============================================================================

def _fmt_token(fmt: FixedFormat) -> str:
    return f"q{fmt.integer_bits}.{fmt.fraction_bits}"


def _neuron_tokens(p: NeuronParams) -> list[str]:
    tokens = [f"vth={p.v_threshold!r}", f"leak={p.leak_form}"]
    if p.tau is not None:
        tokens.insert(0, f"tau={p.tau!r}")
    return tokens


def render_model_config(spec: NetworkSpec) -> str:
    """
    Render a NetworkSpec back to the config grammar.

    parse_model_config(render_model_config(s)) has the same structure as s.
    """
    default_neuron = spec.layers[0].neuron
    lines = [
        f"name {spec.name}",
        "input " + " ".join(str(d) for d in spec.input_shape),
        f"timesteps {spec.timesteps}",
        " ".join(["neuron", default_neuron.kind.lower(), *_neuron_tokens(default_neuron)]),
    ]
    if spec.default_formats.is_uniform:
        fmt = spec.default_formats.weights
        lines.append(f"format q {fmt.integer_bits} {fmt.fraction_bits}")
    else:
        for role in _ROLES:
            fmt: FixedFormat = getattr(spec.default_formats, role)
            lines.append(f"format {role} q {fmt.integer_bits} {fmt.fraction_bits}")

    for i, layer in enumerate(spec.layers):
        kh, kw = layer.kernel
        sh, sw = layer.stride
        ph, pw = layer.padding
        if sh != sw or ph != pw:
            if not (spec.is_1d and sh == 1 and ph == 0):
                raise ModelSyntaxError(
                    f"layer {i}: non-square stride/padding cannot be rendered", line=i + 1
                )
        stride, pad = (sw, pw) if spec.is_1d else (sh, ph)
        mark = "!" if layer.extract else ""
        if layer.kind == "fully_connected":
            token = f"fc{layer.out_channels}{mark}"
        else:
            ksize = str(kw) if spec.is_1d else f"{kh}x{kw}"
            prefix = "avg" if layer.kind == "avgpool" else f"{layer.out_channels}c"
            token = f"{prefix}{ksize}s{stride}p{pad}{mark}"

        options = []
        if layer.batchnorm is not None:
            options.append("bn")
        if not layer.has_bias and layer.kind != "avgpool":
            options.append("nobias")
        if layer.npu_count != 1:
            options.append(f"npu={layer.npu_count}")
        if layer.neuron != default_neuron:
            options.append(f"neuron={layer.neuron.kind.lower()}")
            options.extend(_neuron_tokens(layer.neuron))
        if layer.formats is not None:
            options.extend(f"{role}={_fmt_token(getattr(layer.formats, role))}" for role in _ROLES)
        lines.append(" ".join([token, *options]))

    return "\n".join(lines) + "\n"

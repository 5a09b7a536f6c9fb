"""
Shape Inference and Model Accounting

out_dim = floor((in_dim + 2 * pad - kernel) / stride) + 1 per spatial axis.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict

from snnpu._internal.errors import ShapeError
from snnpu._internal.model.schema import LayerKind, LayerStats, ModelStats, NetworkSpec


class LayerGeometry(BaseModel):
    """Resolved geometry of one layer, always in (C, H, W) form."""
    model_config = ConfigDict(frozen=True)

    index: int
    kind: LayerKind
    in_shape: tuple[int, int, int]
    out_shape: tuple[int, int, int]
    kernel: tuple[int, int]
    stride: tuple[int, int]
    padding: tuple[int, int]

    @property
    def fan_in(self) -> int:
        if self.kind == "avgpool":
            return self.kernel[0] * self.kernel[1]
        return self.in_shape[0] * self.kernel[0] * self.kernel[1]

    @property
    def neurons(self) -> int:
        c, h, w = self.out_shape
        return c * h * w

    @property
    def max_updates_per_spike(self) -> int:
        """Upper bound of membrane updates caused by one incoming spike."""
        if self.kind == "avgpool":
            return self.kernel[0] * self.kernel[1]
        return self.kernel[0] * self.kernel[1] * self.out_shape[0]


def _out_dim(size: int, kernel: int, stride: int, pad: int) -> int:
    return (size + 2 * pad - kernel) // stride + 1


def layer_geometry(spec: NetworkSpec) -> list[LayerGeometry]:
    """
    Resolve every layer's input/output shape.

    Raises:
        ShapeError: on any non-positive dimension or channel mismatch.
    """
    shape = spec.input_shape_3d
    result = []
    for i, layer in enumerate(spec.layers):
        c, h, w = shape
        kernel, stride, padding = layer.kernel, layer.stride, layer.padding
        if layer.kind == "fully_connected":
            kernel, stride, padding = (h, w), (1, 1), (0, 0)
        if layer.kind == "avgpool" and layer.out_channels != c:
            raise ShapeError(
                f"layer {i}: avgpool keeps {c} channels, declared {layer.out_channels}"
            )
        if layer.batchnorm is not None and layer.batchnorm.channels != c:
            raise ShapeError(
                f"layer {i}: batchnorm covers {layer.batchnorm.channels} channels, input has {c}"
            )
        out_h = _out_dim(h, kernel[0], stride[0], padding[0])
        out_w = _out_dim(w, kernel[1], stride[1], padding[1])
        if out_h < 1 or out_w < 1:
            raise ShapeError(
                f"layer {i}: input {shape} with kernel {kernel}, stride {stride}, "
                f"padding {padding} gives {out_h}x{out_w}"
            )
        out = (layer.out_channels, out_h, out_w)
        result.append(
            LayerGeometry(
                index=i,
                kind=layer.kind,
                in_shape=shape,
                out_shape=out,
                kernel=kernel,
                stride=stride,
                padding=padding,
            )
        )
        shape = out
    return result


def _display(spec: NetworkSpec, shape: tuple[int, int, int]) -> tuple[int, ...]:
    if spec.is_1d:
        return (shape[0], shape[2])
    return shape


def infer_shapes(spec: NetworkSpec) -> list[tuple[int, ...]]:
    """Output shape of every layer; (C, L) for 1D networks."""
    return [_display(spec, g.out_shape) for g in layer_geometry(spec)]


def extraction_shapes(spec: NetworkSpec) -> list[tuple[int, ...]]:
    """Output shapes of the layers flagged extract, in layer order."""
    shapes = infer_shapes(spec)
    return [shapes[i] for i in spec.extract_indices]


def model_stats(spec: NetworkSpec) -> ModelStats:
    """Inputs, synapses, kernels and spiking neurons of a network."""
    layers = []
    for g in layer_geometry(spec):
        layer = spec.layers[g.index]
        if layer.trainable:
            synapses = g.fan_in * layer.out_channels + (layer.out_channels if layer.has_bias else 0)
            kernels = layer.out_channels
        else:
            synapses = 0
            kernels = 0
        layers.append(
            LayerStats(
                index=g.index,
                kind=g.kind,
                output_shape=_display(spec, g.out_shape),
                fan_in=g.fan_in,
                synapses=synapses,
                kernels=kernels,
                neurons=g.neurons,
            )
        )

    inputs = 1
    for d in spec.input_shape:
        inputs *= d

    return ModelStats(
        inputs=inputs,
        synapses=sum(s.synapses for s in layers),
        kernels=sum(s.kernels for s in layers),
        neurons=sum(s.neurons for s in layers),
        layers=layers,
    )

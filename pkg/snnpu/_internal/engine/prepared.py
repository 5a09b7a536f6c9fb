"""
Per-layer execution state shared by both engines.

Fixed-point convention: convolution sums run over raw weights in the
weights format, in a wide accumulator. At the timestep barrier the bias
(also in the weights format) is added once and the sum is aligned to the
potential format; the neuron step then saturates each phase.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

import numpy as np

from snnpu._internal.errors import EngineInputError, UnfusedBatchNormError
from snnpu._internal.fixedpoint import (
    FixedFormat,
    FixedTensor,
    SaturationCounter,
    align_raw,
)
from snnpu._internal.model.fusion import quantize_network
from snnpu._internal.model.schema import LayerSpec, NetworkSpec
from snnpu._internal.model.shapes import LayerGeometry, layer_geometry
from snnpu._internal.neuron import (
    FixedNeuronParams,
    NeuronParams,
    quantize_neuron,
    step_fixed,
    step_real,
)

Arithmetic = Literal["real", "fixed"]


class PreparedLayer:
    """Weights, neuron constants and geometry of one layer, ready to run."""

    def __init__(
        self,
        layer: LayerSpec,
        geometry: LayerGeometry,
        weight: np.ndarray,
        bias: np.ndarray,
        neuron: Union[NeuronParams, FixedNeuronParams],
        weight_format: Optional[FixedFormat] = None,
        bn_scale: Optional[np.ndarray] = None,
        bn_shift: Optional[np.ndarray] = None,
    ):
        self.layer = layer
        self.geometry = geometry
        self.weight = weight
        self.bias = bias
        self.neuron = neuron
        self.weight_format = weight_format
        self.bn_scale = bn_scale
        self.bn_shift = bn_shift

    @property
    def index(self) -> int:
        return self.geometry.index

    @property
    def is_fixed(self) -> bool:
        return self.weight_format is not None

    @property
    def depthwise(self) -> bool:
        return self.layer.kind == "avgpool"

    @property
    def potential_format(self) -> Optional[FixedFormat]:
        return self.neuron.format if isinstance(self.neuron, FixedNeuronParams) else None

    def zero_potentials(self) -> np.ndarray:
        if self.is_fixed:
            return np.zeros(self.geometry.out_shape, dtype=self.potential_format.array_dtype)
        return np.zeros(self.geometry.out_shape, dtype=np.float64)

    def zero_accumulator(self) -> np.ndarray:
        if self.is_fixed:
            return np.zeros(self.geometry.out_shape, dtype=self.weight_format.array_dtype)
        return np.zeros(self.geometry.out_shape, dtype=np.float64)

    def fire(
        self,
        v: np.ndarray,
        acc: np.ndarray,
        counter: Optional[SaturationCounter] = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Barrier phase: add bias once, then charge, fire and reset."""
        x = acc + self.bias[:, None, None]
        if self.is_fixed:
            x = align_raw(x, self.weight_format, self.potential_format)
            return step_fixed(v, x, self.neuron, counter)
        return step_real(v, x, self.neuron)


def _avgpool_weight(channels: int, kernel: tuple[int, int]) -> np.ndarray:
    w = np.zeros((channels, channels) + kernel)
    w[np.arange(channels), np.arange(channels)] = 1.0 / (kernel[0] * kernel[1])
    return w


def prepare_network(
    spec: NetworkSpec,
    arithmetic: Arithmetic,
    counter: Optional[SaturationCounter] = None,
) -> list[PreparedLayer]:
    """
    Resolve geometry, weights and neuron constants of every layer.

    Fixed-point runs quantize real weights on the fly and reject unfused
    batch normalization.

    Raises:
        UnfusedBatchNormError: fixed arithmetic on a network with BN.
        EngineInputError: missing or mis-shaped weights.
    """
    if arithmetic not in ("real", "fixed"):
        raise EngineInputError(f"unknown arithmetic {arithmetic!r}")
    if not spec.weights:
        raise EngineInputError(f"network {spec.name!r} has no weights attached")
    if arithmetic == "fixed":
        for i, layer in enumerate(spec.layers):
            if layer.batchnorm is not None:
                raise UnfusedBatchNormError(i)
        if not spec.is_quantized:
            spec = quantize_network(spec, counter)

    prepared = []
    for g, layer, w in zip(layer_geometry(spec), spec.layers, spec.weights):
        formats = spec.layer_formats(g.index)
        c_in = g.in_shape[0]
        expected = (layer.out_channels, c_in, g.kernel[0], g.kernel[1])

        if layer.kind == "avgpool":
            real_w = _avgpool_weight(c_in, g.kernel)
            weight_tensor = FixedTensor.from_real(real_w, formats.weights)
            real_b = None
        else:
            if w is None:
                raise EngineInputError(f"layer {g.index} has no weights")
            if w.shape != expected:
                raise EngineInputError(
                    f"layer {g.index}: weights {w.shape}, geometry needs {expected}"
                )
            weight_tensor = w.weight if isinstance(w.weight, FixedTensor) else None
            real_w = w.real_weight()
            real_b = w.real_bias()

        if arithmetic == "fixed":
            fmt = weight_tensor.format
            weight = weight_tensor.to_raw().astype(fmt.array_dtype)
            if w is not None and isinstance(w.bias, FixedTensor):
                bias = align_raw(w.bias.to_raw(), w.bias.format, fmt)
            else:
                bias = np.zeros(layer.out_channels, dtype=fmt.array_dtype)
            neuron = quantize_neuron(layer.neuron, formats.potentials, formats.thresholds)
            prepared.append(PreparedLayer(layer, g, weight, bias, neuron, weight_format=fmt))
        else:
            bias = real_b if real_b is not None else np.zeros(layer.out_channels)
            bn = layer.batchnorm
            prepared.append(
                PreparedLayer(
                    layer, g, real_w, np.asarray(bias, dtype=np.float64), layer.neuron,
                    bn_scale=None if bn is None else bn.scale(),
                    bn_shift=None if bn is None else bn.shift(),
                )
            )
    return prepared


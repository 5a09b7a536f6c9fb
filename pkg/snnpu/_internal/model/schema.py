"""
Network Schema - Declarative SNN description

Design rules:
- Immutable after construction (transformations return new specs)
- Every layer is a spiking layer: its outputs go through a neuron
- Kernels, strides and paddings are normalized to (h, w); 1D layers use h = 1
- Weights are stored per layer as (out, in, kh, kw), real or FixedTensor
"""

from __future__ import annotations

from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from snnpu._internal.fixedpoint import FixedFormat, FixedTensor, Q8_8
from snnpu._internal.neuron import NeuronParams


LayerKind = Literal["conv2d", "conv1d", "fully_connected", "avgpool"]
FormatRole = Literal["weights", "potentials", "thresholds"]


class FormatSet(BaseModel):
    """Fixed-point format per role."""
    model_config = ConfigDict(frozen=True)

    weights: FixedFormat = Q8_8
    potentials: FixedFormat = Q8_8
    thresholds: FixedFormat = Q8_8

    @classmethod
    def uniform(cls, fmt: FixedFormat) -> "FormatSet":
        return cls(weights=fmt, potentials=fmt, thresholds=fmt)

    @property
    def is_uniform(self) -> bool:
        return self.weights == self.potentials == self.thresholds


class BatchNormParams(BaseModel):
    """
    Batch normalization applied to the layer INPUT channels (BN before conv).
    """
    model_config = ConfigDict(frozen=True)

    gamma: tuple[float, ...]
    beta: tuple[float, ...]
    mean: tuple[float, ...]
    variance: tuple[float, ...]
    epsilon: float = Field(default=1e-5, ge=0.0)

    @model_validator(mode="after")
    def _check(self) -> "BatchNormParams":
        n = len(self.gamma)
        if not (len(self.beta) == len(self.mean) == len(self.variance) == n):
            raise ValueError("BatchNorm vectors must have equal lengths")
        if any(v < 0 for v in self.variance):
            raise ValueError("BatchNorm variance must be >= 0")
        return self

    @classmethod
    def identity(cls, channels: int, epsilon: float = 0.0) -> "BatchNormParams":
        return cls(
            gamma=(1.0,) * channels,
            beta=(0.0,) * channels,
            mean=(0.0,) * channels,
            variance=(1.0,) * channels,
            epsilon=epsilon,
        )

    @property
    def channels(self) -> int:
        return len(self.gamma)

    def scale(self) -> np.ndarray:
        """s_c = gamma_c / sqrt(variance_c + epsilon)"""
        return np.asarray(self.gamma) / np.sqrt(np.asarray(self.variance) + self.epsilon)

    def shift(self) -> np.ndarray:
        """beta_c - mean_c * s_c"""
        return np.asarray(self.beta) - np.asarray(self.mean) * self.scale()


class LayerSpec(BaseModel):
    """
    One spiking layer.

    fully_connected layers take their kernel from the input spatial size at
    shape-inference time; their kernel field is ignored.
    """
    model_config = ConfigDict(frozen=True)

    kind: LayerKind = "conv2d"
    out_channels: int = Field(ge=1)
    kernel: tuple[int, int] = (3, 3)
    stride: tuple[int, int] = (1, 1)
    padding: tuple[int, int] = (0, 0)
    has_bias: bool = True
    neuron: NeuronParams = NeuronParams()
    batchnorm: Optional[BatchNormParams] = None
    extract: bool = False
    npu_count: int = Field(default=1, ge=1)
    formats: Optional[FormatSet] = None

    @model_validator(mode="after")
    def _check(self) -> "LayerSpec":
        if min(self.kernel) < 1 or min(self.stride) < 1:
            raise ValueError("kernel and stride must be >= 1")
        if min(self.padding) < 0:
            raise ValueError("padding must be >= 0")
        if self.kind == "avgpool" and (self.has_bias or self.batchnorm is not None):
            raise ValueError("avgpool layers carry no bias and no batchnorm")
        return self

    @property
    def trainable(self) -> bool:
        return self.kind != "avgpool"


class LayerWeights(BaseModel):
    """Weights (out, in, kh, kw) and optional bias (out,) of one layer."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    weight: Union[FixedTensor, np.ndarray]
    bias: Optional[Union[FixedTensor, np.ndarray]] = None

    @property
    def is_fixed(self) -> bool:
        return isinstance(self.weight, FixedTensor)

    @property
    def shape(self) -> tuple[int, ...]:
        if isinstance(self.weight, FixedTensor):
            return self.weight.shape
        return tuple(self.weight.shape)

    def real_weight(self) -> np.ndarray:
        if isinstance(self.weight, FixedTensor):
            return self.weight.dequantize()
        return np.asarray(self.weight, dtype=np.float64)

    def real_bias(self) -> Optional[np.ndarray]:
        if self.bias is None:
            return None
        if isinstance(self.bias, FixedTensor):
            return self.bias.dequantize()
        return np.asarray(self.bias, dtype=np.float64)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LayerWeights):
            return NotImplemented
        return _tensor_equal(self.weight, other.weight) and _tensor_equal(self.bias, other.bias)

    __hash__ = None  # type: ignore[assignment]


def _tensor_equal(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    if isinstance(a, FixedTensor) or isinstance(b, FixedTensor):
        return a == b
    return a.dtype == b.dtype and a.shape == b.shape and np.array_equal(a, b)


class NetworkSpec(BaseModel):
    """
    Complete network: input geometry, layers, weights and default formats.

    input_shape is (channels, height, width) or (channels, length).
    weights has one entry per layer (None for avgpool layers).
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str = "network"
    input_shape: tuple[int, ...]
    timesteps: int = Field(default=1, ge=1)
    layers: tuple[LayerSpec, ...]
    weights: tuple[Optional[LayerWeights], ...] = ()
    default_formats: FormatSet = FormatSet()

    @model_validator(mode="after")
    def _check(self) -> "NetworkSpec":
        if len(self.input_shape) not in (2, 3) or min(self.input_shape) < 1:
            raise ValueError(f"input_shape must be (C, H, W) or (C, L), got {self.input_shape}")
        if not self.layers:
            raise ValueError("a network needs at least one layer")
        if self.weights and len(self.weights) != len(self.layers):
            raise ValueError(
                f"{len(self.weights)} weight entries for {len(self.layers)} layers"
            )
        return self

    @property
    def is_1d(self) -> bool:
        return len(self.input_shape) == 2

    @property
    def input_shape_3d(self) -> tuple[int, int, int]:
        if self.is_1d:
            return (self.input_shape[0], 1, self.input_shape[1])
        return tuple(self.input_shape)  # type: ignore[return-value]

    @property
    def extract_indices(self) -> list[int]:
        return [i for i, layer in enumerate(self.layers) if layer.extract]

    @property
    def is_quantized(self) -> bool:
        return bool(self.weights) and all(w is None or w.is_fixed for w in self.weights)

    @property
    def has_unfused_batchnorm(self) -> bool:
        return any(layer.batchnorm is not None for layer in self.layers)

    def layer_formats(self, index: int) -> FormatSet:
        return self.layers[index].formats or self.default_formats

    def with_weights(self, weights: list[Optional[LayerWeights]]) -> "NetworkSpec":
        return self.model_copy(update={"weights": tuple(weights)})

    def with_layers(self, layers: list[LayerSpec]) -> "NetworkSpec":
        return self.model_copy(update={"layers": tuple(layers)})


class LayerStats(BaseModel):
    """Per-layer accounting."""
    model_config = ConfigDict(frozen=True)

    index: int
    kind: LayerKind
    output_shape: tuple[int, ...]
    fan_in: int
    synapses: int
    kernels: int
    neurons: int


class ModelStats(BaseModel):
    """
    Network accounting.

    inputs   = input elements per timestep
    synapses = sum of weights + biases of trainable layers
    kernels  = sum of output channels of trainable layers
    neurons  = sum of spiking output elements
    """
    model_config = ConfigDict(frozen=True)

    inputs: int = Field(ge=0)
    synapses: int = Field(ge=0)
    kernels: int = Field(ge=0)
    neurons: int = Field(ge=0)
    layers: list[LayerStats] = Field(default_factory=list)

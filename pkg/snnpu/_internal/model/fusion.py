"""
BN Fusion and Post-Training Quantization

BN-before-CONV fusion, with s_c = gamma_c / sqrt(var_c + eps) over the conv
INPUT channel c:

    W'[o, c, :, :] = W[o, c, :, :] * s_c
    b'[o]          = b[o] + sum_c (beta_c - mean_c * s_c) * sum_k W[o, c, k]

The fused conv equals BN followed by the conv in real arithmetic when the
layer has no padding. With padding, the fused conv also normalizes the
zero padding (it equals pad -> BN -> conv), since the bias term covers the
whole kernel window.

The CONV-before-BN form, for reference only:
    W'[o] = W[o] * s_o,  b'[o] = (b[o] - mean_o) * s_o + beta_o
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from snnpu._internal.errors import BatchNormFusionError
from snnpu._internal.fixedpoint import FixedTensor, SaturationCounter
from snnpu._internal.model.schema import LayerSpec, LayerWeights, NetworkSpec

logger = logging.getLogger(__name__)


def fuse_batchnorm(
    layer: LayerSpec, weights: LayerWeights
) -> tuple[LayerSpec, LayerWeights]:
    """
    Fold the layer's input batch normalization into its weights and bias.

    Returns the layer without batchnorm (and with a bias) and the fused
    real weights.

    Raises:
        BatchNormFusionError: no batchnorm, quantized weights, or channel
            count mismatch.
    """
    bn = layer.batchnorm
    if bn is None:
        raise BatchNormFusionError("layer has no batchnorm to fuse")
    if weights.is_fixed:
        raise BatchNormFusionError("fuse before quantization; weights are already fixed-point")

    w = weights.real_weight()
    if w.ndim != 4 or w.shape[1] != bn.channels:
        raise BatchNormFusionError(
            f"batchnorm covers {bn.channels} channels, weights have shape {w.shape}"
        )

    if max(layer.padding) > 0:
        logger.warning(
            "fusing batchnorm into a layer with padding %s: border outputs also normalize the zero padding",
            layer.padding,
        )
    scale = bn.scale()
    shift = bn.shift()
    fused_w = w * scale[None, :, None, None]
    bias = weights.real_bias()
    if bias is None:
        bias = np.zeros(w.shape[0])
    fused_b = bias + np.einsum("c,ock->o", shift, w.reshape(w.shape[0], w.shape[1], -1))

    fused_layer = layer.model_copy(update={"batchnorm": None, "has_bias": True})
    return fused_layer, LayerWeights(weight=fused_w, bias=fused_b)


def fuse_network(spec: NetworkSpec) -> NetworkSpec:
    """Fuse every batchnorm of a network."""
    layers = list(spec.layers)
    weights = list(spec.weights)
    for i, layer in enumerate(layers):
        if layer.batchnorm is None:
            continue
        if weights[i] is None:
            raise BatchNormFusionError(f"layer {i} has batchnorm but no weights")
        layers[i], weights[i] = fuse_batchnorm(layer, weights[i])
        logger.debug("fused batchnorm into layer %d", i)
    return spec.with_layers(layers).with_weights(weights)


def quantize_network(
    spec: NetworkSpec, counter: Optional[SaturationCounter] = None
) -> NetworkSpec:
    """
    Quantize real weights and biases into each layer's weights format.

    Already quantized layers are kept as they are. Saturations are counted.
    """
    if spec.has_unfused_batchnorm:
        spec = fuse_network(spec)
    counter = counter if counter is not None else SaturationCounter()
    before = counter.count
    weights = []
    for i, w in enumerate(spec.weights):
        if w is None or w.is_fixed:
            weights.append(w)
            continue
        fmt = spec.layer_formats(i).weights
        bias = w.real_bias()
        weights.append(
            LayerWeights(
                weight=FixedTensor.from_real(w.real_weight(), fmt, counter),
                bias=None if bias is None else FixedTensor.from_real(bias, fmt, counter),
            )
        )
    if counter.count > before:
        logger.warning(
            "%d weight values saturated while quantizing %s", counter.count - before, spec.name
        )
    return spec.with_weights(weights)

"""
Reference networks and synthetic network generation.

Random weights are dyadic (multiples of 2^-8) so that real-arithmetic runs
sum exactly and quantize to Q8,8 without loss.
"""

from __future__ import annotations

from importlib import resources
from typing import Optional

import numpy as np

from snnpu._internal.model.parser import parse_model_config
from snnpu._internal.model.schema import LayerSpec, LayerWeights, NetworkSpec
from snnpu._internal.model.shapes import layer_geometry
from snnpu._internal.neuron import NeuronParams


REFERENCE_MODELS = {
    "small-32-st-vgg": "small_32_st_vgg.snn",
    "scnn-gsc": "scnn_gsc.snn",
}

_DYADIC = 256


def reference_config_text(name: str) -> str:
    """Config text of a shipped reference network."""
    try:
        filename = REFERENCE_MODELS[name]
    except KeyError:
        known = ", ".join(sorted(REFERENCE_MODELS))
        raise KeyError(f"Unknown reference model {name!r}; known: {known}") from None
    return resources.files("snnpu.models").joinpath(filename).read_text(encoding="utf-8")


def load_reference(name: str) -> NetworkSpec:
    """Load a shipped reference network with zero weights."""
    return parse_model_config(reference_config_text(name))


def _dyadic(rng: np.random.Generator, shape, low: int, high: int) -> np.ndarray:
    return rng.integers(low, high, size=shape).astype(np.float64) / _DYADIC


def randomize_weights(
    spec: NetworkSpec, seed: int = 0, low: float = -0.75, high: float = 1.0
) -> NetworkSpec:
    """Replace every trainable layer's weights with dyadic uniform values."""
    rng = np.random.default_rng(seed)
    lo, hi = int(low * _DYADIC), int(high * _DYADIC)
    weights: list[Optional[LayerWeights]] = []
    for g, layer in zip(layer_geometry(spec), spec.layers):
        if not layer.trainable:
            weights.append(None)
            continue
        shape = (layer.out_channels, g.in_shape[0], g.kernel[0], g.kernel[1])
        bias = _dyadic(rng, layer.out_channels, lo // 8, hi // 8) if layer.has_bias else None
        weights.append(LayerWeights(weight=_dyadic(rng, shape, lo, hi), bias=bias))
    return spec.with_weights(weights)


def _random_neuron(rng: np.random.Generator) -> NeuronParams:
    if rng.random() < 0.4:
        return NeuronParams(kind="IF", tau=None, v_threshold=float(rng.choice([0.5, 1.0])))
    return NeuronParams(
        kind="LIF",
        tau=float(rng.choice([2.0, 4.0])),
        v_threshold=float(rng.choice([0.5, 1.0])),
        leak_form=str(rng.choice(["decay_input", "shift_leak"])),
    )


def random_network(
    seed: int,
    max_layers: int = 4,
    input_shape: Optional[tuple[int, int, int]] = None,
    timesteps: Optional[int] = None,
    allow_pooling: bool = True,
) -> NetworkSpec:
    """
    Small random 2D network with dyadic real weights and mixed IF/LIF layers.

    Inputs default to at most 2x12x12 and timesteps to at most 20.
    """
    rng = np.random.default_rng(seed)
    if input_shape is None:
        input_shape = (
            int(rng.integers(1, 3)),
            int(rng.integers(4, 13)),
            int(rng.integers(4, 13)),
        )
    if timesteps is None:
        timesteps = int(rng.integers(1, 21))

    _, h, w = input_shape
    layers = []
    for i in range(int(rng.integers(1, max_layers + 1))):
        neuron = _random_neuron(rng)
        extract = bool(rng.random() < 0.5)
        roll = rng.random()
        channels = layers[-1].out_channels if layers else input_shape[0]
        if allow_pooling and roll < 0.15 and min(h, w) >= 2:
            layer = LayerSpec(
                kind="avgpool", out_channels=channels, kernel=(2, 2), stride=(2, 2),
                has_bias=False, neuron=neuron, extract=extract,
            )
            h, w = h // 2, w // 2
        elif roll < 0.25 and i > 0:
            layer = LayerSpec(
                kind="fully_connected", out_channels=int(rng.integers(2, 9)),
                kernel=(1, 1), neuron=neuron, extract=extract,
            )
            h, w = 1, 1
        else:
            k = int(rng.choice([1, 2, 3] if min(h, w) >= 2 else [1, 3]))
            s = 2 if (rng.random() < 0.3 and min(h, w) >= 4) else 1
            p = k // 2 if k % 2 == 1 else 0
            layer = LayerSpec(
                kind="conv2d", out_channels=int(rng.integers(2, 9)), kernel=(k, k),
                stride=(s, s), padding=(p, p), has_bias=bool(rng.random() < 0.8),
                neuron=neuron, extract=extract,
            )
            h = (h + 2 * p - k) // s + 1
            w = (w + 2 * p - k) // s + 1
        layers.append(layer)

    if not any(layer.extract for layer in layers):
        layers[-1] = layers[-1].model_copy(update={"extract": True})

    spec = NetworkSpec(
        name=f"random-{seed}",
        input_shape=input_shape,
        timesteps=timesteps,
        layers=tuple(layers),
    )
    return randomize_weights(spec, seed=seed)

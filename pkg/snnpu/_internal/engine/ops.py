"""
Convolution kernels: dense sliding-window and per-spike scatter.

Both produce the same sums: the dense form correlates the whole input
with the kernel, the scatter form adds one weight column per affected
output neuron of each incoming spike. Integer sums are exact, so the two
agree bit for bit whatever the order.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from snnpu._internal.engine.prepared import PreparedLayer
from snnpu._internal.model.shapes import LayerGeometry


def conv_dense(x: np.ndarray, weight: np.ndarray, g: LayerGeometry) -> np.ndarray:
    """
    Cross-correlate x (C, H, W) with weight (O, C, kh, kw).

    Returns (O, Ho, Wo) in the common dtype of x and weight.
    """
    (kh, kw), (sh, sw), (ph, pw) = g.kernel, g.stride, g.padding
    _, ho, wo = g.out_shape
    if ph or pw:
        x = np.pad(x, ((0, 0), (ph, ph), (pw, pw)))
    windows = sliding_window_view(x, (kh, kw), axis=(1, 2))
    windows = windows[:, : (ho - 1) * sh + 1 : sh, : (wo - 1) * sw + 1 : sw]
    return np.tensordot(weight, windows, axes=([1, 2, 3], [0, 3, 4]))


def _axis_span(pos: np.ndarray, kernel: int, stride: int, pad: int, size: int):
    """First and last output index whose window covers input position pos."""
    lo = -((kernel - 1 - pos - pad) // stride)
    hi = (pos + pad) // stride
    return np.maximum(lo, 0), np.minimum(hi, size - 1)


def overlap_counts(layer: PreparedLayer, entries: np.ndarray) -> np.ndarray:
    """
    Membrane updates caused by each incoming spike (channel, y, x).

    An update is one (output channel, output position) pair whose kernel
    window covers the spike, clipped at the borders.
    """
    if not len(entries):
        return np.zeros(0, dtype=np.int64)
    g = layer.geometry
    _, ho, wo = g.out_shape
    y0, y1 = _axis_span(entries[:, 1], g.kernel[0], g.stride[0], g.padding[0], ho)
    x0, x1 = _axis_span(entries[:, 2], g.kernel[1], g.stride[1], g.padding[1], wo)
    positions = np.maximum(y1 - y0 + 1, 0) * np.maximum(x1 - x0 + 1, 0)
    fanout = 1 if layer.depthwise else g.out_shape[0]
    return (positions * fanout).astype(np.int64)


def scatter_spikes(layer: PreparedLayer, entries: np.ndarray, acc: np.ndarray) -> None:
    """
    Add the contribution of incoming spikes to the accumulator in place.

    acc is (O, Ho, Wo). Spikes are grouped per kernel offset so each
    offset is one vectorized scatter.
    """
    if not len(entries):
        return
    g = layer.geometry
    (kh, kw), (sh, sw), (ph, pw) = g.kernel, g.stride, g.padding
    _, ho, wo = g.out_shape
    c, yi, xi = entries[:, 0], entries[:, 1], entries[:, 2]
    # (Ho, Wo, O) view so a spike's update is one row
    acc_t = acc.transpose(1, 2, 0)

    for ky in range(kh):
        ny = yi + ph - ky
        yo = ny // sh
        ok_y = (ny % sh == 0) & (yo >= 0) & (yo < ho)
        for kx in range(kw):
            nx = xi + pw - kx
            xo = nx // sw
            ok = ok_y & (nx % sw == 0) & (xo >= 0) & (xo < wo)
            if not ok.any():
                continue
            if layer.depthwise:
                np.add.at(acc, (c[ok], yo[ok], xo[ok]), layer.weight[c[ok], c[ok], ky, kx])
            else:
                np.add.at(acc_t, (yo[ok], xo[ok]), layer.weight[:, c[ok], ky, kx].T)

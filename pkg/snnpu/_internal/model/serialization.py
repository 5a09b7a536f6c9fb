"""
Model File Format

Little-endian binary container with a text header:

    magic       4 bytes  b"SNNW"
    version     u16
    header_len  u32, then header_len bytes of UTF-8 model config text
    layer_count u16
    per layer:  tensor weight, tensor bias, u8 bn flag
                [bn: tensor gamma, beta, mean, variance (f64), f64 epsilon]

    tensor:     u8 tag (0 absent, 1 f32, 2 f64, 3 fixed)
                [fixed: u8 integer_bits, u8 fraction_bits]
                u8 ndim, u32 dims..., payload row-major
                (f32/f64 IEEE values, fixed raw values as i64)
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from snnpu._internal.errors import ModelFileError
from snnpu._internal.fixedpoint import FixedFormat, FixedTensor
from snnpu._internal.model.parser import parse_model_config, render_model_config
from snnpu._internal.model.schema import BatchNormParams, LayerWeights, NetworkSpec

MAGIC = b"SNNW"
VERSION = 1

_TAG_ABSENT = 0
_TAG_F32 = 1
_TAG_F64 = 2
_TAG_FIXED = 3


class _Reader:
    """Cursor over a byte payload; running past the end is a truncation."""

    def __init__(self, data: bytes):
        self._data = memoryview(data)
        self._pos = 0

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise ModelFileError("truncated payload")
        chunk = self._data[self._pos:self._pos + n].tobytes()
        self._pos += n
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    @property
    def remaining(self) -> int:
        return len(self._data) - self._pos


def _write_tensor(out: list[bytes], tensor: Union[FixedTensor, np.ndarray, None]) -> None:
    if tensor is None:
        out.append(struct.pack("<B", _TAG_ABSENT))
        return
    if isinstance(tensor, FixedTensor):
        out.append(struct.pack("<BBB", _TAG_FIXED, tensor.format.integer_bits, tensor.format.fraction_bits))
        shape = tensor.shape
        payload = np.asarray(tensor.data.astype(np.int64), dtype="<i8").tobytes()
    else:
        array = np.asarray(tensor)
        if array.dtype == np.float32:
            out.append(struct.pack("<B", _TAG_F32))
            payload = array.astype("<f4").tobytes()
        else:
            out.append(struct.pack("<B", _TAG_F64))
            payload = array.astype("<f8").tobytes()
        shape = array.shape
    out.append(struct.pack("<B", len(shape)))
    out.append(struct.pack(f"<{len(shape)}I", *shape))
    out.append(payload)


def _read_tensor(reader: _Reader) -> Union[FixedTensor, np.ndarray, None]:
    (tag,) = reader.unpack("<B")
    if tag == _TAG_ABSENT:
        return None
    fmt: Optional[FixedFormat] = None
    if tag == _TAG_FIXED:
        m, n = reader.unpack("<BB")
        try:
            fmt = FixedFormat(integer_bits=m, fraction_bits=n)
        except ValueError as e:
            raise ModelFileError(f"invalid tensor format Q{m},{n}: {e}") from None
    elif tag not in (_TAG_F32, _TAG_F64):
        raise ModelFileError(f"unknown tensor dtype tag {tag}")
    (ndim,) = reader.unpack("<B")
    shape = reader.unpack(f"<{ndim}I") if ndim else ()
    count = int(np.prod(shape, dtype=np.int64)) if shape else 1

    if tag == _TAG_F32:
        return np.frombuffer(reader.take(4 * count), dtype="<f4").reshape(shape).copy()
    if tag == _TAG_F64:
        return np.frombuffer(reader.take(8 * count), dtype="<f8").reshape(shape).astype(np.float64)
    raw = np.frombuffer(reader.take(8 * count), dtype="<i8").astype(np.int64)
    try:
        return FixedTensor.from_raw(raw.reshape(shape), fmt)
    except ValueError as e:
        raise ModelFileError(f"fixed tensor payload invalid: {e}") from None


def save_model(spec: NetworkSpec) -> bytes:
    """Serialize a network, weights included, to bytes."""
    header = render_model_config(spec).encode("utf-8")
    out = [MAGIC, struct.pack("<HI", VERSION, len(header)), header]
    weights = spec.weights or (None,) * len(spec.layers)
    out.append(struct.pack("<H", len(spec.layers)))
    for layer, w in zip(spec.layers, weights):
        _write_tensor(out, None if w is None else w.weight)
        _write_tensor(out, None if w is None else w.bias)
        bn = layer.batchnorm
        out.append(struct.pack("<B", 0 if bn is None else 1))
        if bn is not None:
            for vector in (bn.gamma, bn.beta, bn.mean, bn.variance):
                _write_tensor(out, np.asarray(vector, dtype=np.float64))
            out.append(struct.pack("<d", bn.epsilon))
    return b"".join(out)


def load_model(data: bytes) -> NetworkSpec:
    """
    Deserialize a network written by save_model.

    Raises:
        ModelFileError: bad magic, version mismatch or truncated payload.
    """
    reader = _Reader(data)
    if len(data) < len(MAGIC) or reader.take(len(MAGIC)) != MAGIC:
        raise ModelFileError("bad magic")
    version, header_len = reader.unpack("<HI")
    if version != VERSION:
        raise ModelFileError(f"version mismatch: file {version}, supported {VERSION}")
    try:
        header = reader.take(header_len).decode("utf-8")
    except UnicodeDecodeError:
        raise ModelFileError("header is not valid UTF-8") from None
    spec = parse_model_config(header)

    (count,) = reader.unpack("<H")
    if count != len(spec.layers):
        raise ModelFileError(f"payload has {count} layers, header declares {len(spec.layers)}")

    layers = list(spec.layers)
    weights: list[Optional[LayerWeights]] = []
    for i in range(count):
        weight = _read_tensor(reader)
        bias = _read_tensor(reader)
        weights.append(None if weight is None else LayerWeights(weight=weight, bias=bias))
        (has_bn,) = reader.unpack("<B")
        if has_bn:
            vectors = [_read_tensor(reader) for _ in range(4)]
            (epsilon,) = reader.unpack("<d")
            if any(v is None or isinstance(v, FixedTensor) for v in vectors):
                raise ModelFileError(f"layer {i}: batchnorm vectors must be real")
            gamma, beta, mean, variance = (tuple(float(x) for x in v) for v in vectors)
            layers[i] = layers[i].model_copy(
                update={
                    "batchnorm": BatchNormParams(
                        gamma=gamma, beta=beta, mean=mean, variance=variance, epsilon=epsilon
                    )
                }
            )
    if reader.remaining:
        raise ModelFileError(f"{reader.remaining} trailing bytes after the last layer")
    return spec.with_layers(layers).with_weights(weights)


def is_model_file(data: bytes) -> bool:
    return data[:len(MAGIC)] == MAGIC


def load_model_file(path: Union[str, Path]) -> NetworkSpec:
    """
    Load a binary model file or a text model config.

    Raises:
        FileNotFoundError: if the file does not exist.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Model file not found: {path}")
    data = path.read_bytes()
    if is_model_file(data):
        return load_model(data)
    return parse_model_config(data.decode("utf-8"))


def write_model_file(spec: NetworkSpec, path: Union[str, Path]) -> str:
    path = Path(path)
    path.write_bytes(save_model(spec))
    return str(path)

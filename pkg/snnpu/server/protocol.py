"""
Wire Protocol - length-prefixed binary messages between client and server

Every message is a 10-byte header followed by its payload:

    magic "SPKT" | version u8 | type u8 | length u32 | payload[length]

Design rules:
- All multi-byte integers are little-endian
- A header with a known magic and version but an unknown type is decoded
  far enough to skip its payload, so the connection survives
- Payload codecs are pure functions; decode(encode(x)) == x
"""

from __future__ import annotations

import asyncio
import re
import struct
from enum import IntEnum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from snnpu._internal.errors import ProtocolError, SnnpuError, UnknownMessageTypeError
from snnpu._internal.events.schema import SpikeList

MAGIC = b"SPKT"
VERSION = 1
HEADER = struct.Struct("<4sBBI")
HEADER_SIZE = HEADER.size
MAX_PAYLOAD = 1 << 26

# Sparse lists are sent below this density, bitmaps at or above it
SPARSE_DENSITY_LIMIT = 0.5


class MessageType(IntEnum):
    HELLO = 1
    FRAME = 2
    RESULT = 3
    RESET = 4
    END = 5
    ERROR = 6


class FrameEncoding(IntEnum):
    SPARSE = 0
    BITMAP = 1


class WireMessage(BaseModel):
    model_config = ConfigDict(frozen=True)

    type: MessageType
    payload: bytes = b""
    version: int = VERSION

    @property
    def length(self) -> int:
        return len(self.payload)

    def encode(self) -> bytes:
        return HEADER.pack(MAGIC, self.version, int(self.type), len(self.payload)) + self.payload


def decode_header(data: bytes) -> tuple[int, int]:
    """
    Validate a header and return (type_code, payload length).

    Raises:
        ProtocolError: short header, bad magic, version mismatch or an
            oversized payload length.
    """
    if len(data) != HEADER_SIZE:
        raise ProtocolError(f"header must be {HEADER_SIZE} bytes, got {len(data)}")
    magic, version, type_code, length = HEADER.unpack(data)
    if magic != MAGIC:
        raise ProtocolError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ProtocolError(f"version mismatch: got {version}, expected {VERSION}")
    if length > MAX_PAYLOAD:
        raise ProtocolError(f"payload length {length} exceeds {MAX_PAYLOAD}")
    return type_code, length


def _message_type(type_code: int, length: int) -> MessageType:
    try:
        return MessageType(type_code)
    except ValueError:
        raise UnknownMessageTypeError(type_code, length) from None


def decode_message(data: bytes) -> WireMessage:
    """
    Decode one complete message.

    Raises:
        ProtocolError: malformed header or length mismatch.
        UnknownMessageTypeError: well-formed header with an unknown type.
    """
    type_code, length = decode_header(data[:HEADER_SIZE])
    payload = data[HEADER_SIZE:]
    if len(payload) != length:
        raise ProtocolError(f"header announces {length} payload bytes, got {len(payload)}")
    return WireMessage(type=_message_type(type_code, length), payload=payload)


async def read_message(reader: asyncio.StreamReader) -> WireMessage:
    """
    Read one message from a stream.

    An unknown type raises UnknownMessageTypeError after its payload has been
    consumed. asyncio.IncompleteReadError propagates when the peer closes.
    """
    type_code, length = decode_header(await reader.readexactly(HEADER_SIZE))
    payload = await reader.readexactly(length) if length else b""
    return WireMessage(type=_message_type(type_code, length), payload=payload)


async def write_message(writer: asyncio.StreamWriter, message: WireMessage) -> None:
    writer.write(message.encode())
    await writer.drain()


class _Cursor:
    def __init__(self, data: bytes, what: str):
        self.data = data
        self.offset = 0
        self.what = what

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise ProtocolError(f"truncated {self.what} payload")
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def finish(self) -> None:
        if self.offset != len(self.data):
            raise ProtocolError(f"{len(self.data) - self.offset} trailing bytes in {self.what} payload")


# =============================================================================
# HELLO
# =============================================================================

_HELLO = struct.Struct("<HHHB")


class HelloPayload(BaseModel):
    """Input geometry the client will stream; the server echoes its own."""
    model_config = ConfigDict(frozen=True)

    channels: int = Field(ge=1, le=0xFFFF)
    height: int = Field(ge=1, le=0xFFFF)
    width: int = Field(ge=1, le=0xFFFF)
    want_maps: bool = False

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.channels, self.height, self.width)


def encode_hello(hello: HelloPayload) -> bytes:
    return _HELLO.pack(hello.channels, hello.height, hello.width, int(hello.want_maps))


def decode_hello(data: bytes) -> HelloPayload:
    if len(data) != _HELLO.size:
        raise ProtocolError(f"HELLO payload must be {_HELLO.size} bytes, got {len(data)}")
    channels, height, width, flags = _HELLO.unpack(data)
    if min(channels, height, width) < 1:
        raise ProtocolError("HELLO geometry must be positive")
    return HelloPayload(channels=channels, height=height, width=width, want_maps=bool(flags & 1))


# =============================================================================
# FRAME
# =============================================================================

_FRAME = struct.Struct("<IBHHH")


class FramePayload(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    window_index: int = Field(ge=0, le=0xFFFFFFFF)
    spikes: SpikeList


def choose_encoding(spikes: SpikeList) -> FrameEncoding:
    return FrameEncoding.SPARSE if spikes.density < SPARSE_DENSITY_LIMIT else FrameEncoding.BITMAP


def encode_frame(frame: FramePayload, encoding: Optional[FrameEncoding] = None) -> bytes:
    spikes = frame.spikes
    if encoding is None:
        encoding = choose_encoding(spikes)
    c, h, w = spikes.shape
    if max(c, h, w) > 0xFFFF:
        raise ProtocolError(f"frame shape {spikes.shape} does not fit the wire format")
    head = _FRAME.pack(frame.window_index, int(encoding), c, h, w)
    entries = np.asarray(spikes.entries, dtype=np.int64).reshape(-1, 3)
    if encoding == FrameEncoding.SPARSE:
        return head + struct.pack("<I", len(entries)) + entries.astype("<u2").tobytes()
    bits = np.zeros(c * h * w, dtype=np.uint8)
    if len(entries):
        bits[np.ravel_multi_index(entries.T, (c, h, w))] = 1
    return head + np.packbits(bits).tobytes()


def decode_frame(data: bytes) -> FramePayload:
    """
    Raises:
        ProtocolError: truncated payload, unknown encoding, coordinates out of
            range or duplicated.
    """
    cur = _Cursor(data, "FRAME")
    window, encoding, c, h, w = cur.unpack(_FRAME.format)
    if min(c, h, w) < 1:
        raise ProtocolError("FRAME shape must be positive")
    size = c * h * w
    if encoding == FrameEncoding.SPARSE:
        (count,) = cur.unpack("<I")
        if count > size:
            raise ProtocolError(f"{count} spikes cannot fit a {c}x{h}x{w} frame")
        raw = np.frombuffer(cur.take(6 * count), dtype="<u2").reshape(count, 3)
        entries = raw.astype(np.int64)
        if count:
            if np.any(entries >= np.array([c, h, w])):
                raise ProtocolError("spike coordinates outside the frame")
            flat = np.ravel_multi_index(entries.T, (c, h, w))
            order = np.argsort(flat, kind="stable")
            if np.any(np.diff(flat[order]) == 0):
                raise ProtocolError("duplicate spike coordinates")
            entries = entries[order]
    elif encoding == FrameEncoding.BITMAP:
        packed = np.frombuffer(cur.take((size + 7) // 8), dtype=np.uint8)
        bits = np.unpackbits(packed)[:size].reshape(c, h, w)
        entries = np.argwhere(bits).astype(np.int64)
    else:
        raise ProtocolError(f"unknown frame encoding {encoding}")
    cur.finish()
    return FramePayload(
        window_index=window,
        spikes=SpikeList(timestep=window, shape=(c, h, w), entries=entries.reshape(-1, 3)),
    )


# =============================================================================
# RESULT
# =============================================================================

_RESULT = struct.Struct("<IdH")


class ResultPayload(BaseModel):
    """Per-window answer: extraction-layer spike counts, latency, optional maps."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    window_index: int = Field(ge=0, le=0xFFFFFFFF)
    latency_s: float = 0.0
    counts: tuple[int, ...] = ()
    feature_maps: Optional[tuple[np.ndarray, ...]] = None

    @property
    def total_spikes(self) -> int:
        return sum(self.counts)


def encode_result(result: ResultPayload) -> bytes:
    parts = [
        _RESULT.pack(result.window_index, result.latency_s, len(result.counts)),
        np.asarray(result.counts, dtype="<u4").tobytes(),
    ]
    maps = result.feature_maps
    if maps is not None and len(maps) != len(result.counts):
        raise ProtocolError(f"{len(maps)} feature maps for {len(result.counts)} counts")
    parts.append(struct.pack("<B", 0 if maps is None else 1))
    for fmap in maps or ():
        fmap = np.asarray(fmap)
        parts.append(struct.pack(f"<B{fmap.ndim}H", fmap.ndim, *fmap.shape))
        parts.append(np.packbits((fmap != 0).astype(np.uint8).ravel()).tobytes())
    return b"".join(parts)


def decode_result(data: bytes) -> ResultPayload:
    cur = _Cursor(data, "RESULT")
    window, latency, n = cur.unpack(_RESULT.format)
    counts = tuple(int(v) for v in np.frombuffer(cur.take(4 * n), dtype="<u4"))
    (flag,) = cur.unpack("<B")
    maps: Optional[tuple[np.ndarray, ...]] = None
    if flag:
        decoded = []
        for _ in range(n):
            (ndim,) = cur.unpack("<B")
            shape = cur.unpack(f"<{ndim}H")
            size = int(np.prod(shape))
            packed = np.frombuffer(cur.take((size + 7) // 8), dtype=np.uint8)
            decoded.append(np.unpackbits(packed)[:size].reshape(shape))
        maps = tuple(decoded)
    cur.finish()
    return ResultPayload(window_index=window, latency_s=latency, counts=counts, feature_maps=maps)


# =============================================================================
# ERROR
# =============================================================================

class ErrorPayload(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: int = Field(ge=0, le=0xFFFF)
    message: str = ""


_CODE_DIGITS = re.compile(r"(\d+)$")


def error_code_number(exc: BaseException) -> int:
    """Numeric part of an SnnpuError code (SNNPU_E603 -> 603); 0 otherwise."""
    if isinstance(exc, SnnpuError):
        match = _CODE_DIGITS.search(exc.code)
        if match:
            return int(match.group(1))
    return 0


def error_from_exception(exc: BaseException) -> ErrorPayload:
    return ErrorPayload(code=error_code_number(exc), message=str(exc))


def encode_error(error: ErrorPayload) -> bytes:
    return struct.pack("<H", error.code) + error.message.encode("utf-8")


def decode_error(data: bytes) -> ErrorPayload:
    if len(data) < 2:
        raise ProtocolError("truncated ERROR payload")
    (code,) = struct.unpack("<H", data[:2])
    try:
        message = data[2:].decode("utf-8")
    except UnicodeDecodeError:
        raise ProtocolError("ERROR message is not UTF-8") from None
    return ErrorPayload(code=code, message=message)


def hello_message(hello: HelloPayload) -> WireMessage:
    return WireMessage(type=MessageType.HELLO, payload=encode_hello(hello))


def frame_message(frame: FramePayload, encoding: Optional[FrameEncoding] = None) -> WireMessage:
    return WireMessage(type=MessageType.FRAME, payload=encode_frame(frame, encoding))


def result_message(result: ResultPayload) -> WireMessage:
    return WireMessage(type=MessageType.RESULT, payload=encode_result(result))


def error_message(exc: BaseException) -> WireMessage:
    return WireMessage(type=MessageType.ERROR, payload=encode_error(error_from_exception(exc)))

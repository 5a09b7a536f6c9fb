"""snnpu streaming server, client and wire protocol."""

from snnpu.server.client import StreamClient, results_csv, stream_frames
from snnpu.server.protocol import (
    HEADER_SIZE,
    MAGIC,
    VERSION,
    ErrorPayload,
    FrameEncoding,
    FramePayload,
    HelloPayload,
    MessageType,
    ResultPayload,
    WireMessage,
    decode_error,
    decode_frame,
    decode_hello,
    decode_message,
    decode_result,
    encode_error,
    encode_frame,
    encode_hello,
    encode_result,
    read_message,
    write_message,
)
from snnpu.server.server import InferenceServer, serve

__all__ = [
    "StreamClient",
    "results_csv",
    "stream_frames",
    "HEADER_SIZE",
    "MAGIC",
    "VERSION",
    "ErrorPayload",
    "FrameEncoding",
    "FramePayload",
    "HelloPayload",
    "MessageType",
    "ResultPayload",
    "WireMessage",
    "decode_error",
    "decode_frame",
    "decode_hello",
    "decode_message",
    "decode_result",
    "encode_error",
    "encode_frame",
    "encode_hello",
    "encode_result",
    "read_message",
    "write_message",
    "InferenceServer",
    "serve",
]

"""
WIRE PROTOCOL TESTS

Proves the binary message codec:
  - Headers with bad magic, version or length are rejected
  - An unknown type is its own error, distinct from a broken header
  - Sparse and bitmap frames decode to the same sorted spike list
  - Malformed frame payloads never reach the engine
  - RESULT and ERROR payloads survive encoding
"""

import struct

import numpy as np
import pytest

from snnpu import SpikeList
from snnpu.errors import GeometryMismatchError, ProtocolError, UnknownMessageTypeError
from snnpu.server import (
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
)
from snnpu.server.protocol import (
    HEADER,
    choose_encoding,
    error_code_number,
    error_from_exception,
)


def _spikes(entries, shape=(2, 4, 5), timestep=0) -> SpikeList:
    return SpikeList(
        timestep=timestep, shape=shape, entries=np.array(entries, dtype=np.int64).reshape(-1, 3)
    )


def _sparse_payload(entries, shape=(2, 4, 5), window=0) -> bytes:
    c, h, w = shape
    head = struct.pack("<IBHHH", window, int(FrameEncoding.SPARSE), c, h, w)
    raw = np.array(entries, dtype="<u2").reshape(-1, 3)
    return head + struct.pack("<I", len(raw)) + raw.tobytes()


# ── Header ──────────────────────────────────────────────────────────

class TestHeader:
    """Fixed 10-byte header."""

    def test_header_size(self):
        assert HEADER_SIZE == 10

    def test_message_round_trip(self):
        message = WireMessage(type=MessageType.RESET)
        data = message.encode()
        assert data[:4] == MAGIC
        assert len(data) == HEADER_SIZE
        assert decode_message(data) == message

    def test_bad_magic(self):
        data = WireMessage(type=MessageType.END).encode()
        with pytest.raises(ProtocolError, match="magic"):
            decode_message(b"XXXX" + data[4:])

    def test_version_mismatch(self):
        data = HEADER.pack(MAGIC, VERSION + 1, int(MessageType.END), 0)
        with pytest.raises(ProtocolError, match="version"):
            decode_message(data)

    def test_short_header(self):
        with pytest.raises(ProtocolError):
            decode_message(MAGIC + b"\x01")

    def test_length_mismatch(self):
        data = WireMessage(type=MessageType.FRAME, payload=b"abcd").encode()
        with pytest.raises(ProtocolError, match="payload bytes"):
            decode_message(data[:-1])

    def test_oversized_length(self):
        data = HEADER.pack(MAGIC, VERSION, int(MessageType.FRAME), 1 << 30)
        with pytest.raises(ProtocolError, match="exceeds"):
            decode_message(data)

    def test_unknown_type(self):
        data = HEADER.pack(MAGIC, VERSION, 99, 3) + b"xyz"
        with pytest.raises(UnknownMessageTypeError) as exc:
            decode_message(data)
        assert exc.value.type_code == 99
        assert exc.value.length == 3

    def test_unknown_type_is_protocol_error(self):
        assert issubclass(UnknownMessageTypeError, ProtocolError)


# ── HELLO ───────────────────────────────────────────────────────────

class TestHello:
    """Geometry negotiation payload."""

    def test_round_trip(self):
        hello = HelloPayload(channels=2, height=304, width=240, want_maps=True)
        again = decode_hello(encode_hello(hello))
        assert again == hello
        assert again.shape == (2, 304, 240)

    def test_wrong_length(self):
        with pytest.raises(ProtocolError):
            decode_hello(b"\x00" * 6)

    def test_zero_geometry(self):
        with pytest.raises(ProtocolError):
            decode_hello(struct.pack("<HHHB", 0, 4, 4, 0))


# ── FRAME ───────────────────────────────────────────────────────────

class TestFrame:
    """Sparse and bitmap spike frames."""

    ENTRIES = [(0, 0, 1), (0, 3, 4), (1, 2, 2)]

    @pytest.mark.parametrize("encoding", [FrameEncoding.SPARSE, FrameEncoding.BITMAP])
    def test_encodings_agree(self, encoding):
        frame = FramePayload(window_index=7, spikes=_spikes(self.ENTRIES))
        again = decode_frame(encode_frame(frame, encoding))
        assert again.window_index == 7
        assert again.spikes.shape == (2, 4, 5)
        assert again.spikes.timestep == 7
        np.testing.assert_array_equal(again.spikes.entries, np.array(self.ENTRIES))

    def test_empty_frame(self):
        frame = FramePayload(window_index=0, spikes=_spikes([]))
        for encoding in FrameEncoding:
            assert len(decode_frame(encode_frame(frame, encoding)).spikes) == 0

    def test_encoding_follows_density(self):
        assert choose_encoding(_spikes(self.ENTRIES)) == FrameEncoding.SPARSE
        dense = [(c, y, x) for c in range(2) for y in range(4) for x in range(5)]
        assert choose_encoding(_spikes(dense)) == FrameEncoding.BITMAP

    def test_unsorted_sparse_is_sorted(self):
        frame = decode_frame(_sparse_payload([(1, 2, 2), (0, 0, 1)]))
        assert frame.spikes.entries.tolist() == [[0, 0, 1], [1, 2, 2]]

    def test_duplicate_coordinates(self):
        with pytest.raises(ProtocolError, match="duplicate"):
            decode_frame(_sparse_payload([(0, 1, 1), (0, 1, 1)]))

    def test_out_of_range(self):
        with pytest.raises(ProtocolError, match="outside"):
            decode_frame(_sparse_payload([(2, 0, 0)]))

    def test_count_exceeds_frame(self):
        head = struct.pack("<IBHHH", 0, int(FrameEncoding.SPARSE), 1, 1, 1)
        with pytest.raises(ProtocolError, match="cannot fit"):
            decode_frame(head + struct.pack("<I", 2))

    def test_truncated(self):
        payload = _sparse_payload([(0, 0, 1), (1, 1, 1)])
        with pytest.raises(ProtocolError, match="truncated"):
            decode_frame(payload[:-2])

    def test_trailing_bytes(self):
        with pytest.raises(ProtocolError, match="trailing"):
            decode_frame(_sparse_payload([(0, 0, 1)]) + b"\x00")

    def test_unknown_encoding(self):
        head = struct.pack("<IBHHH", 0, 9, 1, 1, 1)
        with pytest.raises(ProtocolError, match="encoding"):
            decode_frame(head)


# ── RESULT / ERROR ──────────────────────────────────────────────────

class TestResult:
    """Per-window answers."""

    def test_counts_only(self):
        result = ResultPayload(window_index=3, latency_s=1.5e-3, counts=(4, 0, 12))
        again = decode_result(encode_result(result))
        assert again.counts == (4, 0, 12)
        assert again.latency_s == 1.5e-3
        assert again.feature_maps is None
        assert again.total_spikes == 16

    def test_feature_maps(self):
        maps = (np.eye(3, dtype=np.uint8).reshape(1, 3, 3), np.ones((2, 1, 5), dtype=np.uint8))
        result = ResultPayload(window_index=0, counts=(3, 10), feature_maps=maps)
        again = decode_result(encode_result(result))
        assert len(again.feature_maps) == 2
        for a, b in zip(again.feature_maps, maps):
            np.testing.assert_array_equal(a, b)

    def test_map_count_mismatch(self):
        result = ResultPayload(
            window_index=0, counts=(1, 2), feature_maps=(np.zeros((1, 2, 2)),)
        )
        with pytest.raises(ProtocolError):
            encode_result(result)

    def test_truncated(self):
        data = encode_result(ResultPayload(window_index=0, counts=(1, 2)))
        with pytest.raises(ProtocolError):
            decode_result(data[:-3])


class TestError:
    """Error payloads carry the numeric error code."""

    def test_round_trip(self):
        error = ErrorPayload(code=603, message="geometry ✗")
        assert decode_error(encode_error(error)) == error

    def test_code_number(self):
        assert error_code_number(GeometryMismatchError("x")) == 603
        assert error_code_number(RuntimeError("x")) == 0

    def test_from_exception(self):
        payload = error_from_exception(ProtocolError("bad frame"))
        assert payload.code == 601
        assert "bad frame" in payload.message

    def test_truncated(self):
        with pytest.raises(ProtocolError):
            decode_error(b"\x01")

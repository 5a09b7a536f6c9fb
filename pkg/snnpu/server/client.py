"""
Streaming Client - send frames of a clip, collect one RESULT per frame
"""

from __future__ import annotations

import asyncio
import csv
import io
import logging
from typing import Iterable, Optional, Union

from snnpu._internal.errors import ProtocolError, RemoteError
from snnpu._internal.events.frames import frame_to_spikelist
from snnpu._internal.events.schema import EventFrame, SpikeList
from snnpu.server.protocol import (
    FramePayload,
    HelloPayload,
    MessageType,
    ResultPayload,
    WireMessage,
    decode_error,
    decode_hello,
    decode_result,
    frame_message,
    hello_message,
    read_message,
    write_message,
)

logger = logging.getLogger(__name__)


class StreamClient:
    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self.reader = reader
        self.writer = writer
        self.next_window = 0

    @classmethod
    async def connect(cls, host: str, port: int) -> "StreamClient":
        reader, writer = await asyncio.open_connection(host, port)
        logger.info("connected to %s:%d", host, port)
        return cls(reader, writer)

    async def _expect(self, expected: MessageType) -> WireMessage:
        message = await read_message(self.reader)
        if message.type == MessageType.ERROR:
            error = decode_error(message.payload)
            raise RemoteError(error.code, error.message)
        if message.type != expected:
            raise ProtocolError(f"expected {expected.name}, got {message.type.name}")
        return message

    async def hello(self, shape: tuple[int, int, int], want_maps: bool = False) -> HelloPayload:
        """
        Negotiate geometry.

        Raises:
            RemoteError: the server rejected the geometry.
        """
        c, h, w = shape
        await write_message(
            self.writer,
            hello_message(HelloPayload(channels=c, height=h, width=w, want_maps=want_maps)),
        )
        return decode_hello((await self._expect(MessageType.HELLO)).payload)

    async def send_frame(self, spikes: SpikeList, window_index: Optional[int] = None) -> ResultPayload:
        index = self.next_window if window_index is None else window_index
        await write_message(self.writer, frame_message(FramePayload(window_index=index, spikes=spikes)))
        result = decode_result((await self._expect(MessageType.RESULT)).payload)
        if result.window_index != index:
            raise ProtocolError(f"RESULT for window {result.window_index}, expected {index}")
        self.next_window = index + 1
        return result

    async def reset(self) -> None:
        await write_message(self.writer, WireMessage(type=MessageType.RESET))

    async def close(self) -> None:
        """Send END, wait for the server's END, close the socket."""
        try:
            await write_message(self.writer, WireMessage(type=MessageType.END))
            await self._expect(MessageType.END)
        finally:
            await self.abort()

    async def abort(self) -> None:
        """Close the socket without the END exchange."""
        self.writer.close()
        try:
            await self.writer.wait_closed()
        except ConnectionError:
            pass


def _as_spikes(frame: Union[EventFrame, SpikeList]) -> SpikeList:
    if isinstance(frame, SpikeList):
        return frame
    return frame_to_spikelist(frame)


async def stream_frames(
    host: str,
    port: int,
    frames: Iterable[Union[EventFrame, SpikeList]],
    shape: tuple[int, int, int],
    want_maps: bool = False,
    reset_between: bool = False,
) -> list[ResultPayload]:
    """
    Stream a clip over one connection, frames numbered 0..N-1.

    With reset_between, the server potentials are zeroed before every frame
    after the first.

    Raises:
        RemoteError: the server answered with ERROR.
    """
    client = await StreamClient.connect(host, port)
    results: list[ResultPayload] = []
    try:
        await client.hello(shape, want_maps)
        for i, frame in enumerate(frames):
            if reset_between and i:
                await client.reset()
            results.append(await client.send_frame(_as_spikes(frame), i))
    except BaseException:
        await client.abort()
        raise
    await client.close()
    logger.info("streamed %d frames", len(results))
    return results


def results_csv(results: list[ResultPayload]) -> str:
    """Per-window CSV: window, latency, one count column per extraction layer, total."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    layers = len(results[0].counts) if results else 0
    writer.writerow(["window", "latency_s", *[f"extract_{k}" for k in range(layers)], "total"])
    for r in results:
        writer.writerow([r.window_index, repr(r.latency_s), *r.counts, r.total_spikes])
    return out.getvalue()

"""
Inference Server - asyncio TCP server streaming frames through a network

Design rules:
- One connection = one InferenceContext (one clip of membrane state)
- Within a connection, messages are handled strictly in order; RESULT k
  answers FRAME k
- Connections are independent; a failing connection never affects another
- HELLO must come first; a geometry mismatch is answered with ERROR and the
  connection is closed
- A malformed FRAME or unknown message type is answered with ERROR and the
  membrane state is left untouched
"""

from __future__ import annotations

import asyncio
import logging
from typing import Optional

from snnpu._internal.engine.context import EngineKind, InferenceContext
from snnpu._internal.engine.prepared import Arithmetic
from snnpu._internal.errors import (
    EngineInputError,
    GeometryMismatchError,
    ProtocolError,
    UnknownMessageTypeError,
)
from snnpu._internal.model.schema import NetworkSpec
from snnpu._internal.perf.latency import estimate_step_latency
from snnpu._internal.perf.schema import HardwareConfig
from snnpu.server.protocol import (
    FramePayload,
    HelloPayload,
    MessageType,
    ResultPayload,
    WireMessage,
    decode_frame,
    decode_hello,
    error_message,
    hello_message,
    read_message,
    result_message,
    write_message,
)

logger = logging.getLogger(__name__)


class InferenceServer:
    """Serves one network to any number of streaming clients."""

    def __init__(
        self,
        spec: NetworkSpec,
        engine: EngineKind = "event",
        arithmetic: Arithmetic = "fixed",
        hw: Optional[HardwareConfig] = None,
    ):
        # fail at startup, not on the first connection
        InferenceContext(spec, engine=engine, arithmetic=arithmetic)
        self.spec = spec
        self.engine = engine
        self.arithmetic = arithmetic
        self.hw = hw or HardwareConfig()
        self.connections = 0

    @property
    def geometry(self) -> tuple[int, int, int]:
        return self.spec.input_shape_3d

    async def start(self, host: str = "127.0.0.1", port: int = 0) -> asyncio.AbstractServer:
        server = await asyncio.start_server(self.handle, host, port)
        for sock in server.sockets:
            logger.info("serving %s on %s", self.spec.name, sock.getsockname())
        return server

    async def handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        self.connections += 1
        peer = writer.get_extra_info("peername")
        logger.info("connection %d from %s", self.connections, peer)
        try:
            session = await self._handshake(reader, writer)
            if session is not None:
                ctx, want_maps = session
                await self._session(ctx, want_maps, reader, writer)
        except asyncio.IncompleteReadError:
            logger.info("%s closed the connection", peer)
        except ProtocolError as e:
            # framing is lost; report and drop the connection
            logger.warning("%s: %s", peer, e)
            await self._send_quietly(writer, error_message(e))
        except ConnectionError as e:
            logger.info("%s: %s", peer, e)
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except ConnectionError:
                pass
            logger.info("connection from %s closed", peer)

    async def _send_quietly(self, writer: asyncio.StreamWriter, message: WireMessage) -> None:
        try:
            await write_message(writer, message)
        except ConnectionError:
            pass

    async def _handshake(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> Optional[tuple[InferenceContext, bool]]:
        message = await read_message(reader)
        if message.type != MessageType.HELLO:
            raise ProtocolError(f"expected HELLO, got {message.type.name}")
        hello = decode_hello(message.payload)
        if hello.shape != self.geometry:
            error = GeometryMismatchError(
                f"client geometry {hello.shape} does not match model input {self.geometry}"
            )
            logger.warning("%s", error)
            await write_message(writer, error_message(error))
            return None
        c, h, w = self.geometry
        reply = HelloPayload(channels=c, height=h, width=w, want_maps=hello.want_maps)
        await write_message(writer, hello_message(reply))
        ctx = InferenceContext(self.spec, engine=self.engine, arithmetic=self.arithmetic)
        return ctx, hello.want_maps

    async def _session(
        self,
        ctx: InferenceContext,
        want_maps: bool,
        reader: asyncio.StreamReader,
        writer: asyncio.StreamWriter,
    ) -> None:
        while True:
            try:
                message = await read_message(reader)
            except UnknownMessageTypeError as e:
                logger.warning("%s", e)
                await write_message(writer, error_message(e))
                continue

            if message.type == MessageType.FRAME:
                try:
                    frame = decode_frame(message.payload)
                    result = await asyncio.to_thread(self.process, ctx, frame, want_maps)
                except (ProtocolError, EngineInputError) as e:
                    logger.warning("rejected frame: %s", e)
                    await write_message(writer, error_message(e))
                    continue
                await write_message(writer, result_message(result))
            elif message.type == MessageType.RESET:
                ctx.reset()
                logger.debug("potentials reset")
            elif message.type == MessageType.END:
                await write_message(writer, WireMessage(type=MessageType.END))
                return
            else:
                error = ProtocolError(f"unexpected {message.type.name} message")
                logger.warning("%s", error)
                await write_message(writer, error_message(error))

    def process(self, ctx: InferenceContext, frame: FramePayload, want_maps: bool) -> ResultPayload:
        """Step the context with one frame and build its RESULT."""
        output = ctx.step(frame.spikes)
        latency = 0.0
        if output.trace is not None:
            latency = estimate_step_latency(output.trace, self.spec, self.hw)
        counts = tuple(int(output.spike_counts[i]) for i in ctx.extract_indices)
        logger.debug("window %d: %d extracted spikes", frame.window_index, sum(counts))
        return ResultPayload(
            window_index=frame.window_index,
            latency_s=latency,
            counts=counts,
            feature_maps=tuple(output.feature_maps) if want_maps else None,
        )


async def serve(
    spec: NetworkSpec,
    host: str = "127.0.0.1",
    port: int = 7878,
    engine: EngineKind = "event",
    arithmetic: Arithmetic = "fixed",
    hw: Optional[HardwareConfig] = None,
) -> None:
    """Serve a network until cancelled."""
    server = await InferenceServer(spec, engine, arithmetic, hw).start(host, port)
    async with server:
        await server.serve_forever()

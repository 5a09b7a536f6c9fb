"""
snnpu CLI - Command Line Interface

Commands:
- stats: Network accounting (synapses, kernels, inputs, neurons)
- shapes: Per-layer output shapes and extraction shapes
- quantize: Quantize real weights into fixed point and write a model file
- fuse: Fold batch normalization into the convolutions
- ingest: Window an event file and report per-window activity
- run: Run a clip through the dense or event-driven engine
- perf: Simulate pipeline latency and derive energy metrics
- compare: Scaling table between two network profiles
- serve: Serve a network over the wire protocol
- stream: Stream a clip to a server and collect the results
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from snnpu._internal.config import (
    SnnpuConfig,
    configure_logging,
    load_config,
    load_hardware,
    load_profile,
)
from snnpu._internal.engine.reporter import (
    format_divergence,
    format_run_summary,
    layers_csv,
    windows_csv,
)
from snnpu._internal.engine.results import RunResult, divergence_report
from snnpu._internal.engine.runner import run_clip, run_dense
from snnpu._internal.errors import (
    EnergyInputError,
    EngineConfigurationError,
    EngineInputError,
    SnnpuError,
)
from snnpu._internal.events.frames import (
    frame_to_spikelist,
    stream_to_frames,
    window_events,
    window_stats,
    window_stats_csv,
)
from snnpu._internal.events.parser import load_event_file, write_event_file
from snnpu._internal.events.schema import EventStream, SensorGeometry
from snnpu._internal.events.synthetic import synthetic_event_stream
from snnpu._internal.exit_codes import EXIT_OK, resolve_exit_code
from snnpu._internal.fixedpoint import SaturationCounter
from snnpu._internal.model.fusion import fuse_network, quantize_network
from snnpu._internal.model.schema import ModelStats, NetworkSpec
from snnpu._internal.model.serialization import load_model_file, write_model_file
from snnpu._internal.model.shapes import extraction_shapes, infer_shapes, model_stats
from snnpu._internal.model.zoo import REFERENCE_MODELS, load_reference, randomize_weights
from snnpu._internal.perf.energy import compare_networks, energy_report
from snnpu._internal.perf.latency import (
    balance_npus,
    calibrate_hardware,
    npu_speedup,
    simulate_latency,
)
from snnpu._internal.perf.reporter import (
    comparison_csv,
    energy_csv,
    format_comparison,
    format_energy_report,
    format_latency_report,
    latency_csv,
)
from snnpu._internal.perf.schema import EnergyReport, HardwareConfig, LatencyReport

logger = logging.getLogger(__name__)


# =============================================================================
# Shared helpers
# =============================================================================

def _load_network(model: str, seed: Optional[int] = None, fuse: bool = False) -> NetworkSpec:
    """A reference name or a model file; optionally random weights and fused BN."""
    if model in REFERENCE_MODELS:
        spec = load_reference(model)
    else:
        spec = load_model_file(model)
    if seed is not None:
        spec = randomize_weights(spec, seed)
    if fuse:
        spec = fuse_network(spec)
    return spec


def _hardware(args, spec: NetworkSpec) -> HardwareConfig:
    hw = load_hardware(args.hw) if args.hw else args.settings.hardware
    if args.npus is not None:
        hw = hw.with_npus((args.npus,) * len(spec.layers))
    return hw


def _event_stream(args, geometry: SensorGeometry) -> tuple[EventStream, Optional[int]]:
    if args.events:
        return load_event_file(args.events, geometry, args.event_format), None
    duration = int(round(args.synthetic * 1e6))
    stream = synthetic_event_stream(
        geometry, duration_us=duration, rate_hz=args.rate, seed=args.input_seed
    )
    return stream, duration


def _frames(args, input_shape: tuple[int, ...]) -> list:
    """Input frames from an event file, a synthetic stream or random spikes."""
    if args.random_frames is not None:
        rng = np.random.default_rng(args.input_seed)
        return [
            (rng.random(input_shape) < args.density).astype(np.int32)
            for _ in range(args.random_frames)
        ]
    if len(input_shape) != 3 or input_shape[0] != 2:
        raise EngineInputError(
            f"event input needs a (2, H, W) network input, got {input_shape}"
        )
    geometry = SensorGeometry(width=input_shape[2], height=input_shape[1])
    stream, duration = _event_stream(args, geometry)
    settings = args.settings.engine
    window_us = args.window_us or settings.window_us
    mode = args.mode or settings.mode
    return stream_to_frames(stream, window_us, mode, duration)


def _energy(
    result: RunResult,
    latency: LatencyReport,
    hw: HardwareConfig,
    stats: ModelStats,
    spec: NetworkSpec,
) -> Optional[EnergyReport]:
    """Energy of one output: the run's latency and spikes split over its outputs."""
    outputs = max(1, -(-result.timesteps // spec.timesteps))
    try:
        return energy_report(
            latency.end_to_end_s / outputs,
            hw,
            stats,
            round(result.spikes_per_output(spec.timesteps)),
            spec.timesteps,
            scatter_updates=round(latency.total_updates / outputs),
        )
    except EnergyInputError as e:
        logger.warning("energy report skipped: %s", e)
        return None


def _write_reports(out: Path, files: dict[str, str]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        logger.info("wrote %s", path)


def _shape_text(shape: tuple[int, ...]) -> str:
    return "x".join(str(d) for d in shape)


# =============================================================================
# Commands
# =============================================================================

def cmd_stats(args):
    """Print network accounting."""
    spec = _load_network(args.model)
    stats = model_stats(spec)
    print(
        f"synapses {stats.synapses}, kernels {stats.kernels}, "
        f"inputs {stats.inputs}, neurons {stats.neurons}"
    )
    if args.layers:
        print(f"{'LAYER':<6} {'KIND':<16} {'OUTPUT':<14} {'SYNAPSES':>10} {'KERNELS':>8} {'NEURONS':>10}")
        print("-" * 70)
        for row in stats.layers:
            print(
                f"{row.index:<6} {row.kind:<16} {_shape_text(row.output_shape):<14} "
                f"{row.synapses:>10} {row.kernels:>8} {row.neurons:>10}"
            )
    return EXIT_OK


def cmd_shapes(args):
    """Print per-layer output shapes."""
    spec = _load_network(args.model)
    extract = set(spec.extract_indices)
    print(f"input {_shape_text(spec.input_shape)}")
    for i, (layer, shape) in enumerate(zip(spec.layers, infer_shapes(spec))):
        mark = "  (extract)" if i in extract else ""
        print(f"{i:>3} {layer.kind:<16} {_shape_text(shape)}{mark}")
    shapes = extraction_shapes(spec)
    if shapes:
        print("extraction shapes: " + ", ".join(_shape_text(s) for s in shapes))
    return EXIT_OK


def cmd_quantize(args):
    """Quantize weights into each layer's fixed-point format."""
    spec = _load_network(args.model, args.seed)
    counter = SaturationCounter()
    quantized = quantize_network(spec, counter)
    path = write_model_file(quantized, args.output)
    print(f"Quantized {spec.name}: {counter.count} saturated values")
    print(f"Wrote {path}")
    return EXIT_OK


def cmd_fuse(args):
    """Fold batch normalization into the convolutions."""
    spec = _load_network(args.model, args.seed)
    fused = fuse_network(spec)
    folded = sum(
        1 for a, b in zip(spec.layers, fused.layers) if a.batchnorm is not None and b.batchnorm is None
    )
    path = write_model_file(fused, args.output)
    print(f"Fused {folded} batch normalization layer(s) of {spec.name}")
    print(f"Wrote {path}")
    return EXIT_OK


def cmd_ingest(args):
    """Window an event stream and report per-window activity."""
    geometry = SensorGeometry(width=args.width, height=args.height)
    stream, duration = _event_stream(args, geometry)
    windows = window_events(stream, args.window_us, duration)
    stats = window_stats(windows, geometry)
    if args.write_events:
        logger.info("wrote %s", write_event_file(stream, args.write_events))
    if args.out:
        Path(args.out).write_text(window_stats_csv(stats), encoding="utf-8")
        logger.info("wrote %s", args.out)
    active = [s.active_pixels for s in stats]
    print(f"{len(windows)} windows, {len(stream)} events")
    if active:
        print(f"active pixels per window: mean {np.mean(active):.1f}, max {max(active)}")
    return EXIT_OK


def cmd_run(args):
    """Run a clip and write the run reports."""
    settings = args.settings.engine
    engine = args.engine or settings.engine
    arithmetic = args.arith or settings.arithmetic
    if args.perf and engine != "event":
        raise EngineConfigurationError("--perf needs the event-driven engine")
    spec = _load_network(args.model, args.seed, args.fuse)
    frames = _frames(args, spec.input_shape)
    stats = model_stats(spec)

    result, trace = run_clip(spec, frames, engine, arithmetic)
    summary = format_run_summary(result, stats, spec.timesteps)
    files = {
        "summary.txt": summary,
        "layers.csv": layers_csv(result),
        "windows.csv": windows_csv(result),
    }
    print(summary)

    if args.perf and trace is not None:
        hw = _hardware(args, spec)
        latency = simulate_latency(trace, spec, hw)
        files["latency.txt"] = format_latency_report(latency)
        files["latency.csv"] = latency_csv(latency)
        print(files["latency.txt"])
        energy = _energy(result, latency, hw, stats, spec)
        if energy is not None:
            files["energy.txt"] = format_energy_report(energy)
            files["energy.csv"] = energy_csv(energy)
            print(files["energy.txt"])

    if args.divergence:
        real = run_dense(spec, frames, "real")
        fixed = result if arithmetic == "fixed" else run_dense(spec, frames, "fixed")
        files["divergence.txt"] = format_divergence(divergence_report(real, fixed))
        print(files["divergence.txt"])

    _write_reports(Path(args.out), files)
    print(f"{result.timesteps} windows processed; reports in {args.out}")
    return EXIT_OK


def cmd_perf(args):
    """Simulate the NPU pipeline over a clip."""
    spec = _load_network(args.model, args.seed, args.fuse)
    frames = _frames(args, spec.input_shape)
    stats = model_stats(spec)
    hw = _hardware(args, spec)
    result, trace = run_clip(spec, frames, "event", "fixed")
    assert trace is not None

    if args.balance is not None:
        hw = hw.with_npus(balance_npus(trace, spec, hw, args.balance))
        print(f"Balanced NPUs per layer: {', '.join(str(n) for n in hw.npu_per_layer or ())}")
    if args.calibrate is not None:
        hw = calibrate_hardware(trace, spec, hw, args.calibrate)
        print(f"Calibrated per-spike overhead: {hw.cycles_per_spike_overhead:.4f} cycles")

    latency = simulate_latency(trace, spec, hw)
    files = {"latency.csv": latency_csv(latency)}
    print(format_latency_report(latency))
    energy = _energy(result, latency, hw, stats, spec)
    if energy is not None:
        files["energy.csv"] = energy_csv(energy)
        print(format_energy_report(energy))

    if args.speedup is not None:
        a, b = args.speedup
        speedup = npu_speedup(trace, spec, hw, a, b)
        print(f"Speedup {a} -> {b} NPUs per layer: {speedup:.3f}x")

    if args.out:
        _write_reports(Path(args.out), files)
    return EXIT_OK


def cmd_compare(args):
    """Print the scaling table of two network profiles."""
    table = compare_networks(load_profile(args.a), load_profile(args.b))
    print(format_comparison(table))
    if args.csv:
        Path(args.csv).write_text(comparison_csv(table), encoding="utf-8")
        logger.info("wrote %s", args.csv)
    return EXIT_OK


def cmd_serve(args):
    """Serve a network until interrupted."""
    from snnpu.server.server import serve

    settings = args.settings
    spec = _load_network(args.model, args.seed, args.fuse)
    hw = _hardware(args, spec)
    host = args.host or settings.server.host
    port = args.port if args.port is not None else settings.server.port
    engine = args.engine or settings.engine.engine
    arithmetic = args.arith or settings.engine.arithmetic
    print(f"Serving {spec.name} on {host}:{port} ({engine} engine)")
    try:
        asyncio.run(serve(spec, host, port, engine, arithmetic, hw))
    except KeyboardInterrupt:
        print("Stopped")
    return EXIT_OK


def cmd_stream(args):
    """Stream a clip to a server."""
    from snnpu.server.client import results_csv, stream_frames

    settings = args.settings
    if args.shape:
        shape = tuple(args.shape)
        if len(shape) == 2:
            shape = (shape[0], 1, shape[1])
    else:
        shape = (2, args.height, args.width)
    if len(shape) != 3:
        raise EngineInputError(f"--shape needs C H W or C L, got {args.shape}")
    spikes = [frame_to_spikelist(f) for f in _frames(args, shape)]
    host = args.host or settings.server.host
    port = args.port if args.port is not None else settings.server.port
    results = asyncio.run(
        stream_frames(host, port, spikes, shape, want_maps=args.maps, reset_between=args.reset_between)
    )
    print(f"{'WINDOW':<8} {'SPIKES':>10} {'LATENCY':>14}")
    print("-" * 34)
    for r in results:
        print(f"{r.window_index:<8} {r.total_spikes:>10} {r.latency_s:>14.6g}")
    if args.out:
        Path(args.out).write_text(results_csv(results), encoding="utf-8")
        logger.info("wrote %s", args.out)
    print(f"{len(results)} results received")
    return EXIT_OK


# =============================================================================
# Parser
# =============================================================================

def _add_model_args(parser: argparse.ArgumentParser, fuse: bool = True) -> None:
    parser.add_argument("model", help="Model file or reference name")
    parser.add_argument("--seed", type=int, help="Replace weights with random ones drawn from this seed")
    if fuse:
        parser.add_argument("--fuse", action="store_true", help="Fold batch normalization first")


def _add_source_args(parser: argparse.ArgumentParser, random_frames: bool = True) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--events", help="Event file (.csv or .bin)")
    source.add_argument("--synthetic", type=float, metavar="SECONDS", help="Synthetic event stream")
    if random_frames:
        source.add_argument("--random-frames", type=int, metavar="N", help="N random binary frames")
        parser.add_argument("--density", type=float, default=0.1, help="Spike density of random frames")
    parser.add_argument("--event-format", choices=["csv", "bin"], help="Event file format")
    parser.add_argument("--rate", type=float, default=50_000.0, help="Synthetic event rate (Hz)")
    parser.add_argument("--input-seed", type=int, default=0, help="Seed of synthetic input")


def _add_window_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window-us", type=int, help="Event window length (us)")
    parser.add_argument("--mode", choices=["binary", "sum"], help="Frame accumulation mode")


def _add_hw_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--hw", help="Hardware YAML file")
    parser.add_argument("--npus", type=int, help="NPUs per layer (uniform)")


def build_parser() -> argparse.ArgumentParser:
    from snnpu import __version__

    parser = argparse.ArgumentParser(
        prog="snnpu",
        description="Event-driven spiking neural network accelerator simulator",
    )
    parser.add_argument("--version", "-v", action="version", version=f"snnpu {__version__}")
    parser.add_argument("--config", "-c", help="Config YAML file")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR")

    subparsers = parser.add_subparsers(dest="command", help="Commands")

    stats_parser = subparsers.add_parser("stats", help="Network accounting")
    stats_parser.add_argument("model", help="Model file or reference name")
    stats_parser.add_argument("--layers", "-l", action="store_true", help="Per-layer table")

    shapes_parser = subparsers.add_parser("shapes", help="Per-layer output shapes")
    shapes_parser.add_argument("model", help="Model file or reference name")

    quantize_parser = subparsers.add_parser("quantize", help="Quantize weights into fixed point")
    _add_model_args(quantize_parser, fuse=False)
    quantize_parser.add_argument("--output", "-o", required=True, help="Output model file")

    fuse_parser = subparsers.add_parser("fuse", help="Fold batch normalization into convolutions")
    _add_model_args(fuse_parser, fuse=False)
    fuse_parser.add_argument("--output", "-o", required=True, help="Output model file")

    ingest_parser = subparsers.add_parser("ingest", help="Window an event stream")
    _add_source_args(ingest_parser, random_frames=False)
    ingest_parser.add_argument("--window-us", type=int, default=50_000, help="Window length (us)")
    ingest_parser.add_argument("--width", type=int, default=240, help="Sensor width")
    ingest_parser.add_argument("--height", type=int, default=304, help="Sensor height")
    ingest_parser.add_argument("--out", "-o", help="Per-window CSV")
    ingest_parser.add_argument("--write-events", help="Write the stream to an event file")

    run_parser = subparsers.add_parser("run", help="Run a clip through an engine")
    _add_model_args(run_parser)
    _add_source_args(run_parser)
    _add_window_args(run_parser)
    _add_hw_args(run_parser)
    run_parser.add_argument("--engine", choices=["dense", "event"], help="Engine")
    run_parser.add_argument("--arith", choices=["real", "fixed"], help="Arithmetic")
    run_parser.add_argument("--perf", action="store_true", help="Add latency and energy reports")
    run_parser.add_argument("--divergence", action="store_true", help="Compare real and fixed spike counts")
    run_parser.add_argument("--out", "-o", default="snnpu-run", help="Report directory")

    perf_parser = subparsers.add_parser("perf", help="Simulate latency and energy")
    _add_model_args(perf_parser)
    _add_source_args(perf_parser)
    _add_window_args(perf_parser)
    _add_hw_args(perf_parser)
    perf_parser.add_argument("--balance", type=int, metavar="TOTAL", help="Distribute TOTAL NPUs over layers")
    perf_parser.add_argument("--calibrate", type=float, metavar="SECONDS", help="Fit per-spike overhead to a latency")
    perf_parser.add_argument("--speedup", type=int, nargs=2, metavar=("A", "B"), help="Latency ratio of A vs B NPUs per layer")
    perf_parser.add_argument("--out", "-o", help="Report directory")

    compare_parser = subparsers.add_parser("compare", help="Scaling table of two networks")
    compare_parser.add_argument("a", help="Reference profile YAML")
    compare_parser.add_argument("b", help="Scaled profile YAML")
    compare_parser.add_argument("--csv", help="Write the table as CSV")

    serve_parser = subparsers.add_parser("serve", help="Serve a network")
    _add_model_args(serve_parser)
    _add_hw_args(serve_parser)
    serve_parser.add_argument("--host", help="Host to bind to")
    serve_parser.add_argument("--port", "-p", type=int, help="Port to bind to")
    serve_parser.add_argument("--engine", choices=["dense", "event"], help="Engine")
    serve_parser.add_argument("--arith", choices=["real", "fixed"], help="Arithmetic")

    stream_parser = subparsers.add_parser("stream", help="Stream a clip to a server")
    _add_source_args(stream_parser)
    _add_window_args(stream_parser)
    stream_parser.add_argument("--host", help="Server host")
    stream_parser.add_argument("--port", "-p", type=int, help="Server port")
    stream_parser.add_argument("--width", type=int, default=240, help="Sensor width")
    stream_parser.add_argument("--height", type=int, default=304, help="Sensor height")
    stream_parser.add_argument("--shape", type=int, nargs="+", help="Frame shape for random frames")
    stream_parser.add_argument("--maps", action="store_true", help="Request feature maps")
    stream_parser.add_argument("--reset-between", action="store_true", help="Reset potentials between frames")
    stream_parser.add_argument("--out", "-o", help="Per-window results CSV")

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return EXIT_OK

    commands = {
        "stats": cmd_stats,
        "shapes": cmd_shapes,
        "quantize": cmd_quantize,
        "fuse": cmd_fuse,
        "ingest": cmd_ingest,
        "run": cmd_run,
        "perf": cmd_perf,
        "compare": cmd_compare,
        "serve": cmd_serve,
        "stream": cmd_stream,
    }

    try:
        settings: SnnpuConfig = load_config(args.config)
        configure_logging(args.log_level or settings.logging.level)
        args.settings = settings
        return commands[args.command](args)
    except (FileNotFoundError, IsADirectoryError, SnnpuError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return resolve_exit_code(e)


if __name__ == "__main__":
    sys.exit(main())

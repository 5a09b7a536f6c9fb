"""
snnpu - Desk-scale simulator of an event-driven spiking neural network accelerator.

Public API:
    fixed point  - FixedFormat, FixedValue, FixedTensor and saturating ops
    model        - NetworkSpec, config parser, shapes, accounting, BN fusion
    neuron       - IF/LIF dynamics in real and fixed-point arithmetic
    events       - event files, windowing, frames and spike lists
    engine       - dense reference and event-driven inference
    perf         - pipeline latency simulation and energy metrics
"""

__version__ = "0.3.0"

from snnpu._internal.fixedpoint import (
    Q8_8,
    FixedFormat,
    FixedTensor,
    FixedValue,
    SaturationCounter,
    align_raw,
    dequantize,
    quantize_array,
    quantize_value,
    rescale,
    sat_add,
    sat_mul,
    sat_mul_array,
    sat_sub,
    saturate_array,
)
from snnpu._internal.neuron import (
    FixedNeuronParams,
    NeuronParams,
    NeuronState,
    neuron_step,
    quantize_neuron,
    step_fixed,
    step_real,
)
from snnpu._internal.model import (
    REFERENCE_MODELS,
    BatchNormParams,
    FormatSet,
    LayerGeometry,
    LayerSpec,
    LayerStats,
    LayerWeights,
    ModelStats,
    NetworkSpec,
    extraction_shapes,
    fuse_batchnorm,
    fuse_network,
    infer_shapes,
    layer_geometry,
    load_model,
    load_model_file,
    load_reference,
    model_stats,
    parse_model_config,
    quantize_network,
    random_network,
    randomize_weights,
    render_model_config,
    save_model,
    write_model_file,
    zero_weights,
)
from snnpu._internal.events import (
    EventFrame,
    EventRecord,
    EventStream,
    EventWindow,
    SensorGeometry,
    SpikeList,
    WindowStats,
    accumulate_frame,
    binarize,
    densify,
    encode_event_stream,
    frame_to_spikelist,
    load_event_file,
    parse_event_stream,
    stream_to_frames,
    synthetic_event_stream,
    window_events,
    window_stats,
    write_event_file,
)
from snnpu._internal.engine import (
    DivergenceReport,
    InferenceContext,
    RunResult,
    SpikeTrace,
    StepOutput,
    WindowMetrics,
    activity,
    divergence_report,
    extract_features,
    run_dense,
    run_event_driven,
)
from snnpu._internal.perf import (
    ComparisonTable,
    EnergyReport,
    HardwareConfig,
    LatencyReport,
    NetworkProfile,
    balance_npus,
    calibrate_hardware,
    compare_networks,
    energy_report,
    estimate_step_latency,
    npu_speedup,
    profile_from_report,
    simulate_latency,
)
from snnpu._internal.config import SnnpuConfig, load_config
from snnpu._internal.exit_codes import (
    EXIT_OK,
    EXIT_RUNTIME_ERROR,
    EXIT_USAGE_ERROR,
    resolve_exit_code,
)

__all__ = [
    # Fixed point
    "Q8_8",
    "FixedFormat",
    "FixedTensor",
    "FixedValue",
    "SaturationCounter",
    "align_raw",
    "dequantize",
    "quantize_array",
    "quantize_value",
    "rescale",
    "sat_add",
    "sat_mul",
    "sat_mul_array",
    "sat_sub",
    "saturate_array",
    # Neuron
    "FixedNeuronParams",
    "NeuronParams",
    "NeuronState",
    "neuron_step",
    "quantize_neuron",
    "step_fixed",
    "step_real",
    # Model
    "REFERENCE_MODELS",
    "BatchNormParams",
    "FormatSet",
    "LayerGeometry",
    "LayerSpec",
    "LayerStats",
    "LayerWeights",
    "ModelStats",
    "NetworkSpec",
    "extraction_shapes",
    "fuse_batchnorm",
    "fuse_network",
    "infer_shapes",
    "layer_geometry",
    "load_model",
    "load_model_file",
    "load_reference",
    "model_stats",
    "parse_model_config",
    "quantize_network",
    "random_network",
    "randomize_weights",
    "render_model_config",
    "save_model",
    "write_model_file",
    "zero_weights",
    # Events
    "EventFrame",
    "EventRecord",
    "EventStream",
    "EventWindow",
    "SensorGeometry",
    "SpikeList",
    "WindowStats",
    "accumulate_frame",
    "binarize",
    "densify",
    "encode_event_stream",
    "frame_to_spikelist",
    "load_event_file",
    "parse_event_stream",
    "stream_to_frames",
    "synthetic_event_stream",
    "window_events",
    "window_stats",
    "write_event_file",
    # Engine
    "DivergenceReport",
    "InferenceContext",
    "RunResult",
    "SpikeTrace",
    "StepOutput",
    "WindowMetrics",
    "activity",
    "divergence_report",
    "extract_features",
    "run_dense",
    "run_event_driven",
    # Perf
    "ComparisonTable",
    "EnergyReport",
    "HardwareConfig",
    "LatencyReport",
    "NetworkProfile",
    "balance_npus",
    "calibrate_hardware",
    "compare_networks",
    "energy_report",
    "estimate_step_latency",
    "npu_speedup",
    "profile_from_report",
    "simulate_latency",
    # Config and exit codes
    "SnnpuConfig",
    "load_config",
    "EXIT_OK",
    "EXIT_RUNTIME_ERROR",
    "EXIT_USAGE_ERROR",
    "resolve_exit_code",
    # Version
    "__version__",
]

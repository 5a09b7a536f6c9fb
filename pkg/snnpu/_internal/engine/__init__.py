"""
Engine - dense reference and event-driven inference over a NetworkSpec.
"""

from snnpu._internal.engine.prepared import Arithmetic, PreparedLayer, prepare_network
from snnpu._internal.engine.ops import conv_dense, overlap_counts, scatter_spikes
from snnpu._internal.engine.results import (
    DivergenceReport,
    LayerDivergence,
    RunResult,
    SpikeTrace,
    StepOutput,
    WindowMetrics,
    activity,
    divergence_report,
    extract_features,
)
from snnpu._internal.engine.context import EngineKind, InferenceContext
from snnpu._internal.engine.runner import run_clip, run_dense, run_event_driven
from snnpu._internal.engine.reporter import (
    format_divergence,
    format_run_summary,
    layers_csv,
    windows_csv,
)

__all__ = [
    "Arithmetic",
    "PreparedLayer",
    "prepare_network",
    "conv_dense",
    "overlap_counts",
    "scatter_spikes",
    "DivergenceReport",
    "LayerDivergence",
    "RunResult",
    "SpikeTrace",
    "StepOutput",
    "WindowMetrics",
    "activity",
    "divergence_report",
    "extract_features",
    "EngineKind",
    "InferenceContext",
    "run_clip",
    "run_dense",
    "run_event_driven",
    "format_divergence",
    "format_run_summary",
    "layers_csv",
    "windows_csv",
]

"""
Perf - pipeline latency simulation and energy calculus.
"""

from snnpu._internal.perf.schema import (
    ComparisonRow,
    ComparisonTable,
    EnergyReport,
    HardwareConfig,
    LatencyReport,
    NetworkProfile,
)
from snnpu._internal.perf.latency import (
    balance_npus,
    calibrate_hardware,
    estimate_step_latency,
    layer_work_cycles,
    npu_speedup,
    resolve_npus,
    simulate_latency,
)
from snnpu._internal.perf.energy import (
    COMPARISON_METRICS,
    compare_networks,
    energy_report,
    profile_from_report,
)
from snnpu._internal.perf.reporter import (
    comparison_csv,
    energy_csv,
    format_comparison,
    format_energy_report,
    format_latency_report,
    latency_csv,
)

__all__ = [
    "ComparisonRow",
    "ComparisonTable",
    "EnergyReport",
    "HardwareConfig",
    "LatencyReport",
    "NetworkProfile",
    "balance_npus",
    "calibrate_hardware",
    "estimate_step_latency",
    "layer_work_cycles",
    "npu_speedup",
    "resolve_npus",
    "simulate_latency",
    "COMPARISON_METRICS",
    "compare_networks",
    "energy_report",
    "profile_from_report",
    "comparison_csv",
    "energy_csv",
    "format_comparison",
    "format_energy_report",
    "format_latency_report",
    "latency_csv",
]

"""
Energy calculus and the two-network scaling comparison.

    E          = dynamic_power * latency
    E_spike    = E / total_spikes
    E_synapse  = E / synapses
    E_norm     = E_synapse / timesteps
    kernel_computation_index = total_spikes * kernels
"""

from __future__ import annotations

from typing import Optional

from snnpu._internal.errors import EnergyInputError
from snnpu._internal.model.schema import ModelStats
from snnpu._internal.perf.schema import (
    ComparisonRow,
    ComparisonTable,
    EnergyReport,
    HardwareConfig,
    NetworkProfile,
)


def energy_report(
    latency_s: float,
    hw: HardwareConfig,
    stats: ModelStats,
    total_spikes: int,
    timesteps: int,
    scatter_updates: Optional[int] = None,
) -> EnergyReport:
    """
    Derive the energy metrics of one output.

    Raises:
        EnergyInputError: non-positive latency, spikes, synapses or timesteps.
    """
    if latency_s <= 0:
        raise EnergyInputError(f"latency must be > 0, got {latency_s}")
    if total_spikes <= 0:
        raise EnergyInputError("energy per spike needs at least one spike")
    if stats.synapses <= 0:
        raise EnergyInputError("energy per synapse needs a network with synapses")
    if timesteps <= 0:
        raise EnergyInputError(f"timesteps must be > 0, got {timesteps}")

    energy = hw.dynamic_power_w * latency_s
    per_synapse = energy / stats.synapses
    return EnergyReport(
        latency_s=latency_s,
        dynamic_power_w=hw.dynamic_power_w,
        total_spikes=total_spikes,
        synapses=stats.synapses,
        kernels=stats.kernels,
        timesteps=timesteps,
        energy_j=energy,
        energy_per_spike_j=energy / total_spikes,
        energy_per_synapse_j=per_synapse,
        energy_norm_j=per_synapse / timesteps,
        kernel_computation_index=total_spikes * stats.kernels,
        scatter_updates=scatter_updates,
    )


def profile_from_report(
    name: str,
    stats: ModelStats,
    report: EnergyReport,
    activity_percent: Optional[float] = None,
) -> NetworkProfile:
    return NetworkProfile(
        name=name,
        inputs=stats.inputs,
        timesteps=report.timesteps,
        synapses=stats.synapses,
        kernels=stats.kernels,
        spikes=report.total_spikes,
        latency_s=report.latency_s,
        power_w=report.dynamic_power_w,
        neurons=stats.neurons or None,
        activity_percent=activity_percent,
    )


COMPARISON_METRICS = (
    "inputs",
    "timesteps",
    "activity_percent",
    "synapses",
    "spikes",
    "kernels",
    "latency_s",
    "power_w",
    "energy_j",
    "energy_per_spike_j",
    "energy_norm_j",
    "kernel_computation_index",
)


def _metric(p: NetworkProfile, metric: str) -> Optional[float]:
    if metric == "activity_percent":
        return p.activity
    return float(getattr(p, metric))


def compare_networks(a: NetworkProfile, b: NetworkProfile) -> ComparisonTable:
    """Scaling table of b against a; each row's ratio is b / a."""
    return ComparisonTable(
        a_name=a.name,
        b_name=b.name,
        rows=[
            ComparisonRow(metric=m, a=_metric(a, m), b=_metric(b, m))
            for m in COMPARISON_METRICS
        ],
    )

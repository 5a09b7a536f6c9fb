"""
Run reporter - text summary and CSV tables of a RunResult.
"""

from __future__ import annotations

import csv
import io
from typing import Optional

from snnpu._internal.engine.results import DivergenceReport, RunResult
from snnpu._internal.model.schema import ModelStats


def format_run_summary(
    result: RunResult,
    stats: Optional[ModelStats] = None,
    timesteps_per_output: int = 1,
) -> str:
    totals = result.layer_totals()
    steps = max(result.timesteps, 1)
    lines = []
    lines.append("")
    lines.append(f"Run: {result.network} ({result.engine} engine, {result.arithmetic} arithmetic)")
    lines.append("=" * 60)
    lines.append(f"  {'timesteps':<24} {result.timesteps}")
    lines.append(f"  {'total spikes':<24} {result.total_spikes}")
    lines.append(f"  {'spikes / output':<24} {result.spikes_per_output(timesteps_per_output):.1f}")
    lines.append(f"  {'activity':<24} {result.activity(stats):.2f} %")
    if result.saturations:
        lines.append(f"  {'saturations':<24} {result.saturations}")
    lines.append("")
    lines.append(f"  {'layer':>5}  {'neurons':>10}  {'spikes':>12}  {'activity %':>10}  extract")
    for i, neurons in enumerate(result.layer_neurons):
        pct = 100.0 * int(totals[i]) / (neurons * steps) if neurons else 0.0
        mark = "yes" if i in result.extract_indices else ""
        lines.append(f"  {i:>5}  {neurons:>10}  {int(totals[i]):>12}  {pct:>10.2f}  {mark}")
    lines.append("=" * 60)
    lines.append("")
    return "\n".join(lines)


def layers_csv(result: RunResult) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["layer", "neurons", "spikes", "extract"])
    for i, (neurons, spikes) in enumerate(zip(result.layer_neurons, result.layer_totals())):
        writer.writerow([i, neurons, int(spikes), int(i in result.extract_indices)])
    return out.getvalue()


def windows_csv(result: RunResult) -> str:
    """One row per window: total spikes, activity and extraction-layer spikes."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    extract = [f"extract_{k}" for k in range(len(result.extract_indices))]
    writer.writerow(["window", "spikes", "activity_percent", *extract])
    for m in result.window_metrics():
        writer.writerow([m.index, m.spikes, f"{m.activity_percent:.4f}", *m.extract_spikes])
    return out.getvalue()


def format_divergence(report: DivergenceReport) -> str:
    lines = []
    lines.append("")
    lines.append("Real vs fixed-point spike counts")
    lines.append("=" * 60)
    lines.append(f"  {'layer':>5}  {'real':>12}  {'fixed':>12}  {'delta':>10}")
    for row in report.layers:
        lines.append(f"  {row.index:>5}  {row.real_spikes:>12}  {row.fixed_spikes:>12}  {row.delta:>+10}")
    lines.append("=" * 60)
    lines.append(
        f"  total {report.real_total} vs {report.fixed_total} "
        f"({100.0 * report.relative_delta:+.2f} %)"
    )
    lines.append("")
    return "\n".join(lines)

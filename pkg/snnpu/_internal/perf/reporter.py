"""
Perf reporter - format latency, energy and comparison reports as text and CSV.
"""

from __future__ import annotations

import csv
import io
from typing import Optional

from snnpu._internal.perf.schema import ComparisonTable, EnergyReport, LatencyReport


def _si(value: Optional[float], unit: str) -> str:
    if value is None:
        return "-"
    for factor, prefix in ((1.0, ""), (1e-3, "m"), (1e-6, "u"), (1e-9, "n"), (1e-12, "p")):
        if abs(value) >= factor:
            return f"{value / factor:.4g} {prefix}{unit}"
    return f"{value:.4g} {unit}"


def format_latency_report(report: LatencyReport) -> str:
    lines = []
    lines.append("")
    lines.append(f"Latency: {report.network}")
    lines.append("=" * 60)
    lines.append(f"  {'layer':>5}  {'npus':>4}  {'spikes in':>10}  {'updates':>12}  {'busy':>12}  {'queue wait':>12}  {'util':>6}")
    utilization = report.utilization()
    for i in range(report.layers):
        mark = "  <- bottleneck" if i == report.bottleneck else ""
        lines.append(
            f"  {i:>5}  {report.npus[i]:>4}  {report.spikes_in[i]:>10}  {report.updates[i]:>12}  "
            f"{_si(report.busy_s[i], 's'):>12}  {_si(report.queue_wait_s[i], 's'):>12}  {utilization[i]:>6.1%}{mark}"
        )
    lines.append("=" * 60)
    lines.append(f"End-to-end latency: {_si(report.end_to_end_s, 's')} ({report.total_updates} updates)")
    steps = report.timestep_latency_s()
    if steps:
        slowest = max(range(len(steps)), key=steps.__getitem__)
        lines.append(f"Slowest timestep: t={slowest} ({_si(steps[slowest], 's')})")
    lines.append("")
    return "\n".join(lines)


def latency_csv(report: LatencyReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["layer", "npus", "spikes_in", "updates", "busy_s", "queue_wait_s", "utilization", "bottleneck"])
    utilization = report.utilization()
    for i in range(report.layers):
        writer.writerow([
            i, report.npus[i], report.spikes_in[i], report.updates[i],
            repr(report.busy_s[i]), repr(report.queue_wait_s[i]), repr(utilization[i]), int(i == report.bottleneck),
        ])
    writer.writerow(["total", "", sum(report.spikes_in), report.total_updates, repr(report.end_to_end_s), "", "", ""])
    return out.getvalue()


_ENERGY_ROWS = (
    ("latency", "latency_s", "s"),
    ("dynamic power", "dynamic_power_w", "W"),
    ("energy / output", "energy_j", "J"),
    ("energy / spike", "energy_per_spike_j", "J"),
    ("energy / synapse", "energy_per_synapse_j", "J"),
    ("energy norm", "energy_norm_j", "J"),
)


def format_energy_report(report: EnergyReport) -> str:
    lines = []
    lines.append("")
    lines.append("Energy")
    lines.append("=" * 60)
    for label, field, unit in _ENERGY_ROWS:
        lines.append(f"  {label:<24} {_si(getattr(report, field), unit)}")
    lines.append(f"  {'spikes':<24} {report.total_spikes}")
    lines.append(f"  {'kernel computations':<24} {report.kernel_computation_index}")
    if report.scatter_updates is not None:
        lines.append(f"  {'scatter updates':<24} {report.scatter_updates}")
    lines.append("")
    return "\n".join(lines)


def energy_csv(report: EnergyReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["metric", "value"])
    for key, value in report.model_dump().items():
        writer.writerow([key, "" if value is None else repr(value)])
    return out.getvalue()


def _num(value: Optional[float]) -> str:
    if value is None:
        return "-"
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return f"{value:.4g}"


def format_comparison(table: ComparisonTable) -> str:
    lines = []
    lines.append("")
    lines.append(f"Scaling: {table.b_name} / {table.a_name}")
    lines.append("=" * 60)
    lines.append(f"  {'metric':<26} {table.a_name[:12]:>12} {table.b_name[:12]:>12} {'ratio':>8}")
    for row in table.rows:
        lines.append(f"  {row.metric:<26} {_num(row.a):>12} {_num(row.b):>12} {_num(row.ratio):>8}")
    lines.append("")
    return "\n".join(lines)


def comparison_csv(table: ComparisonTable) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["metric", table.a_name, table.b_name, "ratio"])
    for row in table.rows:
        writer.writerow([
            row.metric,
            "" if row.a is None else repr(row.a),
            "" if row.b is None else repr(row.b),
            "" if row.ratio is None else repr(row.ratio),
        ])
    return out.getvalue()

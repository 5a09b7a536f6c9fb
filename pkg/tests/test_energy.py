"""
ENERGY AND SCALING TESTS

Proves the energy calculus:
  - E = P * L and every derived energy follows from it
  - Reference figures: 490 mJ, 2.28 uJ per spike, 553 nJ per synapse,
    3.88 nJ normalized energy for the 1D network
  - Scaling ratios: spikes 29.83, kernels 4.37, synapses 34.42,
    normalized energy 142 and kernel computations 130.4
"""

import pytest

from snnpu import (
    HardwareConfig,
    NetworkProfile,
    compare_networks,
    energy_report,
    load_reference,
    model_stats,
    profile_from_report,
)
from snnpu._internal.perf import (
    COMPARISON_METRICS,
    comparison_csv,
    energy_csv,
    format_comparison,
    format_energy_report,
)
from snnpu.errors import EnergyInputError


@pytest.fixture(scope="module")
def vgg_stats():
    return model_stats(load_reference("small-32-st-vgg"))


@pytest.fixture(scope="module")
def scnn_stats():
    return model_stats(load_reference("scnn-gsc"))


@pytest.fixture
def vgg_report(vgg_stats):
    return energy_report(0.7, HardwareConfig(dynamic_power_w=0.7), vgg_stats, 214_800, 1)


@pytest.fixture
def scnn_report(scnn_stats):
    return energy_report(1e-3, HardwareConfig(dynamic_power_w=0.2), scnn_stats, 7_200, 2)


# ── Energy report ───────────────────────────────────────────────────

class TestEnergyReport:
    """Per-output energy metrics."""

    def test_energy_per_output(self, vgg_report):
        assert vgg_report.energy_j == pytest.approx(0.490)

    def test_energy_per_spike(self, vgg_report):
        assert vgg_report.energy_per_spike_j == pytest.approx(2.281e-6, rel=1e-3)

    def test_energy_per_synapse(self, vgg_report):
        assert round(vgg_report.energy_per_synapse_j * 1e9) == 553

    def test_scnn_normalized(self, scnn_report):
        assert scnn_report.energy_j == pytest.approx(2e-4)
        assert scnn_report.energy_per_synapse_j == pytest.approx(7.76e-9, rel=1e-3)
        assert scnn_report.energy_norm_j == pytest.approx(3.88e-9, rel=1e-3)

    def test_identities(self, vgg_report):
        r = vgg_report
        assert r.energy_j == r.dynamic_power_w * r.latency_s
        assert r.energy_per_spike_j == r.energy_j / r.total_spikes
        assert r.energy_norm_j == r.energy_per_synapse_j / r.timesteps
        assert r.kernel_computation_index == 214_800 * 992

    @pytest.mark.parametrize(
        "latency,spikes,timesteps", [(0.0, 10, 1), (-1.0, 10, 1), (1.0, 0, 1), (1.0, 10, 0)]
    )
    def test_invalid_inputs(self, vgg_stats, latency, spikes, timesteps):
        with pytest.raises(EnergyInputError):
            energy_report(latency, HardwareConfig(), vgg_stats, spikes, timesteps)

    def test_text_and_csv(self, vgg_report):
        text = format_energy_report(vgg_report)
        assert "490 mJ" in text
        assert "energy / spike" in text
        rows = energy_csv(vgg_report).splitlines()
        assert rows[0] == "metric,value"
        assert any(row.startswith("energy_j,0.4") for row in rows)


# ── Scaling comparison ──────────────────────────────────────────────

class TestCompareNetworks:
    """Ratios are b / a."""

    @pytest.fixture
    def table(self, vgg_stats, scnn_stats, vgg_report, scnn_report):
        scnn = profile_from_report("scnn-gsc", scnn_stats, scnn_report)
        vgg = profile_from_report("small-32-st-vgg", vgg_stats, vgg_report)
        return compare_networks(scnn, vgg)

    def test_rows(self, table):
        assert [r.metric for r in table.rows] == list(COMPARISON_METRICS)

    def test_count_ratios(self, table):
        assert table.ratio("spikes") == pytest.approx(29.83, abs=0.01)
        assert table.ratio("kernels") == pytest.approx(4.37, abs=0.01)
        assert table.ratio("synapses") == pytest.approx(34.42, abs=0.01)
        assert table.ratio("inputs") == pytest.approx(608.0)
        assert table.ratio("timesteps") == pytest.approx(0.5)

    def test_energy_norm_ratio(self, table):
        assert table.ratio("energy_norm_j") == pytest.approx(142.0, abs=1.0)

    def test_kernel_computation_ratio(self, table):
        assert table.ratio("kernel_computation_index") == pytest.approx(130.4, abs=0.1)

    def test_activity_from_counts(self, table):
        assert round(table.row("activity_percent").b, 2) == 32.04

    def test_identical_networks(self):
        vgg = NetworkProfile(
            name="a", inputs=10, timesteps=2, synapses=100, kernels=4,
            spikes=50, latency_s=1e-3, power_w=0.5, neurons=40,
        )
        same = compare_networks(vgg, vgg.model_copy(update={"name": "b"}))
        assert all(r.ratio == pytest.approx(1.0) for r in same.rows)

    def test_missing_activity(self):
        p = NetworkProfile(
            name="p", inputs=1, timesteps=1, synapses=1, kernels=1,
            spikes=1, latency_s=1.0, power_w=1.0,
        )
        table = compare_networks(p, p)
        assert table.ratio("activity_percent") is None

    def test_unknown_metric(self, table):
        with pytest.raises(KeyError):
            table.ratio("bogus")

    def test_text_and_csv(self, table):
        text = format_comparison(table)
        assert "Scaling: small-32-st-vgg / scnn-gsc" in text
        rows = comparison_csv(table).splitlines()
        assert rows[0] == "metric,scnn-gsc,small-32-st-vgg,ratio"
        assert len(rows) == 1 + len(COMPARISON_METRICS)

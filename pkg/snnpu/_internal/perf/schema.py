"""
Performance Schema - hardware parameters and report types

Cycle costs are model parameters, not measurements. Power is an input.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class HardwareConfig(BaseModel):
    """
    Accelerator parameters.

    One NPU pipeline stage per layer; npu_per_layer, when set, overrides
    the per-layer npu counts of the network.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    clock_hz: float = Field(default=100e6, gt=0)
    cycles_per_update: float = Field(default=1.0, ge=0)
    cycles_per_spike_overhead: float = Field(default=0.0, ge=0)
    cycles_per_fire: float = Field(default=0.0, ge=0)
    npu_per_layer: Optional[tuple[int, ...]] = None
    dynamic_power_w: float = Field(default=0.7, gt=0)
    input_period_s: float = Field(default=0.0, ge=0)
    readout_cycles_per_spike: float = Field(default=0.0, ge=0)

    @field_validator("npu_per_layer")
    @classmethod
    def _positive_npus(cls, v: Optional[tuple[int, ...]]) -> Optional[tuple[int, ...]]:
        if v is not None and any(n < 1 for n in v):
            raise ValueError("npu_per_layer entries must be >= 1")
        return v

    def with_npus(self, npus: tuple[int, ...]) -> "HardwareConfig":
        return self.model_copy(update={"npu_per_layer": tuple(npus)})


class LatencyReport(BaseModel):
    """
    Simulated pipeline latency.

    busy_s[l] is the time stage l spent serving spikes and barriers;
    queue_wait_s[l] sums the time messages waited in its FIFO.
    """
    model_config = ConfigDict(frozen=True)

    network: str
    clock_hz: float
    npus: tuple[int, ...]
    busy_s: tuple[float, ...]
    queue_wait_s: tuple[float, ...]
    spikes_in: tuple[int, ...]
    updates: tuple[int, ...]
    timestep_done_s: tuple[float, ...]
    end_to_end_s: float
    bottleneck: int

    @property
    def layers(self) -> int:
        return len(self.busy_s)

    @property
    def total_updates(self) -> int:
        return sum(self.updates)

    def utilization(self) -> tuple[float, ...]:
        if self.end_to_end_s <= 0:
            return tuple(0.0 for _ in self.busy_s)
        return tuple(b / self.end_to_end_s for b in self.busy_s)

    def timestep_latency_s(self) -> tuple[float, ...]:
        """Completion time of each timestep relative to the previous one."""
        out = []
        previous = 0.0
        for done in self.timestep_done_s:
            out.append(done - previous)
            previous = done
        return tuple(out)


class EnergyReport(BaseModel):
    """
    Energy calculus of one output.

    energy_j = dynamic_power_w * latency_s, every other energy is derived.
    """
    model_config = ConfigDict(frozen=True)

    latency_s: float
    dynamic_power_w: float
    total_spikes: int
    synapses: int
    kernels: int
    timesteps: int
    energy_j: float
    energy_per_spike_j: float
    energy_per_synapse_j: float
    energy_norm_j: float
    kernel_computation_index: int
    scatter_updates: Optional[int] = None


class NetworkProfile(BaseModel):
    """
    Totals describing one network for the scaling comparison.

    activity_percent is taken as given when set; otherwise it is computed
    from spikes / (neurons * timesteps).
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    inputs: int = Field(ge=0)
    timesteps: int = Field(ge=1)
    synapses: int = Field(ge=1)
    kernels: int = Field(ge=0)
    spikes: float = Field(gt=0)
    latency_s: float = Field(gt=0)
    power_w: float = Field(gt=0)
    neurons: Optional[int] = Field(default=None, ge=1)
    activity_percent: Optional[float] = None

    @property
    def activity(self) -> Optional[float]:
        if self.activity_percent is not None:
            return self.activity_percent
        if self.neurons:
            return 100.0 * self.spikes / (self.neurons * self.timesteps)
        return None

    @property
    def energy_j(self) -> float:
        return self.power_w * self.latency_s

    @property
    def energy_per_spike_j(self) -> float:
        return self.energy_j / self.spikes

    @property
    def energy_norm_j(self) -> float:
        return self.energy_j / self.synapses / self.timesteps

    @property
    def kernel_computation_index(self) -> float:
        return self.spikes * self.kernels


class ComparisonRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric: str
    a: Optional[float]
    b: Optional[float]

    @property
    def ratio(self) -> Optional[float]:
        if self.a is None or self.b is None or self.a == 0:
            return None
        return self.b / self.a


class ComparisonTable(BaseModel):
    """Scaling comparison; every ratio is b / a."""
    model_config = ConfigDict(frozen=True)

    a_name: str
    b_name: str
    rows: list[ComparisonRow]

    def row(self, metric: str) -> ComparisonRow:
        for r in self.rows:
            if r.metric == metric:
                return r
        raise KeyError(metric)

    def ratio(self, metric: str) -> Optional[float]:
        return self.row(metric).ratio

"""
Neuron Dynamics (IF / LIF)

Membrane update in real and fixed-point arithmetic with hard reset to 0.

One step per timestep:
    charge   IF                 h = v + x
             LIF decay_input    h = v + (x - v) / tau
             LIF shift_leak     h = v / tau + x
    fire     fired = h >= v_threshold
    reset    v' = 0 if fired else h

PLIF neurons are LIF neurons whose learned tau is a constant at inference.
Leak and threshold run once per timestep, after all input charge of the
timestep has been accumulated.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from snnpu._internal.errors import NeuronQuantizationError
from snnpu._internal.fixedpoint import (
    FixedFormat,
    FixedValue,
    Q8_8,
    SaturationCounter,
    quantize_value,
    rescale,
    sat_add,
    sat_mul,
    sat_sub,
    saturate_array,
    sat_mul_array,
)


NeuronKind = Literal["IF", "LIF"]
LeakForm = Literal["decay_input", "shift_leak"]


class NeuronParams(BaseModel):
    """Real-valued neuron parameters."""
    model_config = ConfigDict(frozen=True)

    kind: NeuronKind = "LIF"
    tau: Optional[float] = 2.0
    v_threshold: float = 1.0
    v_reset: float = 0.0
    leak_form: LeakForm = "decay_input"

    @model_validator(mode="after")
    def _check(self) -> "NeuronParams":
        if self.v_threshold <= 0:
            raise ValueError(f"v_threshold must be > 0, got {self.v_threshold}")
        if self.v_reset != 0.0:
            raise ValueError("only hard reset to 0 is supported")
        if self.kind == "LIF" and (self.tau is None or self.tau <= 1):
            raise ValueError(f"LIF tau must be > 1, got {self.tau}")
        return self


class FixedNeuronParams(BaseModel):
    """Neuron parameters quantized into the potential format."""
    model_config = ConfigDict(frozen=True)

    kind: NeuronKind
    leak_form: LeakForm
    v_threshold: FixedValue
    inv_tau: Optional[FixedValue] = None

    @property
    def format(self) -> FixedFormat:
        return self.v_threshold.format


class NeuronState(BaseModel):
    """Membrane potential of one neuron (real or fixed-point)."""
    model_config = ConfigDict(frozen=True)

    v: Union[FixedValue, float] = 0.0


def quantize_neuron(
    p: NeuronParams,
    fmt: FixedFormat = Q8_8,
    threshold_format: Optional[FixedFormat] = None,
) -> FixedNeuronParams:
    """
    Quantize threshold and 1/tau with the floor rule.

    The threshold is quantized in threshold_format (defaults to fmt) and
    then carried into fmt, the potential format the comparison runs in.
    """
    threshold = quantize_value(p.v_threshold, threshold_format or fmt)
    if threshold.format != fmt:
        threshold = rescale(threshold, fmt)
    if threshold.raw <= 0:
        raise NeuronQuantizationError(
            f"threshold {p.v_threshold} quantizes to {threshold.raw} in {fmt.name}"
        )

    inv_tau = None
    if p.kind == "LIF":
        inv_tau = quantize_value(1.0 / p.tau, fmt)
        if inv_tau.raw == 0:
            raise NeuronQuantizationError(
                f"1/tau for tau={p.tau} underflows to 0 in {fmt.name}; "
                "the leak would be silently disabled"
            )

    return FixedNeuronParams(
        kind=p.kind,
        leak_form=p.leak_form,
        v_threshold=threshold,
        inv_tau=inv_tau,
    )


# =============================================================================
# Scalar step (reference)
# =============================================================================

def neuron_step(
    state: NeuronState,
    x: Union[float, FixedValue],
    p: Union[NeuronParams, FixedNeuronParams],
    counter: Optional[SaturationCounter] = None,
) -> tuple[bool, NeuronState]:
    """
    One charge/fire/reset step.

    Real arithmetic when p is NeuronParams, fixed-point when p is
    FixedNeuronParams (then state.v and x are FixedValues in p.format).
    """
    if isinstance(p, FixedNeuronParams):
        v = state.v
        if not isinstance(v, FixedValue):
            v = FixedValue(raw=0, format=p.format)
        if p.kind == "IF":
            h = sat_add(v, x, counter)
        elif p.leak_form == "decay_input":
            h = sat_add(v, sat_mul(sat_sub(x, v, counter), p.inv_tau, counter), counter)
        else:
            h = sat_add(sat_mul(v, p.inv_tau, counter), x, counter)
        if h.raw >= p.v_threshold.raw:
            return True, NeuronState(v=FixedValue(raw=0, format=p.format))
        return False, NeuronState(v=h)

    v = float(state.v)
    x = float(x)
    if p.kind == "IF":
        h = v + x
    elif p.leak_form == "decay_input":
        h = v + (x - v) / p.tau
    else:
        h = v / p.tau + x
    if h >= p.v_threshold:
        return True, NeuronState(v=0.0)
    return False, NeuronState(v=h)


# =============================================================================
# Array steps (used by the engines)
# =============================================================================

def step_real(
    v: np.ndarray, x: np.ndarray, p: NeuronParams
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized real step. Returns (fired, new potentials)."""
    if p.kind == "IF":
        h = v + x
    elif p.leak_form == "decay_input":
        h = v + (x - v) / p.tau
    else:
        h = v / p.tau + x
    fired = h >= p.v_threshold
    return fired, np.where(fired, 0.0, h)


def step_fixed(
    v: np.ndarray,
    x: np.ndarray,
    p: FixedNeuronParams,
    counter: Optional[SaturationCounter] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Vectorized fixed-point step on raw arrays in p.format.

    Same operation sequence as the scalar step, each phase saturated.
    """
    fmt = p.format
    if p.kind == "IF":
        h = saturate_array(v + x, fmt, counter)
    elif p.leak_form == "decay_input":
        diff = saturate_array(x - v, fmt, counter)
        h = saturate_array(v + sat_mul_array(diff, p.inv_tau.raw, fmt, counter), fmt, counter)
    else:
        h = saturate_array(sat_mul_array(v, p.inv_tau.raw, fmt, counter) + x, fmt, counter)
    fired = np.asarray(h >= p.v_threshold.raw, dtype=bool)
    return fired, np.where(fired, 0, h).astype(fmt.array_dtype)

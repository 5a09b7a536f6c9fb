"""
Fixed-Point Arithmetic (Qm,n)

Scalar and tensor arithmetic with explicit rounding and saturation.

Design rules:
- Rounding is floor (toward -inf) everywhere: quantization and the shift
  after a multiply.
- Saturating, never wrapping. Every clamp can be counted.
- Values are immutable once constructed.
- Accumulation happens in a wide intermediate and is saturated only when
  written back to a storage format.
"""

from __future__ import annotations

import math
import re
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from snnpu._internal.errors import FormatMismatchError, InvalidFormatError


_FORMAT_PATTERN = re.compile(
    r"^\s*[qQ]\s*(?P<m>\d+)\s*(?:[,.\s])\s*(?P<n>\d+)\s*$"
)


class FixedFormat(BaseModel):
    """
    Qm,n format: m integer bits (sign included), n fraction bits.

    Invariants:
    - 2 <= m + n <= 64
    - representable range is [-2^(m-1), 2^(m-1) - 2^-n]
    """
    model_config = ConfigDict(frozen=True)

    integer_bits: int = Field(ge=1)
    fraction_bits: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_width(self) -> "FixedFormat":
        total = self.integer_bits + self.fraction_bits
        if not 2 <= total <= 64:
            raise InvalidFormatError(
                f"Q{self.integer_bits},{self.fraction_bits} has {total} bits; "
                "supported widths are 2 to 64"
            )
        return self

    @classmethod
    def parse(cls, text: str) -> "FixedFormat":
        """Parse 'Q8,8', 'q 8 8' or 'q8.8'."""
        match = _FORMAT_PATTERN.match(text)
        if match is None:
            raise InvalidFormatError(f"Cannot parse fixed-point format {text!r}")
        return cls(integer_bits=int(match["m"]), fraction_bits=int(match["n"]))

    @property
    def name(self) -> str:
        return f"Q{self.integer_bits},{self.fraction_bits}"

    @property
    def total_bits(self) -> int:
        return self.integer_bits + self.fraction_bits

    @property
    def min_raw(self) -> int:
        return -(1 << (self.total_bits - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    @property
    def scale(self) -> int:
        return 1 << self.fraction_bits

    @property
    def resolution(self) -> float:
        return 2.0 ** -self.fraction_bits

    @property
    def min_value(self) -> float:
        return self.min_raw * self.resolution

    @property
    def max_value(self) -> float:
        return self.max_raw * self.resolution

    @property
    def array_dtype(self) -> type:
        """
        numpy dtype holding raw values and their double-width intermediates.

        int64 is exact for products and long sums of formats up to 32 bits;
        wider formats fall back to Python integers.
        """
        return np.int64 if self.total_bits <= 32 else object

    def __str__(self) -> str:
        return self.name


Q8_8 = FixedFormat(integer_bits=8, fraction_bits=8)


class SaturationCounter:
    """Counts values clamped by saturating operations."""

    def __init__(self) -> None:
        self.count = 0

    def record(self, n: int = 1) -> None:
        self.count += int(n)

    def __repr__(self) -> str:
        return f"SaturationCounter(count={self.count})"


class FixedValue(BaseModel):
    """A raw two's complement integer interpreted as raw * 2^-n."""
    model_config = ConfigDict(frozen=True)

    raw: int
    format: FixedFormat = Q8_8

    @model_validator(mode="after")
    def _check_range(self) -> "FixedValue":
        if not self.format.min_raw <= self.raw <= self.format.max_raw:
            raise InvalidFormatError(
                f"raw {self.raw} does not fit in {self.format.name}"
            )
        return self

    @property
    def value(self) -> float:
        return dequantize(self)


def _clamp(raw: int, fmt: FixedFormat, counter: Optional[SaturationCounter]) -> int:
    if raw > fmt.max_raw:
        if counter is not None:
            counter.record()
        return fmt.max_raw
    if raw < fmt.min_raw:
        if counter is not None:
            counter.record()
        return fmt.min_raw
    return raw


def _require_same_format(a: FixedValue, b: FixedValue) -> FixedFormat:
    if a.format != b.format:
        raise FormatMismatchError(a.format.name, b.format.name)
    return a.format


# =============================================================================
# Scalar operations
# =============================================================================

def quantize_value(
    x: float,
    fmt: FixedFormat = Q8_8,
    counter: Optional[SaturationCounter] = None,
) -> FixedValue:
    """raw = clamp(floor(x * 2^n)). Out-of-range inputs saturate."""
    if math.isnan(x):
        raise InvalidFormatError("Cannot quantize NaN")
    # scaling by a power of two is exact in binary floating point
    scaled = x * fmt.scale
    if math.isinf(scaled):
        raw = fmt.max_raw + 1 if scaled > 0 else fmt.min_raw - 1
    else:
        raw = math.floor(scaled)
    return FixedValue(raw=_clamp(raw, fmt, counter), format=fmt)


def dequantize(v: FixedValue) -> float:
    """Exact real value of a fixed-point number."""
    return math.ldexp(v.raw, -v.format.fraction_bits)


def sat_add(
    a: FixedValue, b: FixedValue, counter: Optional[SaturationCounter] = None
) -> FixedValue:
    fmt = _require_same_format(a, b)
    return FixedValue(raw=_clamp(a.raw + b.raw, fmt, counter), format=fmt)


def sat_sub(
    a: FixedValue, b: FixedValue, counter: Optional[SaturationCounter] = None
) -> FixedValue:
    fmt = _require_same_format(a, b)
    return FixedValue(raw=_clamp(a.raw - b.raw, fmt, counter), format=fmt)


def sat_mul(
    a: FixedValue, b: FixedValue, counter: Optional[SaturationCounter] = None
) -> FixedValue:
    """(a.raw * b.raw) >> n in a double-width intermediate, then clamped."""
    fmt = _require_same_format(a, b)
    product = (a.raw * b.raw) >> fmt.fraction_bits
    return FixedValue(raw=_clamp(product, fmt, counter), format=fmt)


def rescale(
    v: FixedValue, fmt: FixedFormat, counter: Optional[SaturationCounter] = None
) -> FixedValue:
    """Convert to another format, flooring dropped fraction bits."""
    shift = fmt.fraction_bits - v.format.fraction_bits
    raw = v.raw << shift if shift >= 0 else v.raw >> -shift
    return FixedValue(raw=_clamp(raw, fmt, counter), format=fmt)


# =============================================================================
# Array operations
# =============================================================================

def saturate_array(
    raw: np.ndarray,
    fmt: FixedFormat,
    counter: Optional[SaturationCounter] = None,
) -> np.ndarray:
    """Clamp a raw integer array to the format range."""
    raw = np.asarray(raw, dtype=fmt.array_dtype)
    over = raw > fmt.max_raw
    under = raw < fmt.min_raw
    if counter is not None:
        counter.record(int(np.count_nonzero(over)) + int(np.count_nonzero(under)))
    if not (over.any() or under.any()):
        return raw
    out = raw.copy()
    out[over] = fmt.max_raw
    out[under] = fmt.min_raw
    return out


def quantize_array(
    x: np.ndarray,
    fmt: FixedFormat = Q8_8,
    counter: Optional[SaturationCounter] = None,
) -> np.ndarray:
    """Elementwise quantize_value; returns raw integers."""
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        raise InvalidFormatError("Cannot quantize NaN")
    # clip before the integer cast so huge inputs cannot overflow it
    limit = 2.0 ** (fmt.total_bits + 1)
    scaled = np.floor(np.clip(np.ldexp(x, fmt.fraction_bits), -limit, limit))
    if fmt.array_dtype is object:
        raw = np.array([int(v) for v in scaled.ravel()], dtype=object).reshape(x.shape)
    else:
        raw = scaled.astype(np.int64)
    return saturate_array(raw, fmt, counter)


def sat_mul_array(
    a: np.ndarray,
    b: np.ndarray | int,
    fmt: FixedFormat,
    counter: Optional[SaturationCounter] = None,
) -> np.ndarray:
    """Elementwise sat_mul on raw arrays (arithmetic right shift = floor)."""
    product = np.asarray(a, dtype=fmt.array_dtype) * b
    return saturate_array(product >> fmt.fraction_bits, fmt, counter)


def align_raw(raw: np.ndarray, source: FixedFormat, target: FixedFormat) -> np.ndarray:
    """Shift raw values to the fraction width of another format (floor)."""
    raw = np.asarray(raw, dtype=target.array_dtype)
    shift = target.fraction_bits - source.fraction_bits
    if shift > 0:
        return raw << shift
    if shift < 0:
        return raw >> -shift
    return raw


class FixedTensor(BaseModel):
    """
    Dense tensor of raw fixed-point values sharing one format.

    Invariants:
    - len(data) == prod(shape)
    - every raw value fits the format
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    shape: tuple[int, ...]
    data: np.ndarray
    format: FixedFormat = Q8_8

    @model_validator(mode="after")
    def _check_data(self) -> "FixedTensor":
        expected = int(np.prod(self.shape, dtype=np.int64)) if self.shape else 1
        if self.data.ndim != 1 or self.data.size != expected:
            raise InvalidFormatError(
                f"FixedTensor data has {self.data.size} elements, shape {self.shape} "
                f"needs {expected}"
            )
        if self.data.size:
            if self.data.min() < self.format.min_raw or self.data.max() > self.format.max_raw:
                raise InvalidFormatError(
                    f"FixedTensor values do not fit in {self.format.name}"
                )
        return self

    @classmethod
    def from_raw(cls, raw: np.ndarray, fmt: FixedFormat = Q8_8) -> "FixedTensor":
        raw = np.asarray(raw, dtype=fmt.array_dtype)
        return cls(shape=tuple(raw.shape), data=raw.ravel().copy(), format=fmt)

    @classmethod
    def from_real(
        cls,
        x: np.ndarray,
        fmt: FixedFormat = Q8_8,
        counter: Optional[SaturationCounter] = None,
    ) -> "FixedTensor":
        return cls.from_raw(quantize_array(x, fmt, counter), fmt)

    def to_raw(self) -> np.ndarray:
        return self.data.reshape(self.shape)

    def dequantize(self) -> np.ndarray:
        raw = self.to_raw()
        if self.format.array_dtype is object:
            return np.array(
                [math.ldexp(int(v), -self.format.fraction_bits) for v in raw.ravel()],
                dtype=np.float64,
            ).reshape(self.shape)
        return np.ldexp(raw.astype(np.float64), -self.format.fraction_bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FixedTensor):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.format == other.format
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None  # type: ignore[assignment]

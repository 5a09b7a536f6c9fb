"""
FIXED-POINT ARITHMETIC TESTS

Proves Qm,n arithmetic:
  - Rounds toward -inf on quantization and after multiplies
  - Saturates instead of wrapping, and counts every clamp
  - Refuses to mix formats
  - Addition commutes, and associates while nothing saturates
  - Agrees between scalar and array implementations
"""

import math

import numpy as np
import pytest

from snnpu import (
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
from snnpu.errors import FormatMismatchError, InvalidFormatError


Q4_4 = FixedFormat(integer_bits=4, fraction_bits=4)


def fx(x: float, fmt: FixedFormat = Q8_8) -> FixedValue:
    return quantize_value(x, fmt)


# ── Formats ─────────────────────────────────────────────────────────

class TestFixedFormat:
    """Format construction, parsing and range."""

    def test_q8_8_range(self):
        assert Q8_8.min_raw == -32768
        assert Q8_8.max_raw == 32767
        assert Q8_8.min_value == -128.0
        assert Q8_8.max_value == 128.0 - 2 ** -8

    @pytest.mark.parametrize("text", ["Q8,8", "q 8 8", "q8.8", " Q8, 8 "])
    def test_parse_variants(self, text):
        assert FixedFormat.parse(text) == Q8_8

    def test_parse_rejects_garbage(self):
        with pytest.raises(InvalidFormatError):
            FixedFormat.parse("float16")

    def test_name(self):
        assert Q8_8.name == "Q8,8"
        assert str(Q4_4) == "Q4,4"

    def test_width_bounds(self):
        FixedFormat(integer_bits=1, fraction_bits=1)
        FixedFormat(integer_bits=32, fraction_bits=32)
        with pytest.raises(ValueError):
            FixedFormat(integer_bits=60, fraction_bits=8)

    def test_frozen(self):
        with pytest.raises(Exception):
            Q8_8.integer_bits = 4

    def test_array_dtype(self):
        assert Q8_8.array_dtype is np.int64
        assert FixedFormat(integer_bits=32, fraction_bits=32).array_dtype is object


# ── Quantization ────────────────────────────────────────────────────

class TestQuantize:
    """Floor rounding and saturation."""

    def test_half(self):
        assert fx(0.5).raw == 128

    def test_negative_floors_down(self):
        assert fx(-0.3).raw == -77

    def test_positive_floors_down(self):
        assert fx(0.3).raw == 76

    def test_saturates_high_and_low(self):
        counter = SaturationCounter()
        assert quantize_value(200.0, Q8_8, counter).raw == Q8_8.max_raw
        assert quantize_value(-200.0, Q8_8, counter).raw == Q8_8.min_raw
        assert counter.count == 2

    def test_infinity_saturates(self):
        assert fx(math.inf).raw == Q8_8.max_raw
        assert fx(-math.inf).raw == Q8_8.min_raw

    def test_huge_finite_saturates(self):
        counter = SaturationCounter()
        assert quantize_value(1e308, Q8_8, counter).raw == Q8_8.max_raw
        assert quantize_value(-1e308, Q8_8, counter).raw == Q8_8.min_raw
        assert counter.count == 2

    def test_nan_rejected(self):
        with pytest.raises(InvalidFormatError):
            fx(math.nan)

    def test_dequantize_exact(self):
        assert dequantize(FixedValue(raw=-77, format=Q8_8)) == -77 / 256

    def test_raw_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            FixedValue(raw=40000, format=Q8_8)

    def test_monotone(self):
        rng = np.random.default_rng(7)
        xs = np.sort(rng.uniform(-140.0, 140.0, 2000))
        raws = [fx(float(x)).raw for x in xs]
        assert all(a <= b for a, b in zip(raws, raws[1:]))

    def test_round_trip_representable(self):
        for raw in range(Q8_8.min_raw, Q8_8.max_raw + 1, 97):
            v = FixedValue(raw=raw, format=Q8_8)
            assert fx(dequantize(v)) == v

    def test_array_matches_scalar(self):
        rng = np.random.default_rng(3)
        xs = rng.uniform(-200.0, 200.0, 500)
        raw = quantize_array(xs, Q8_8)
        assert [int(r) for r in raw] == [fx(float(x)).raw for x in xs]

    def test_array_counts_saturation(self):
        counter = SaturationCounter()
        raw = quantize_array(np.array([1000.0, -1000.0, 0.5]), Q8_8, counter)
        assert counter.count == 2
        assert [int(r) for r in raw] == [32767, -32768, 128]

    def test_array_nan_rejected(self):
        with pytest.raises(InvalidFormatError):
            quantize_array(np.array([0.0, np.nan]))

    def test_wide_format_uses_python_ints(self):
        q32 = FixedFormat(integer_bits=32, fraction_bits=32)
        raw = quantize_array(np.array([0.5, -1.25]), q32)
        assert int(raw[0]) == 1 << 31
        assert int(raw[1]) == -(5 << 30)


# ── Saturating operations ───────────────────────────────────────────

class TestSaturatingOps:
    """add, sub, mul and rescale."""

    def test_add(self):
        assert dequantize(sat_add(fx(1.5), fx(2.25))) == 3.75

    def test_add_saturates(self):
        counter = SaturationCounter()
        assert sat_add(fx(100.0), fx(100.0), counter).raw == Q8_8.max_raw
        assert counter.count == 1

    def test_add_commutes(self):
        rng = np.random.default_rng(23)
        for a, b in rng.integers(Q8_8.min_raw, Q8_8.max_raw + 1, (500, 2)):
            x = FixedValue(raw=int(a), format=Q8_8)
            y = FixedValue(raw=int(b), format=Q8_8)
            assert sat_add(x, y) == sat_add(y, x)

    def test_add_associates_without_saturation(self):
        rng = np.random.default_rng(29)
        # three terms of at most 2^13 in magnitude cannot leave Q8,8
        for a, b, c in rng.integers(-(1 << 13), 1 << 13, (500, 3)):
            x, y, z = (FixedValue(raw=int(r), format=Q8_8) for r in (a, b, c))
            counter = SaturationCounter()
            left = sat_add(sat_add(x, y, counter), z, counter)
            right = sat_add(x, sat_add(y, z, counter), counter)
            assert counter.count == 0
            assert left == right

    def test_sub_saturates_low(self):
        assert sat_sub(fx(-100.0), fx(100.0)).raw == Q8_8.min_raw

    def test_mul(self):
        assert dequantize(sat_mul(fx(1.5), fx(2.0))) == 3.0

    def test_mul_floors_negative_products(self):
        # -0.5 * 2^-8 = -2^-9 floors to -2^-8
        assert sat_mul(fx(-0.5), FixedValue(raw=1, format=Q8_8)).raw == -1

    def test_mul_saturates(self):
        assert sat_mul(fx(64.0), fx(4.0)).raw == Q8_8.max_raw

    def test_format_mismatch(self):
        with pytest.raises(FormatMismatchError):
            sat_add(fx(1.0), fx(1.0, Q4_4))
        with pytest.raises(ValueError):
            sat_mul(fx(1.0), fx(1.0, Q4_4))

    def test_rescale_narrower_floors(self):
        assert rescale(fx(0.5), Q4_4).raw == 8
        assert rescale(FixedValue(raw=-1, format=Q8_8), Q4_4).raw == -1

    def test_rescale_wider_exact(self):
        v = rescale(fx(0.5, Q4_4), Q8_8)
        assert v.raw == 128 and v.format == Q8_8

    def test_rescale_saturates(self):
        assert rescale(fx(100.0), Q4_4).raw == Q4_4.max_raw

    def test_array_mul_matches_scalar(self):
        rng = np.random.default_rng(11)
        a = rng.integers(Q8_8.min_raw, Q8_8.max_raw + 1, 300)
        b = rng.integers(Q8_8.min_raw, Q8_8.max_raw + 1, 300)
        out = sat_mul_array(a, b, Q8_8)
        expected = [
            sat_mul(FixedValue(raw=int(x), format=Q8_8), FixedValue(raw=int(y), format=Q8_8)).raw
            for x, y in zip(a, b)
        ]
        assert [int(v) for v in out] == expected

    def test_saturate_array_counts(self):
        counter = SaturationCounter()
        out = saturate_array(np.array([40000, -40000, 5]), Q8_8, counter)
        assert list(out) == [32767, -32768, 5]
        assert counter.count == 2

    def test_align_raw(self):
        assert list(align_raw(np.array([128, -1]), Q8_8, Q4_4)) == [8, -1]
        assert list(align_raw(np.array([8]), Q4_4, Q8_8)) == [128]


# ── Tensors ─────────────────────────────────────────────────────────

class TestFixedTensor:
    """Dense tensors of raw values."""

    def test_from_real_and_back(self):
        x = np.array([[0.5, -0.25], [1.0, -2.0]])
        t = FixedTensor.from_real(x)
        assert t.shape == (2, 2)
        np.testing.assert_array_equal(t.to_raw(), [[128, -64], [256, -512]])
        np.testing.assert_array_equal(t.dequantize(), x)

    def test_from_real_counts_saturation(self):
        counter = SaturationCounter()
        FixedTensor.from_real(np.array([500.0, 0.0]), Q8_8, counter)
        assert counter.count == 1

    def test_equality(self):
        a = FixedTensor.from_real(np.array([0.5, 1.5]))
        b = FixedTensor.from_raw(np.array([128, 384]))
        assert a == b
        assert a != FixedTensor.from_raw(np.array([128, 383]))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            FixedTensor(shape=(3,), data=np.array([1, 2], dtype=np.int64))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            FixedTensor(shape=(1,), data=np.array([70000], dtype=np.int64))

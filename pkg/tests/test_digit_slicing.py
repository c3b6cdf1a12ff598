import numpy as np
import pytest
from hypothesis import given, strategies as st

from r22sdf.digit_slicing import (
    AddCounter,
    SliceConfig,
    SlicedWord,
    multiply_batch,
    reconstruct,
    shift_add_multiply,
    slice_config_for,
    slice_word,
)
from r22sdf.fixedpoint import Fixed, FixedFormat, Q15

CFG = SliceConfig(4, 4)
Q8 = FixedFormat(8, 7)
raw16 = st.integers(-(1 << 15), (1 << 15) - 1)


def test_slice_config_invariants():
    assert CFG.word_bits == 16
    CFG.check(Q15)
    with pytest.raises(ValueError):
        SliceConfig(3, 4).check(Q15)
    with pytest.raises(ValueError):
        SliceConfig(0, 4)
    assert slice_config_for(17, 4) == SliceConfig(5, 4)
    assert slice_config_for(16, 4) == SliceConfig(4, 4)


@pytest.mark.parametrize(
    "raw, blocks",
    [
        (0x0000, (0x0, 0x0, 0x0, 0x0)),
        (-0x8000, (0x0, 0x0, 0x0, 0x8)),
        (0x5A82, (0x2, 0x8, 0xA, 0x5)),
    ],
)
def test_slice_examples(raw, blocks):
    s = slice_word(Fixed(raw, Q15), CFG)
    assert s.blocks == blocks
    assert reconstruct(s).raw == raw


def test_sign_only_pattern_is_minus_one():
    assert reconstruct(SlicedWord((0, 0, 0, 8), CFG, Q15)).to_float() == -1.0


def test_reconstruct_from_blocks():
    assert reconstruct(SlicedWord((0x2, 0x8, 0xA, 0x5), CFG, Q15)).raw == 0x5A82


def test_slice_rejects_narrow_config():
    with pytest.raises(ValueError):
        slice_word(Fixed(0, Q15), SliceConfig(3, 4))
    with pytest.raises(ValueError):
        SlicedWord((0, 16, 0, 0), CFG, Q15)


def test_slice_reconstruct_bijection_exhaustive():
    seen = set()
    for raw in range(Q15.raw_min, Q15.raw_max + 1):
        s = slice_word(Fixed(raw, Q15), CFG)
        assert all(0 <= b < 16 for b in s.blocks)
        assert reconstruct(s).raw == raw
        seen.add(s.blocks)
    assert len(seen) == 1 << 16


def test_sign_extended_slicing_keeps_value():
    fmt17 = FixedFormat(17, 15)
    cfg = slice_config_for(17, 4)
    for raw in (-65536, -1, 0, 1, 65535, -12345):
        assert reconstruct(slice_word(Fixed(raw, fmt17), cfg)).raw == raw


def test_shift_add_multiply_examples():
    b = Fixed(23170, Q15)
    assert shift_add_multiply(slice_word(Fixed(0), CFG), b).raw == 0
    p = shift_add_multiply(slice_word(Fixed(16384), CFG), b)
    assert p.raw == 16384 * 23170 == 379_617_280
    assert p.fmt == FixedFormat(32, 30)


def test_shift_add_multiply_exhaustive_8bit_object_api():
    cfg = SliceConfig(2, 4)
    vals = range(-128, 128)
    sliced = {a: slice_word(Fixed(a, Q8), cfg) for a in vals}
    for a in vals:
        for b in vals:
            assert shift_add_multiply(sliced[a], Fixed(b, Q8)).raw == a * b


@given(raw16, raw16)
def test_shift_add_multiply_random_16bit(a, b):
    assert shift_add_multiply(slice_word(Fixed(a), CFG), Fixed(b)).raw == a * b


@given(raw16)
def test_multiply_by_minus_one_is_negate_then_shift(b):
    minus_one = slice_word(Fixed(-32768), CFG)
    assert shift_add_multiply(minus_one, Fixed(b)).raw == (-b) << 15


@given(raw16, raw16)
def test_add_count_equals_popcount(a, b):
    counter = AddCounter()
    s = slice_word(Fixed(a), CFG)
    shift_add_multiply(s, Fixed(b), counter)
    assert counter.adds == bin(a & 0xFFFF).count("1") == s.popcount
    assert counter.multiplies == 1


def test_batch_kernel_matches_direct_and_counts(rng):
    a = rng.integers(-(1 << 15), 1 << 15, size=50_000)
    b = rng.integers(-(1 << 15), 1 << 15, size=50_000)
    got, adds = multiply_batch(a, b, CFG)
    assert np.array_equal(got, a * b)
    assert adds == sum(bin(int(x) & 0xFFFF).count("1") for x in a)


def test_batch_kernel_catches_injected_fault():
    vals = np.arange(-128, 128)
    a, b = (m.ravel() for m in np.meshgrid(vals, vals))
    got, _ = multiply_batch(a, b, SliceConfig(2, 4), fault=5)
    assert not np.array_equal(got, a * b)


def test_batch_rejects_length_mismatch():
    with pytest.raises(ValueError):
        multiply_batch(np.zeros(3), np.zeros(4), CFG)

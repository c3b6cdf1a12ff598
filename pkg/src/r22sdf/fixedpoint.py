"""Two's-complement fixed-point scalars.

Values are held as Python integers (``raw``) together with a
:class:`FixedFormat`. Everything is immutable. Adds and subtracts are exact
and grow the word by one bit; the only operations that round are
:func:`quantize`, :func:`scale_half_round` and :func:`round_shift`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import jit

HALF_AWAY = 0
TRUNCATE = 1


class Rounding(str, enum.Enum):
    HALF_AWAY = "half-away"
    TRUNCATE = "truncate"

    @property
    def code(self) -> int:
        return HALF_AWAY if self is Rounding.HALF_AWAY else TRUNCATE


def as_rounding(mode) -> Rounding:
    if isinstance(mode, Rounding):
        return mode
    return Rounding(str(mode).replace("_", "-"))


@dataclass(frozen=True)
class FixedFormat:
    """Word/fraction lengths of a signed fixed-point number (Q1.15 is ``FixedFormat(16, 15)``)."""

    word_bits: int = 16
    frac_bits: int = 15

    def __post_init__(self):
        if not 2 <= self.word_bits <= 64:
            raise ValueError(f"word_bits must be in [2, 64], got {self.word_bits}")
        if not 0 <= self.frac_bits <= self.word_bits - 1:
            raise ValueError(
                f"frac_bits must be in [0, {self.word_bits - 1}], got {self.frac_bits}"
            )

    @property
    def raw_min(self) -> int:
        return -(1 << (self.word_bits - 1))

    @property
    def raw_max(self) -> int:
        return (1 << (self.word_bits - 1)) - 1

    @property
    def lsb(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def min_value(self) -> float:
        return self.raw_min * self.lsb

    @property
    def max_value(self) -> float:
        return self.raw_max * self.lsb

    def widened(self, extra: int = 1) -> "FixedFormat":
        return FixedFormat(self.word_bits + extra, self.frac_bits)

    def contains(self, raw: int) -> bool:
        return self.raw_min <= raw <= self.raw_max

    def __str__(self):
        return f"Q{self.word_bits - self.frac_bits}.{self.frac_bits}"


Q15 = FixedFormat(16, 15)


@dataclass(frozen=True)
class Fixed:
    raw: int
    fmt: FixedFormat = Q15
    saturated: bool = field(default=False, compare=False)

    def __post_init__(self):
        raw = int(self.raw)
        object.__setattr__(self, "raw", raw)
        if not self.fmt.contains(raw):
            raise ValueError(f"raw {raw} outside {self.fmt} range")

    @classmethod
    def saturating(cls, raw: int, fmt: FixedFormat) -> "Fixed":
        """Clamp ``raw`` into ``fmt``, flagging the result if clamping happened."""
        raw = int(raw)
        if raw > fmt.raw_max:
            return cls(fmt.raw_max, fmt, True)
        if raw < fmt.raw_min:
            return cls(fmt.raw_min, fmt, True)
        return cls(raw, fmt)

    def to_float(self) -> float:
        return self.raw * self.fmt.lsb

    def __float__(self):
        return self.to_float()


@dataclass(frozen=True)
class ComplexFixed:
    re: Fixed
    im: Fixed

    def __post_init__(self):
        if self.re.fmt != self.im.fmt:
            raise ValueError("real and imaginary parts must share a format")

    @property
    def fmt(self) -> FixedFormat:
        return self.re.fmt

    @property
    def saturated(self) -> bool:
        return self.re.saturated or self.im.saturated

    @classmethod
    def from_raw(cls, re: int, im: int, fmt: FixedFormat = Q15) -> "ComplexFixed":
        return cls(Fixed(re, fmt), Fixed(im, fmt))

    @classmethod
    def from_complex(cls, z: complex, fmt: FixedFormat = Q15, rounding=Rounding.HALF_AWAY):
        z = complex(z)
        return cls(quantize(z.real, fmt, rounding), quantize(z.imag, fmt, rounding))

    def to_complex(self) -> complex:
        return complex(self.re.to_float(), self.im.to_float())

    def conj(self) -> "ComplexFixed":
        return ComplexFixed(self.re, negate(self.im))

    @property
    def raw(self) -> tuple[int, int]:
        return self.re.raw, self.im.raw


def _round_scaled(x: float, rounding: Rounding) -> int:
    if rounding is Rounding.TRUNCATE:
        return math.floor(x)
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def quantize(value: float, fmt: FixedFormat = Q15, rounding=Rounding.HALF_AWAY) -> Fixed:
    """Round ``value`` onto the ``fmt`` grid, saturating (and flagging) on overflow."""
    raw = _round_scaled(float(value) * (1 << fmt.frac_bits), as_rounding(rounding))
    return Fixed.saturating(raw, fmt)


def _check_same(a: Fixed, b: Fixed):
    if a.fmt != b.fmt:
        raise ValueError(f"format mismatch: {a.fmt} vs {b.fmt}")


def add(a: Fixed, b: Fixed) -> Fixed:
    _check_same(a, b)
    return Fixed(a.raw + b.raw, a.fmt.widened())


def sub(a: Fixed, b: Fixed) -> Fixed:
    _check_same(a, b)
    return Fixed(a.raw - b.raw, a.fmt.widened())


def negate(a: Fixed) -> Fixed:
    """Exact negation; the most negative code saturates to ``raw_max`` with the flag set."""
    return Fixed.saturating(-a.raw, a.fmt)


@jit
def round_shift(v, k, mode):
    """Divide integer ``v`` by ``2**k`` with the given rounding code."""
    if k <= 0:
        return v << (-k)
    if mode == TRUNCATE:
        return v >> k
    half = 1 << (k - 1)
    if v >= 0:
        return (v + half) >> k
    return -((-v + half) >> k)


@jit
def saturate(v, word_bits):
    hi = (1 << (word_bits - 1)) - 1
    lo = -(1 << (word_bits - 1))
    if v > hi:
        return hi, True
    if v < lo:
        return lo, True
    return v, False


def round_shift_array(v: np.ndarray, k: int, mode: int) -> np.ndarray:
    """Vectorised :func:`round_shift` over an int64 array."""
    v = np.asarray(v, dtype=np.int64)
    if k <= 0:
        return v << (-k)
    if mode == TRUNCATE:
        return v >> k
    half = 1 << (k - 1)
    return np.where(v >= 0, (v + half) >> k, -((-v + half) >> k))


def saturate_array(v: np.ndarray, word_bits: int) -> tuple[np.ndarray, int]:
    hi = (1 << (word_bits - 1)) - 1
    lo = -(1 << (word_bits - 1))
    n_sat = int(np.count_nonzero((v > hi) | (v < lo)))
    return np.clip(v, lo, hi), n_sat


def scale_half_round(a: Fixed, rounding=Rounding.HALF_AWAY) -> Fixed:
    """Halve a one-bit-grown value back into its base format."""
    if a.fmt.word_bits < 3:
        raise ValueError("need at least a 3-bit grown word")
    target = FixedFormat(a.fmt.word_bits - 1, min(a.fmt.frac_bits, a.fmt.word_bits - 2))
    if target.frac_bits != a.fmt.frac_bits:
        raise ValueError(f"cannot narrow {a.fmt}: fraction would not fit")
    return Fixed.saturating(round_shift(a.raw, 1, as_rounding(rounding).code), target)

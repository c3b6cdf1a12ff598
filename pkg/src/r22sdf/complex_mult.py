"""Twiddle ROMs and the three-multiplier complex product.

The product ``(a_r + j a_i)(w_r + j w_i)`` is formed as

    re = w_r (a_r - a_i) + a_i (w_r - w_i)
    im = w_i (a_r + a_i) + a_i (w_r - w_i)

with each real product done by :func:`~r22sdf.digit_slicing.sliced_product`.
The data-side operand is always the sliced one; the twiddle-side operand is
the shifted addend. ``a_r +/- a_i`` is one bit wider than the data word and is
sliced with one extra block (sign extended).

Twiddles are quantised to the data format, then arithmetically shifted right
by ``shift`` for storage, so a Q1.15 constant is kept as a
``(16 - shift)``-bit word. The full-precision product is realigned by the same
shift before the single final rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import USE_NUMBA, jit
from .digit_slicing import AddCounter, SliceConfig, shift_add_multiply, slice_word, sliced_product
from .fixedpoint import (
    ComplexFixed,
    Fixed,
    FixedFormat,
    Q15,
    Rounding,
    as_rounding,
    quantize,
    round_shift,
    saturate,
)


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def n_twiddle_stages(n_points: int) -> int:
    """Number of twiddle multipliers in the SDF chain for ``n_points``."""
    return (int(n_points).bit_length() - 2) // 2


def twiddle_exponents(n_points: int, stage: int) -> np.ndarray:
    """Exponent of ``W_N`` consumed in each of the ``N`` clock slots of a frame.

    For twiddle multiplier ``stage`` the sub-transform length is
    ``M = N / 4**stage``; slot ``t`` sits at position ``q = t mod M`` of its
    block, which decomposes as ``q = (M/2) k1 + (M/4) k2 + n3``. The slot's
    rotation is ``W_M^{n3 (k1 + 2 k2)} = W_N^{4**stage * n3 (k1 + 2 k2)}``.
    """
    if not is_power_of_two(n_points) or n_points < 8:
        raise ValueError(f"N must be a power of two >= 8, got {n_points}")
    if not 0 <= stage < n_twiddle_stages(n_points):
        raise ValueError(
            f"N={n_points} has twiddle stages 0..{n_twiddle_stages(n_points) - 1}, got {stage}"
        )
    m = n_points >> (2 * stage)
    q = np.arange(n_points) % m
    k1 = q // (m // 2)
    k2 = (q // (m // 4)) % 2
    n3 = q % (m // 4)
    return ((4 ** stage) * n3 * (k1 + 2 * k2)) % n_points


@dataclass(frozen=True)
class TwiddleEntry:
    slot: int
    exponent: int
    stored_re: int
    stored_im: int
    exact_re: int
    exact_im: int


@dataclass(frozen=True)
class TwiddleRom:
    entries: tuple[TwiddleEntry, ...]
    shift: int
    stored_bits: int
    n_points: int
    stage: int
    fmt: FixedFormat

    @property
    def stored(self) -> np.ndarray:
        """``(N, 2)`` int64 array of the stored (narrowed) constants."""
        return np.array([(e.stored_re, e.stored_im) for e in self.entries], dtype=np.int64)

    def fits(self, entry: TwiddleEntry) -> bool:
        lo = -(1 << (self.stored_bits - 1))
        hi = (1 << (self.stored_bits - 1)) - 1
        return lo <= entry.stored_re <= hi and lo <= entry.stored_im <= hi

    def all_fit(self) -> bool:
        return all(self.fits(e) for e in self.entries)

    def stored_value(self, entry: TwiddleEntry) -> complex:
        scale = 2.0 ** -(self.fmt.frac_bits - self.shift)
        return complex(entry.stored_re * scale, entry.stored_im * scale)


def quantize_twiddle(exponent: int, n_points: int, fmt: FixedFormat = Q15) -> tuple[int, int]:
    """Round-to-nearest raw components of ``W_N^exponent`` (saturating at +1.0)."""
    angle = 2.0 * math.pi * exponent / n_points
    re = quantize(math.cos(angle), fmt, Rounding.HALF_AWAY).raw
    im = quantize(-math.sin(angle), fmt, Rounding.HALF_AWAY).raw
    return re, im


def gen_twiddle_rom(n_points: int, stage: int = 0, fmt: FixedFormat = Q15, shift: int = 6) -> TwiddleRom:
    if not 0 <= shift < fmt.word_bits - 1:
        raise ValueError(f"shift must be in [0, {fmt.word_bits - 2}], got {shift}")
    exps = twiddle_exponents(n_points, stage)
    entries = []
    for slot, e in enumerate(exps):
        re, im = quantize_twiddle(int(e), n_points, fmt)
        entries.append(TwiddleEntry(slot, int(e), re >> shift, im >> shift, re, im))
    return TwiddleRom(tuple(entries), shift, fmt.word_bits - shift, n_points, stage, fmt)


# -- raw kernels ------------------------------------------------------------

@jit
def cmul3_raw(ar, ai, wr, wi, n_blocks, p, fault):
    """Full-precision three-multiplier product; returns ``(re, im, n_adds)``.

    ``n_blocks * p`` is the data word width; the sums ``ar -/+ ai`` use one
    extra block.
    """
    m1, c1 = sliced_product(ar - ai, wr, n_blocks + 1, p, fault)
    m2, c2 = sliced_product(ar + ai, wi, n_blocks + 1, p, fault)
    m3, c3 = sliced_product(ai, wr - wi, n_blocks, p, fault)
    return m1 + m3, m2 + m3, c1 + c2 + c3


@jit
def cmul3_rounded(ar, ai, wr, wi, n_blocks, p, realign, word_bits, mode):
    """:func:`cmul3_raw` followed by the single rounding back to the data format.

    ``realign`` is the fraction-bit count of the stored twiddle. Returns
    ``(re, im, n_adds, n_saturated)``.
    """
    re, im, n = cmul3_raw(ar, ai, wr, wi, n_blocks, p, -1)
    re, s1 = saturate(round_shift(re, realign, mode), word_bits)
    im, s2 = saturate(round_shift(im, realign, mode), word_bits)
    return re, im, n, int(s1) + int(s2)


def _cmul3_batch_loop(ar, ai, wr, wi, n_blocks, p, fault):
    n = ar.shape[0]
    re = np.empty(n, dtype=np.int64)
    im = np.empty(n, dtype=np.int64)
    for i in range(n):
        r, m, _ = cmul3_raw(ar[i], ai[i], wr[i], wi[i], n_blocks, p, fault)
        re[i] = r
        im[i] = m
    return re, im


_cmul3_batch_jit = jit(_cmul3_batch_loop)


def cmul3_batch(ar, ai, wr, wi, cfg: SliceConfig, fault: int = -1):
    """Vectorised full-precision :func:`cmul3_raw` over int64 arrays."""
    args = [np.ascontiguousarray(x, dtype=np.int64).ravel() for x in (ar, ai, wr, wi)]
    if USE_NUMBA:
        return _cmul3_batch_jit(*args, cfg.b, cfg.p, fault)
    from .digit_slicing import _multiply_batch_numpy

    ar, ai, wr, wi = args
    m1, _ = _multiply_batch_numpy(ar - ai, wr, cfg.b + 1, cfg.p, fault)
    m2, _ = _multiply_batch_numpy(ar + ai, wi, cfg.b + 1, cfg.p, fault)
    m3, _ = _multiply_batch_numpy(ai, wr - wi, cfg.b, cfg.p, fault)
    return m1 + m3, m2 + m3


@jit
def cmul3_exhaustive(bits, p):
    """Check the three-multiplier form against the direct form over every
    ``bits``-bit value of ``ar, ai, wr, wi``.

    For each data pair the three real products are formed by shift-add for
    every twiddle-side operand they can meet (``wr``, ``wi`` and ``wr - wi``)
    and then combined for all ``(wr, wi)``. Returns
    ``(n_checked, n_bad, first_bad)``; ``first_bad`` holds ``ar, ai, wr, wi``
    of the first mismatch (zeros if none).
    """
    lo = -(1 << (bits - 1))
    span = 1 << bits
    n_blocks = bits // p
    first = np.zeros(4, dtype=np.int64)
    m1 = np.empty(span, dtype=np.int64)
    m2 = np.empty(span, dtype=np.int64)
    m3 = np.empty(2 * span - 1, dtype=np.int64)
    n_bad = 0
    n = 0
    for ar in range(lo, lo + span):
        for ai in range(lo, lo + span):
            for i in range(span):
                m1[i], _ = sliced_product(ar - ai, lo + i, n_blocks + 1, p, -1)
                m2[i], _ = sliced_product(ar + ai, lo + i, n_blocks + 1, p, -1)
            for i in range(2 * span - 1):
                m3[i], _ = sliced_product(ai, i - (span - 1), n_blocks, p, -1)
            for i in range(span):
                wr = lo + i
                for k in range(span):
                    wi = lo + k
                    d = m3[wr - wi + span - 1]
                    n += 1
                    if m1[i] + d != ar * wr - ai * wi or m2[k] + d != ar * wi + ai * wr:
                        if n_bad == 0:
                            first[0] = ar
                            first[1] = ai
                            first[2] = wr
                            first[3] = wi
                        n_bad += 1
    return n, n_bad, first


def cmul4_raw(ar: int, ai: int, wr: int, wi: int) -> tuple[int, int]:
    """Direct four-multiplication complex product (verification oracle only)."""
    return ar * wr - ai * wi, ar * wi + ai * wr


# -- object-level API -------------------------------------------------------

def _twiddle_raw(w) -> tuple[int, int]:
    if isinstance(w, TwiddleEntry):
        return w.stored_re, w.stored_im
    if isinstance(w, ComplexFixed):
        return w.re.raw, w.im.raw
    re, im = w
    return int(re), int(im)


def cmul3_full(a: ComplexFixed, w, cfg: SliceConfig, counter: AddCounter | None = None) -> tuple[int, int]:
    """Full-precision raw product before any rounding.

    Runs the three real products through :func:`shift_add_multiply`, so a
    supplied ``counter`` sees every multiplier invocation.
    """
    cfg.check(a.fmt)
    wr, wi = _twiddle_raw(w)
    wide = a.fmt.widened()
    tw = FixedFormat(max(a.fmt.word_bits, 2 + max(abs(wr), abs(wi)).bit_length()), a.fmt.frac_bits)
    ext = SliceConfig(cfg.b + 1, cfg.p)
    ar, ai = a.re.raw, a.im.raw
    m1 = shift_add_multiply(slice_word(Fixed(ar - ai, wide), ext), Fixed(wr, tw), counter)
    m2 = shift_add_multiply(slice_word(Fixed(ar + ai, wide), ext), Fixed(wi, tw), counter)
    m3 = shift_add_multiply(slice_word(a.im, cfg), Fixed(wr - wi, tw), counter)
    return m1.raw + m3.raw, m2.raw + m3.raw


def cmul3(
    a: ComplexFixed,
    w,
    cfg: SliceConfig,
    shift: int = 6,
    rounding=Rounding.HALF_AWAY,
    counter: AddCounter | None = None,
    bypass_unity: bool = False,
) -> ComplexFixed:
    """Rotate ``a`` by a stored twiddle and round once back to ``a``'s format.

    ``w`` is a :class:`TwiddleEntry`, a ``(re, im)`` pair of stored raw ints,
    or a :class:`ComplexFixed` whose fraction is ``frac_bits - shift``.
    With ``bypass_unity`` an exponent-0 entry passes ``a`` through untouched.
    """
    if bypass_unity and isinstance(w, TwiddleEntry) and w.exponent == 0:
        return a
    fmt = a.fmt
    re, im = cmul3_full(a, w, cfg, counter)
    realign = fmt.frac_bits - shift
    mode = as_rounding(rounding).code
    return ComplexFixed(
        Fixed.saturating(round_shift(re, realign, mode), fmt),
        Fixed.saturating(round_shift(im, realign, mode), fmt),
    )

"""Functional Radix-2^2 DIF FFT models and the brute-force DFT oracle.

Both models walk the same stage chain as the SDF pipeline
(:func:`~r22sdf.config.stage_plan`) over the in-place array, so the array
position of a value equals its slot in the pipeline's output stream. Output is
bit-reversed.

The fixed-point model uses direct integer complex products; the pipeline uses
the shift-add three-multiplier form. Bit-exact agreement between the two is
the main cross-check of the pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .complex_mult import gen_twiddle_rom, is_power_of_two, twiddle_exponents
from .config import BF2I, BF2II, TWIDDLE, FFTConfig, stage_plan
from .fixedpoint import (
    ComplexFixed,
    Fixed,
    FixedFormat,
    Rounding,
    add,
    as_rounding,
    round_shift_array,
    saturate_array,
    scale_half_round,
    sub,
)

TIME = "time"
FREQUENCY = "frequency"
NATURAL = "natural"
BIT_REVERSED = "bit-reversed"


@dataclass(frozen=True)
class Frame:
    """One block of ``N`` samples.

    ``samples`` is complex128 of shape ``(N,)`` for double frames, or int64 of
    shape ``(N, 2)`` holding raw ``(re, im)`` when ``fmt`` is set.
    """

    samples: np.ndarray
    domain: str = TIME
    ordering: str = NATURAL
    fmt: FixedFormat | None = None

    def __post_init__(self):
        n = len(self.samples)
        if not is_power_of_two(n) or n < 8:
            raise ValueError(f"frame length must be a power of two >= 8, got {n}")
        if self.domain not in (TIME, FREQUENCY):
            raise ValueError(f"bad domain tag {self.domain!r}")
        if self.ordering not in (NATURAL, BIT_REVERSED):
            raise ValueError(f"bad ordering tag {self.ordering!r}")
        if self.fmt is not None and np.shape(self.samples) != (n, 2):
            raise ValueError("fixed frames hold an (N, 2) array of raw values")

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def is_fixed(self) -> bool:
        return self.fmt is not None

    def to_complex(self) -> np.ndarray:
        if self.fmt is None:
            return np.asarray(self.samples, dtype=np.complex128)
        s = np.asarray(self.samples, dtype=np.float64) * self.fmt.lsb
        return s[:, 0] + 1j * s[:, 1]

    @classmethod
    def from_fixed(cls, values, fmt: FixedFormat, **tags) -> "Frame":
        raw = np.array([v.raw for v in values], dtype=np.int64)
        return cls(raw, fmt=fmt, **tags)


class IndexDecomposition(NamedTuple):
    a1: int
    a2: int
    a3: int


def _check_index(i: int, n_points: int):
    if not is_power_of_two(n_points) or n_points < 4:
        raise ValueError(f"N must be a power of two >= 4, got {n_points}")
    if not 0 <= i < n_points:
        raise ValueError(f"index {i} outside [0, {n_points})")


def decompose_n(n: int, n_points: int) -> IndexDecomposition:
    """``n = (N/2) n1 + (N/4) n2 + n3``."""
    _check_index(n, n_points)
    return IndexDecomposition(n // (n_points // 2), (n // (n_points // 4)) % 2, n % (n_points // 4))


def decompose_k(k: int, n_points: int) -> IndexDecomposition:
    """``k = k1 + 2 k2 + 4 k3``."""
    _check_index(k, n_points)
    return IndexDecomposition(k & 1, (k >> 1) & 1, k >> 2)


def dft_reference(x) -> np.ndarray:
    """Unscaled O(N^2) DFT of the last axis, double precision."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    idx = np.arange(n)
    w = np.exp(-2j * np.pi * (np.outer(idx, idx) % n) / n)
    return x @ w.T


def dft_frame(frame: Frame) -> Frame:
    if frame.domain != TIME or frame.ordering != NATURAL:
        raise ValueError("DFT oracle takes natural-order time-domain frames")
    return Frame(dft_reference(frame.to_complex()), FREQUENCY, NATURAL)


def bit_reverse_indices(n_points: int) -> np.ndarray:
    if not is_power_of_two(n_points):
        raise ValueError(f"length must be a power of two, got {n_points}")
    bits = n_points.bit_length() - 1
    idx = np.arange(n_points)
    out = np.zeros(n_points, dtype=np.int64)
    for b in range(bits):
        out |= ((idx >> b) & 1) << (bits - 1 - b)
    return out


def bit_reverse_permute(frame):
    """Swap between natural and bit-reversed order (an involution).

    Accepts a :class:`Frame` (the ordering tag is flipped) or an array whose
    first axis is the sample axis.
    """
    if isinstance(frame, Frame):
        perm = bit_reverse_indices(frame.n)
        other = BIT_REVERSED if frame.ordering == NATURAL else NATURAL
        return Frame(np.asarray(frame.samples)[perm], frame.domain, other, frame.fmt)
    arr = np.asarray(frame)
    return arr[bit_reverse_indices(arr.shape[0])]


# -- butterflies ------------------------------------------------------------

def _minus_j(z: complex) -> complex:
    # swap re/im and flip the sign of the new imaginary part
    return complex(z.imag, -z.real)


def bf1(xa, xb, k1: int, *, scale: bool = False, rounding=Rounding.HALF_AWAY):
    """``xa + (-1)**k1 * xb``; fixed operands widen then optionally halve."""
    if isinstance(xa, ComplexFixed):
        op = sub if k1 else add
        re, im = op(xa.re, xb.re), op(xa.im, xb.im)
        return _finish(re, im, xa.fmt, scale, rounding)
    out = xa - xb if k1 else xa + xb
    return out * 0.5 if scale else out


def bf2(xa, xb, k1: int, k2: int, *, scale: bool = False, rounding=Rounding.HALF_AWAY):
    """``xa + (-j)**(k1 + 2 k2) * xb``, the -j being a swap plus add/sub exchange."""
    if isinstance(xa, ComplexFixed):
        if k1:
            # -j*b = b.im - j b.re: real gets +/- b.im, imaginary gets -/+ b.re
            br, bi = xb.im, xb.re
            op_re = sub if k2 else add
            op_im = add if k2 else sub
        else:
            br, bi = xb.re, xb.im
            op_re = op_im = sub if k2 else add
        return _finish(op_re(xa.re, br), op_im(xa.im, bi), xa.fmt, scale, rounding)
    b = _minus_j(complex(xb)) if k1 else complex(xb)
    out = xa - b if k2 else xa + b
    return out * 0.5 if scale else out


def _finish(re: Fixed, im: Fixed, fmt: FixedFormat, scale: bool, rounding) -> ComplexFixed:
    if scale:
        return ComplexFixed(scale_half_round(re, rounding), scale_half_round(im, rounding))
    return ComplexFixed(Fixed.saturating(re.raw, fmt), Fixed.saturating(im.raw, fmt))


# -- whole-transform models -------------------------------------------------

def fft_r22_double(x, scaling: bool = False) -> np.ndarray:
    """Radix-2^2 DIF over the last axis; returns bit-reversed spectra."""
    x = np.array(x, dtype=np.complex128)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x)
    f, n = x.shape
    half = 0.5 if scaling else 1.0
    for st in stage_plan(n):
        if st.kind == BF2I:
            v = x.reshape(f, -1, 2, st.feedback)
            a, b = v[:, :, 0, :], v[:, :, 1, :]
            x = np.stack([a + b, a - b], axis=2).reshape(f, n) * half
        elif st.kind == BF2II:
            v = x.reshape(f, -1, 2, 2, st.feedback)
            a, b = v[:, :, :, 0, :], v[:, :, :, 1, :].copy()
            b[:, :, 1, :] = b[:, :, 1, :].imag - 1j * b[:, :, 1, :].real
            x = np.stack([a + b, a - b], axis=3).reshape(f, n) * half
        else:
            e = twiddle_exponents(n, st.twiddle_stage)
            x = x * np.exp(-2j * np.pi * e / n)
    return x[0] if squeeze else x


class FixedResult(NamedTuple):
    re: np.ndarray
    im: np.ndarray
    saturations: int


def fft_r22_fixed(re, im, config: FFTConfig) -> FixedResult:
    """Bit-accurate fixed-point Radix-2^2 DIF over raw int arrays ``(..., N)``.

    Rounding points match the pipeline: each butterfly widens by one bit and
    (if its scale flag is set) halves with rounding; each twiddle product is
    rounded once. Anything still outside the word saturates and is counted.
    """
    re = np.array(re, dtype=np.int64)
    im = np.array(im, dtype=np.int64)
    shape = re.shape
    n = config.n_points
    if shape[-1] != n or im.shape != shape:
        raise ValueError(f"expected (..., {n}) raw arrays")
    re = re.reshape(-1, n)
    im = im.reshape(-1, n)
    f = re.shape[0]
    w = config.fmt.word_bits
    mode = config.rounding.code
    n_sat = 0

    def narrow(v, scale):
        nonlocal n_sat
        if scale:
            v = round_shift_array(v, 1, mode)
        v, s = saturate_array(v, w)
        n_sat += s
        return v

    for st in config.stages:
        if st.kind == BF2I:
            out = []
            for part in (re, im):
                v = part.reshape(f, -1, 2, st.feedback)
                a, b = v[:, :, 0, :], v[:, :, 1, :]
                out.append(narrow(np.stack([a + b, a - b], axis=2).reshape(f, n), config.scale_bf1))
            re, im = out
        elif st.kind == BF2II:
            vr = re.reshape(f, -1, 2, 2, st.feedback)
            vi = im.reshape(f, -1, 2, 2, st.feedback)
            ar, ai = vr[:, :, :, 0, :], vi[:, :, :, 0, :]
            br, bi = vr[:, :, :, 1, :].copy(), vi[:, :, :, 1, :].copy()
            # k1 = 1 half: -j * b
            br[:, :, 1, :], bi[:, :, 1, :] = vi[:, :, 1, 1, :], -vr[:, :, 1, 1, :]
            re = narrow(np.stack([ar + br, ar - br], axis=3).reshape(f, n), config.scale_bf2)
            im = narrow(np.stack([ai + bi, ai - bi], axis=3).reshape(f, n), config.scale_bf2)
        else:
            rom = gen_twiddle_rom(n, st.twiddle_stage, config.fmt, config.twiddle_shift)
            tw = rom.stored
            exps = np.array([e.exponent for e in rom.entries])
            wr, wi = tw[:, 0], tw[:, 1]
            pr = re * wr - im * wi
            pi = re * wi + im * wr
            realign = config.fmt.frac_bits - config.twiddle_shift
            pr = narrow(round_shift_array(pr, realign, mode), False)
            pi = narrow(round_shift_array(pi, realign, mode), False)
            if config.unity_bypass:
                keep = exps == 0
                pr = np.where(keep, re, pr)
                pi = np.where(keep, im, pi)
            re, im = pr, pi
    return FixedResult(re.reshape(shape), im.reshape(shape), n_sat)


def fft_r22_functional(
    x: Frame,
    arithmetic: str = "double",
    scaling: bool = True,
    config: FFTConfig | None = None,
) -> Frame:
    """Transform one natural-order time frame; the result is tagged bit-reversed."""
    if x.domain != TIME or x.ordering != NATURAL:
        raise ValueError("expected a natural-order time-domain frame")
    if arithmetic == "double":
        out = fft_r22_double(x.to_complex(), scaling)
        return Frame(out, FREQUENCY, BIT_REVERSED)
    if arithmetic != "fixed":
        raise ValueError(f"arithmetic must be 'double' or 'fixed', got {arithmetic!r}")
    if config is None:
        fmt = x.fmt or FixedFormat(16, 15)
        from .config import auto_slice

        config = FFTConfig(
            n_points=x.n, fmt=fmt, slice=auto_slice(fmt.word_bits),
            scale_bf1=scaling, scale_bf2=scaling,
        )
    if x.is_fixed:
        if x.fmt != config.fmt:
            raise ValueError(f"frame format {x.fmt} differs from config {config.fmt}")
        raw = np.asarray(x.samples)
    else:
        raw = quantize_array(x.to_complex(), config.fmt, config.rounding)
    res = fft_r22_fixed(raw[:, 0], raw[:, 1], config)
    return Frame(np.stack([res.re, res.im], axis=-1), FREQUENCY, BIT_REVERSED, config.fmt)


def quantize_array(z, fmt: FixedFormat, rounding=Rounding.HALF_AWAY) -> np.ndarray:
    """Quantise complex samples to raw ``(..., 2)`` int64, saturating."""
    z = np.asarray(z, dtype=np.complex128)
    scaled = np.stack([z.real, z.imag], axis=-1) * float(1 << fmt.frac_bits)
    if as_rounding(rounding) is Rounding.TRUNCATE:
        raw = np.floor(scaled)
    else:
        raw = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    return np.clip(raw, fmt.raw_min, fmt.raw_max).astype(np.int64)

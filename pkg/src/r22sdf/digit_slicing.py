"""Digit slicing and the shift-and-add multiplier built on it.

A ``word_bits``-wide two's-complement pattern is cut into ``b`` blocks of
``p`` bits, least significant block first. Every bit carries weight
``2**(p*k + j)`` except the very top bit, which carries ``-2**(p*b - 1)``.
A product ``A * B`` is then the sum of copies of ``B`` shifted left by each
set bit position of ``A``, with the top bit subtracting.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import USE_NUMBA, jit
from .fixedpoint import Fixed, FixedFormat


@dataclass(frozen=True)
class SliceConfig:
    b: int = 4
    p: int = 4

    def __post_init__(self):
        if self.b < 1 or self.p < 1:
            raise ValueError(f"need b >= 1 and p >= 1, got b={self.b} p={self.p}")

    @property
    def word_bits(self) -> int:
        return self.b * self.p

    def check(self, fmt: FixedFormat):
        if self.word_bits != fmt.word_bits:
            raise ValueError(
                f"slice b*p = {self.word_bits} does not match {fmt.word_bits}-bit word"
            )


DEFAULT_SLICE = SliceConfig(4, 4)


def slice_config_for(word_bits: int, p: int) -> SliceConfig:
    """Smallest slicing with ``p``-bit blocks covering a ``word_bits`` word (sign-extended)."""
    return SliceConfig(-(-word_bits // p), p)


@dataclass(frozen=True)
class SlicedWord:
    blocks: tuple[int, ...]
    config: SliceConfig
    fmt: FixedFormat

    def __post_init__(self):
        if len(self.blocks) != self.config.b:
            raise ValueError(f"expected {self.config.b} blocks, got {len(self.blocks)}")
        limit = 1 << self.config.p
        if any(not 0 <= x < limit for x in self.blocks):
            raise ValueError(f"block values must lie in [0, {limit})")

    def bits(self):
        """Yield ``(k, j, bit)`` for every bit, LSB first."""
        for k, block in enumerate(self.blocks):
            for j in range(self.config.p):
                yield k, j, (block >> j) & 1

    @property
    def popcount(self) -> int:
        return sum(bin(x).count("1") for x in self.blocks)


def slice_word(x: Fixed, cfg: SliceConfig) -> SlicedWord:
    """Partition the raw two's-complement pattern of ``x`` into ``cfg.b`` blocks.

    The slicing may be wider than the word (sign extension); it may not be
    narrower.
    """
    if cfg.word_bits < x.fmt.word_bits:
        raise ValueError(
            f"slice b*p = {cfg.word_bits} is narrower than the {x.fmt.word_bits}-bit word"
        )
    pattern = x.raw & ((1 << cfg.word_bits) - 1)
    mask = (1 << cfg.p) - 1
    blocks = tuple((pattern >> (cfg.p * k)) & mask for k in range(cfg.b))
    return SlicedWord(blocks, cfg, x.fmt)


def reconstruct(s: SlicedWord) -> Fixed:
    cfg = s.config
    total = 0
    for k, j, bit in s.bits():
        if bit:
            pos = cfg.p * k + j
            total += -(1 << pos) if pos == cfg.word_bits - 1 else (1 << pos)
    return Fixed(total, s.fmt)


class AddCounter:
    """Observer counting the conditional add/subtract operations of the multiplier."""

    def __init__(self):
        self.adds = 0
        self.multiplies = 0

    def reset(self):
        self.adds = 0
        self.multiplies = 0


def shift_add_multiply(a: SlicedWord, b: Fixed, counter: AddCounter | None = None) -> Fixed:
    """Exact product ``a * b`` using only shifted adds of ``b``."""
    cfg = a.config
    top = cfg.word_bits - 1
    acc = 0
    n_adds = 0
    for k, j, bit in a.bits():
        if not bit:
            continue
        pos = cfg.p * k + j
        if pos == top:
            acc -= b.raw << pos
        else:
            acc += b.raw << pos
        n_adds += 1
    if counter is not None:
        counter.adds += n_adds
        counter.multiplies += 1
    fmt = FixedFormat(a.fmt.word_bits + b.fmt.word_bits, a.fmt.frac_bits + b.fmt.frac_bits)
    return Fixed(acc, fmt)


# -- raw integer kernels ----------------------------------------------------

@jit
def sliced_product(a, b, n_blocks, p, fault):
    """Shift-add product of raw ints; returns ``(product, n_adds)``.

    ``a`` is read as an ``n_blocks * p``-bit two's-complement pattern.
    ``fault >= 0`` doubles the weight of that bit position (test hook).
    """
    width = n_blocks * p
    pattern = a & ((1 << width) - 1)
    block_mask = (1 << p) - 1
    acc = 0
    n_adds = 0
    for k in range(n_blocks):
        block = (pattern >> (p * k)) & block_mask
        if block == 0:
            continue
        for j in range(p):
            if (block >> j) & 1:
                pos = p * k + j
                sh = pos + 1 if pos == fault else pos
                if pos == width - 1:
                    acc -= b << sh
                else:
                    acc += b << sh
                n_adds += 1
    return acc, n_adds


def _multiply_batch_loop(a, b, n_blocks, p, fault):
    out = np.empty(a.shape[0], dtype=np.int64)
    total = 0
    for i in range(a.shape[0]):
        r, n = sliced_product(a[i], b[i], n_blocks, p, fault)
        out[i] = r
        total += n
    return out, total


_multiply_batch_jit = jit(_multiply_batch_loop)


def _multiply_batch_numpy(a, b, n_blocks, p, fault):
    width = n_blocks * p
    pattern = a & ((1 << width) - 1)
    acc = np.zeros(a.shape[0], dtype=np.int64)
    total = 0
    for pos in range(width):
        bit = ((pattern >> pos) & 1).astype(bool)
        sh = pos + 1 if pos == fault else pos
        term = b << sh
        if pos == width - 1:
            acc -= np.where(bit, term, 0)
        else:
            acc += np.where(bit, term, 0)
        total += int(bit.sum())
    return acc, total


def multiply_batch(a, b, cfg: SliceConfig, fault: int = -1):
    """Shift-add products of two int64 arrays; returns ``(products, total_adds)``."""
    a = np.ascontiguousarray(a, dtype=np.int64).ravel()
    b = np.ascontiguousarray(b, dtype=np.int64).ravel()
    if a.shape != b.shape:
        raise ValueError("operand arrays differ in length")
    if USE_NUMBA:
        return _multiply_batch_jit(a, b, cfg.b, cfg.p, fault)
    return _multiply_batch_numpy(a, b, cfg.b, cfg.p, fault)

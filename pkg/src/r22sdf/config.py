"""Datapath configuration shared by the functional and cycle-accurate models."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

from .complex_mult import is_power_of_two, n_twiddle_stages
from .digit_slicing import SliceConfig
from .fixedpoint import FixedFormat, Rounding, as_rounding

BF2I = "BF2I"
BF2II = "BF2II"
TWIDDLE = "TwiddleMult"


class Stage(NamedTuple):
    kind: str
    feedback: int  # 0 for twiddle multipliers
    twiddle_stage: int  # -1 for butterflies


def stage_plan(n_points: int) -> list[Stage]:
    """Stage chain of the SDF pipeline, e.g. N=8 gives BF2I(4), BF2II(2), TW, BF2I(1)."""
    if not is_power_of_two(n_points) or n_points < 8:
        raise ValueError(f"N must be a power of two >= 8, got {n_points}")
    plan = []
    fb = n_points // 2
    tw = 0
    n_tw = n_twiddle_stages(n_points)
    while fb >= 1:
        plan.append(Stage(BF2I, fb, -1))
        fb //= 2
        if fb < 1:
            break
        plan.append(Stage(BF2II, fb, -1))
        fb //= 2
        if tw < n_tw:
            plan.append(Stage(TWIDDLE, 0, tw))
            tw += 1
    return plan


@dataclass(frozen=True)
class FFTConfig:
    """Fixed-point FFT datapath parameters. Defaults are the 8-point, 16-bit, 4x4-slice build."""

    n_points: int = 8
    fmt: FixedFormat = field(default_factory=lambda: FixedFormat(16, 15))
    slice: SliceConfig = field(default_factory=lambda: SliceConfig(4, 4))
    rounding: Rounding = Rounding.HALF_AWAY
    scale_bf1: bool = True
    scale_bf2: bool = True
    twiddle_shift: int = 6
    unity_bypass: bool = True
    mult_delay: int = 1
    bf_delay: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rounding", as_rounding(self.rounding))
        if not is_power_of_two(self.n_points) or self.n_points < 8:
            raise ValueError(f"N must be a power of two >= 8, got {self.n_points}")
        self.slice.check(self.fmt)
        if not 0 <= self.twiddle_shift < self.fmt.frac_bits:
            raise ValueError(
                f"twiddle shift must be in [0, {self.fmt.frac_bits - 1}], got {self.twiddle_shift}"
            )
        if self.mult_delay < 0 or self.bf_delay < 0:
            raise ValueError("pipeline register depths must be >= 0")

    @property
    def stages(self) -> list[Stage]:
        return stage_plan(self.n_points)

    def with_(self, **kw) -> "FFTConfig":
        return replace(self, **kw)

    def summary(self) -> str:
        return (
            f"N={self.n_points} fmt={self.fmt} slice={self.slice.b}x{self.slice.p} "
            f"rounding={self.rounding.value} scale_bf1={int(self.scale_bf1)} "
            f"scale_bf2={int(self.scale_bf2)} shift={self.twiddle_shift} "
            f"unity_bypass={int(self.unity_bypass)}"
        )


def auto_slice(word_bits: int, max_p: int = 4) -> SliceConfig:
    """Largest block width ``p <= max_p`` dividing ``word_bits``."""
    for p in range(min(max_p, word_bits), 0, -1):
        if word_bits % p == 0:
            return SliceConfig(word_bits // p, p)
    raise AssertionError("unreachable")

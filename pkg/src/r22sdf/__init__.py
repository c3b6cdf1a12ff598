"""Bit- and cycle-accurate model of a Radix-2^2 SDF FFT with digit-sliced
shift-add twiddle multipliers."""
from .complex_mult import TwiddleRom, cmul3, gen_twiddle_rom
from .config import FFTConfig, stage_plan
from .digit_slicing import SliceConfig, SlicedWord, reconstruct, shift_add_multiply, slice_word
from .fixedpoint import ComplexFixed, Fixed, FixedFormat, Rounding, quantize
from .metrics import ErrorReport, compare
from .radix22 import Frame, bit_reverse_permute, dft_reference, fft_r22_functional
from .sdf_pipeline import PipelineState, build_pipeline, run_frames

__version__ = "0.1.0"

"""Accuracy of fixed-point spectra against the double-precision oracle."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .radix22 import FREQUENCY, Frame


@dataclass(frozen=True)
class ErrorReport:
    sqnr_db: float
    max_abs_err: float
    rms_err: float
    per_bin: np.ndarray = field(repr=False)  # (frames, N) complex errors, in reference units
    corpus_id: str = ""
    config: str = ""
    n_frames: int = 0

    @property
    def error_free(self) -> bool:
        return math.isinf(self.sqnr_db)

    def rows(self) -> list[tuple[str, str]]:
        return [
            ("corpus", self.corpus_id),
            ("config", self.config),
            ("frames", str(self.n_frames)),
            ("sqnr_db", _fmt(self.sqnr_db)),
            ("max_abs_err", _fmt(self.max_abs_err)),
            ("rms_err", _fmt(self.rms_err)),
        ]

    def to_text(self) -> str:
        width = max(len(k) for k, _ in self.rows())
        return "".join(f"{k:<{width}}  {v}\n" for k, v in self.rows())

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("metric,value\n")
        for k, v in self.rows():
            v = f'"{v}"' if "," in v else v
            buf.write(f"{k},{v}\n")
        return buf.getvalue()


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.6f}" if abs(x) >= 1e-3 or x == 0 else f"{x:.6e}"


def _stack(frames, what: str) -> tuple[np.ndarray, str]:
    frames = list(frames)
    if not frames:
        raise ValueError(f"empty {what} corpus")
    orderings = {f.ordering for f in frames}
    if len(orderings) != 1:
        raise ValueError(f"{what} corpus mixes orderings {sorted(orderings)}")
    if any(f.domain != FREQUENCY for f in frames):
        raise ValueError(f"{what} corpus must hold frequency-domain frames")
    return np.stack([f.to_complex() for f in frames]), orderings.pop()


def sqnr_db(ref: np.ndarray, test: np.ndarray) -> float:
    ref = np.asarray(ref, dtype=np.complex128).ravel()
    err = ref - np.asarray(test, dtype=np.complex128).ravel()
    noise = float(np.sum(err.real ** 2 + err.imag ** 2))
    signal = float(np.sum(ref.real ** 2 + ref.imag ** 2))
    if noise == 0.0:
        return math.inf
    return 10.0 * math.log10(signal / noise)


def compare(ref, fix, scale: float = 1.0, corpus_id: str = "", config: str = "") -> ErrorReport:
    """Compare fixed-point spectra with reference spectra.

    ``fix`` values are divided by ``scale`` (the gain the fixed model applied,
    e.g. ``1/N`` with per-butterfly halving) before comparison, so errors come
    out in reference units. Both corpora must carry the same ordering tag.
    """
    r, r_order = _stack(ref, "reference")
    x, x_order = _stack(fix, "fixed")
    if r_order != x_order:
        raise ValueError(f"ordering mismatch: reference {r_order}, fixed {x_order}")
    if r.shape != x.shape:
        raise ValueError(f"corpus shapes differ: {r.shape} vs {x.shape}")
    if scale == 0:
        raise ValueError("scale must be non-zero")
    err = x / scale - r
    mag = np.abs(err)
    return ErrorReport(
        sqnr_db=sqnr_db(r, x / scale),
        max_abs_err=float(mag.max()),
        rms_err=float(math.sqrt(np.mean(mag ** 2))),
        per_bin=err,
        corpus_id=corpus_id,
        config=config,
        n_frames=r.shape[0],
    )


def corpus_report(config, x: np.ndarray, engine: str = "functional", corpus_id: str = "") -> ErrorReport:
    """Quantise the ``(frames, N)`` complex corpus, transform it with the fixed
    model (``functional`` or ``pipeline``) and compare against the DFT of the
    quantised input, all in bit-reversed order."""
    from .radix22 import BIT_REVERSED, bit_reverse_indices, dft_reference, fft_r22_fixed, quantize_array
    from .sdf_pipeline import build_pipeline, run_frames

    raw = quantize_array(x, config.fmt, config.rounding)
    if engine == "functional":
        res = fft_r22_fixed(raw[..., 0], raw[..., 1], config)
        out = np.stack([res.re, res.im], axis=-1)
    elif engine == "pipeline":
        run = run_frames(build_pipeline(config), list(raw))
        out = np.stack([f.samples for f in run.outputs])
    else:
        raise ValueError(f"engine must be 'functional' or 'pipeline', got {engine!r}")
    xq = (raw[..., 0] + 1j * raw[..., 1]) * config.fmt.lsb
    ref = dft_reference(xq)[:, bit_reverse_indices(config.n_points)]
    ref_frames = [Frame(r, FREQUENCY, BIT_REVERSED) for r in ref]
    fix_frames = [Frame(o, FREQUENCY, BIT_REVERSED, config.fmt) for o in out]
    gain = 1.0
    for st in config.stages:
        if (st.kind == "BF2I" and config.scale_bf1) or (st.kind == "BF2II" and config.scale_bf2):
            gain *= 0.5
    return compare(ref_frames, fix_frames, gain, corpus_id, config.summary())

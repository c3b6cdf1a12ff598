"""Test-signal corpora and CSV frame I/O."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .fixedpoint import FixedFormat
from .radix22 import Frame

GENERATORS = ("impulse", "sine", "uniform", "zeros")


def make_corpus(kind: str, n_points: int, n_frames: int = 1, seed: int = 0, amplitude: float = 0.5) -> np.ndarray:
    """``(n_frames, n_points)`` complex test signals.

    ``uniform`` draws re and im independently from ``[-amplitude, amplitude)``,
    which keeps every intermediate of the scaled datapath inside the word.
    """
    if n_frames < 1:
        raise ValueError("need at least one frame")
    n = np.arange(n_points)
    if kind == "impulse":
        x = np.zeros((n_frames, n_points), dtype=np.complex128)
        x[:, 0] = amplitude
    elif kind == "zeros":
        x = np.zeros((n_frames, n_points), dtype=np.complex128)
    elif kind == "sine":
        rng = np.random.default_rng(seed)
        bins = rng.integers(0, n_points, size=n_frames)
        x = amplitude * np.cos(2 * np.pi * np.outer(bins, n) / n_points).astype(np.complex128)
    elif kind == "uniform":
        rng = np.random.default_rng(seed)
        x = rng.uniform(-amplitude, amplitude, size=(n_frames, n_points)) + 1j * rng.uniform(
            -amplitude, amplitude, size=(n_frames, n_points)
        )
    else:
        raise ValueError(f"unknown generator {kind!r}; expected one of {GENERATORS}")
    return x


def write_frames_csv(path, frames) -> None:
    """One line per sample, ``index,re,im``; indices run on across frames."""
    lines = ["index,re,im"]
    i = 0
    for fr in frames:
        if fr.is_fixed:
            for re, im in np.asarray(fr.samples):
                lines.append(f"{i},{int(re)},{int(im)}")
                i += 1
        else:
            for z in fr.to_complex():
                lines.append(f"{i},{float(z.real)!r},{float(z.imag)!r}")
                i += 1
    Path(path).write_text("\n".join(lines) + "\n")


def read_frames_csv(path, n_points: int, fmt: FixedFormat | None = None, **tags) -> list[Frame]:
    """Read frames back; values are raw integers when ``fmt`` is given."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("index"):
            continue
        idx, re, im = (f.strip() for f in line.split(","))
        rows.append((int(idx), re, im))
    if not rows or len(rows) % n_points:
        raise ValueError(f"{path}: {len(rows)} samples is not a whole number of {n_points}-point frames")
    rows.sort(key=lambda r: r[0])
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ValueError(f"{path}: sample indices are not contiguous from 0")
    if fmt is not None:
        raw = np.array([(int(r[1]), int(r[2])) for r in rows], dtype=np.int64)
        if raw.min() < fmt.raw_min or raw.max() > fmt.raw_max:
            raise ValueError(f"{path}: raw values outside {fmt}")
        return [Frame(raw[i:i + n_points], fmt=fmt, **tags) for i in range(0, len(raw), n_points)]
    z = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    return [Frame(z[i:i + n_points], **tags) for i in range(0, len(z), n_points)]

"""Cycle-accurate model of the Radix-2^2 single-path delay-feedback pipeline.

One complex sample enters per clock. Each butterfly stage owns a feedback
FIFO of length ``L``; its control bit ``CI`` is low for the first ``L`` slots
of every ``2L`` (fill: input goes into the FIFO, FIFO head goes out) and high
for the next ``L`` (compute: head + input goes out, head - input goes back
into the FIFO). BF2II additionally raises ``C2`` in the ``k1 = 1`` half of each
``4L`` block, which swaps the real/imaginary lanes of the incoming sample and
exchanges the adder/subtractor roles (multiplication by ``-j``). Twiddle
stages feed the sample through the shift-add complex multiplier with the ROM
entry for the current slot.

Every stage has an output register chain (``bf_delay`` / ``mult_delay``
deep). Control counters are free running, derived from the global clock and
the stage's fixed input offset, so frames must be fed back to back starting
on a multiple of ``N``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ._accel import jit
from .complex_mult import cmul3_rounded, gen_twiddle_rom
from .config import BF2I, BF2II, TWIDDLE, FFTConfig
from .fixedpoint import ComplexFixed, round_shift, saturate
from .radix22 import BIT_REVERSED, FREQUENCY, NATURAL, TIME, Frame

_KIND_CODE = {BF2I: 0, BF2II: 1, TWIDDLE: 2}
SIGNALS = ("in", "fb_head", "ctrl", "out")

# per-stage counters
MULTIPLIES, ADDS, SATURATIONS, SWAPS = range(4)


@jit
def _run(inputs, outputs, valid, trace, record, info, fb, fb_ptr, dl, dl_ptr, rom, expo, params, stats, clock):
    n_points = params[0]
    word = params[1]
    frac = params[2]
    mode = params[3]
    scale1 = params[4]
    scale2 = params[5]
    shift = params[6]
    bypass = params[7]
    nb = params[8]
    p = params[9]
    latency = params[10]
    n_stages = info.shape[0]
    for t in range(inputs.shape[0]):
        c = clock[0]
        xr = inputs[t, 0]
        xi = inputs[t, 1]
        for s in range(n_stages):
            kind = info[s, 0]
            L = info[s, 1]
            tw = info[s, 2]
            d = info[s, 3]
            pos = (c - info[s, 4]) % n_points
            hr = 0
            hi = 0
            if kind == 2:
                ctl0 = pos
                ctl1 = expo[tw, pos]
                if bypass != 0 and expo[tw, pos] == 0:
                    yr = xr
                    yi = xi
                else:
                    yr, yi, n_add, n_sat = cmul3_rounded(
                        xr, xi, rom[tw, pos, 0], rom[tw, pos, 1], nb, p, frac - shift, word, mode
                    )
                    stats[s, 0] += 3
                    stats[s, 1] += n_add
                    stats[s, 2] += n_sat
            else:
                k = fb_ptr[s]
                hr = fb[s, k, 0]
                hi = fb[s, k, 1]
                ci = 1 if pos % (2 * L) >= L else 0
                c2 = 1 if kind == 1 and ci == 1 and pos % (4 * L) >= 2 * L else 0
                ctl0 = ci
                ctl1 = c2
                if ci == 0:
                    yr = hr
                    yi = hi
                    nr = xr
                    ni = xi
                else:
                    if c2 == 1:
                        # swap-mux: lanes exchanged, add/sub exchanged on the imaginary lane
                        sr = hr + xi
                        si = hi - xr
                        dr = hr - xi
                        di = hi + xr
                        stats[s, 3] += 1
                    else:
                        sr = hr + xr
                        si = hi + xi
                        dr = hr - xr
                        di = hi - xi
                    stats[s, 1] += 4
                    scale = scale1 if kind == 0 else scale2
                    if scale != 0:
                        sr = round_shift(sr, 1, mode)
                        si = round_shift(si, 1, mode)
                        dr = round_shift(dr, 1, mode)
                        di = round_shift(di, 1, mode)
                    yr, f0 = saturate(sr, word)
                    yi, f1 = saturate(si, word)
                    nr, f2 = saturate(dr, word)
                    ni, f3 = saturate(di, word)
                    stats[s, 2] += int(f0) + int(f1) + int(f2) + int(f3)
                fb[s, k, 0] = nr
                fb[s, k, 1] = ni
                fb_ptr[s] = (k + 1) % L
            if d > 0:
                q = dl_ptr[s]
                outr = dl[s, q, 0]
                outi = dl[s, q, 1]
                dl[s, q, 0] = yr
                dl[s, q, 1] = yi
                dl_ptr[s] = (q + 1) % d
            else:
                outr = yr
                outi = yi
            if record:
                trace[t, s, 0, 0] = xr
                trace[t, s, 0, 1] = xi
                trace[t, s, 1, 0] = hr
                trace[t, s, 1, 1] = hi
                trace[t, s, 2, 0] = ctl0
                trace[t, s, 2, 1] = ctl1
                trace[t, s, 3, 0] = outr
                trace[t, s, 3, 1] = outi
            xr = outr
            xi = outi
        outputs[t, 0] = xr
        outputs[t, 1] = xi
        valid[t] = c >= latency
        clock[0] = c + 1


@dataclass
class Trace:
    """Per-cycle signal capture: ``data[cycle, stage, signal] = (re, im)``."""

    cycle0: int
    labels: list[str]
    data: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("cycle,stage,signal,re_raw,im_raw\n")
        for t in range(self.data.shape[0]):
            cyc = self.cycle0 + t
            for s, label in enumerate(self.labels):
                for g, name in enumerate(SIGNALS):
                    re, im = self.data[t, s, g]
                    buf.write(f"{cyc},{label},{name},{int(re)},{int(im)}\n")
        return buf.getvalue()


class PipelineState:
    """Mutable SDF datapath. Single-threaded; build with :func:`build_pipeline`."""

    def __init__(self, config: FFTConfig, trace: bool = False):
        self.config = config
        self.stages = config.stages
        self.record = trace
        n = config.n_points
        n_st = len(self.stages)
        self.labels = [f"{i}_{st.kind}" for i, st in enumerate(self.stages)]
        info = np.zeros((n_st, 5), dtype=np.int64)
        offset = 0
        for i, st in enumerate(self.stages):
            d = config.mult_delay if st.kind == TWIDDLE else config.bf_delay
            info[i] = (_KIND_CODE[st.kind], st.feedback, st.twiddle_stage, d, offset)
            offset += st.feedback + d
        self.info = info
        self.latency = offset
        self.roms = [
            gen_twiddle_rom(n, st.twiddle_stage, config.fmt, config.twiddle_shift)
            for st in self.stages
            if st.kind == TWIDDLE
        ]
        n_tw = max(len(self.roms), 1)
        self.rom = np.zeros((n_tw, n, 2), dtype=np.int64)
        self.expo = np.zeros((n_tw, n), dtype=np.int64)
        for i, rom in enumerate(self.roms):
            self.rom[i] = rom.stored
            self.expo[i] = [e.exponent for e in rom.entries]
        cfg = config
        self.params = np.array(
            [
                n, cfg.fmt.word_bits, cfg.fmt.frac_bits, cfg.rounding.code,
                int(cfg.scale_bf1), int(cfg.scale_bf2), cfg.twiddle_shift,
                int(cfg.unity_bypass), cfg.slice.b, cfg.slice.p, self.latency,
            ],
            dtype=np.int64,
        )
        max_l = max(1, n // 2)
        max_d = max(1, cfg.mult_delay, cfg.bf_delay)
        self.fb = np.zeros((n_st, max_l, 2), dtype=np.int64)
        self.fb_ptr = np.zeros(n_st, dtype=np.int64)
        self.dl = np.zeros((n_st, max_d, 2), dtype=np.int64)
        self.dl_ptr = np.zeros(n_st, dtype=np.int64)
        self.stats = np.zeros((n_st, 4), dtype=np.int64)
        self.clock = np.zeros(1, dtype=np.int64)
        self._trace_chunks: list[tuple[int, np.ndarray]] = []

    @property
    def cycle(self) -> int:
        return int(self.clock[0])

    def stage_stats(self) -> dict[str, dict[str, int]]:
        names = ("multiplies", "adds", "saturations", "swaps")
        return {lab: dict(zip(names, map(int, row))) for lab, row in zip(self.labels, self.stats)}

    def reset(self):
        for arr in (self.fb, self.fb_ptr, self.dl, self.dl_ptr, self.stats, self.clock):
            arr[...] = 0
        self._trace_chunks.clear()

    def advance(self, samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Clock the raw ``(n, 2)`` samples through; returns ``(outputs, valid)``."""
        samples = np.ascontiguousarray(samples, dtype=np.int64).reshape(-1, 2)
        n = samples.shape[0]
        out = np.zeros((n, 2), dtype=np.int64)
        valid = np.zeros(n, dtype=np.bool_)
        shape = (n if self.record else 0, len(self.stages), len(SIGNALS), 2)
        trace = np.zeros(shape, dtype=np.int64)
        start = self.cycle
        _run(
            samples, out, valid, trace, self.record, self.info, self.fb, self.fb_ptr,
            self.dl, self.dl_ptr, self.rom, self.expo, self.params, self.stats, self.clock,
        )
        if self.record:
            self._trace_chunks.append((start, trace))
        return out, valid

    def tick(self, sample) -> ComplexFixed | None:
        """One clock. Returns the output sample once the pipeline is primed."""
        if isinstance(sample, ComplexFixed):
            if sample.fmt != self.config.fmt:
                raise ValueError(f"sample format {sample.fmt} differs from {self.config.fmt}")
            raw = sample.raw
        else:
            raw = sample
        out, valid = self.advance(np.array([raw], dtype=np.int64))
        if not valid[0]:
            return None
        return ComplexFixed.from_raw(int(out[0, 0]), int(out[0, 1]), self.config.fmt)

    def trace(self) -> Trace | None:
        if not self.record:
            return None
        if not self._trace_chunks:
            empty = np.zeros((0, len(self.stages), len(SIGNALS), 2), dtype=np.int64)
            return Trace(self.cycle, self.labels, empty)
        data = np.concatenate([c for _, c in self._trace_chunks])
        return Trace(self._trace_chunks[0][0], self.labels, data)


def build_pipeline(config: FFTConfig | None = None, trace: bool = False) -> PipelineState:
    return PipelineState(config or FFTConfig(), trace=trace)


@dataclass
class RunResult:
    outputs: list[Frame]
    latency: int
    trace: Trace | None
    valid: np.ndarray
    cycles: int


def run_frames(state: PipelineState, frames) -> RunResult:
    """Stream frames back to back, then flush with zeros until every output is out.

    Each element of ``frames`` is a natural-order time :class:`Frame` (double
    frames are quantised with the pipeline's rounding) or a raw ``(N, 2)``
    array. Returned frames are tagged bit-reversed.
    """
    cfg = state.config
    n = cfg.n_points
    if state.cycle % n:
        raise ValueError("frames must start on a frame boundary of the free-running counter")
    raws = []
    for fr in frames:
        if isinstance(fr, Frame):
            if fr.domain != TIME or fr.ordering != NATURAL:
                raise ValueError("pipeline input must be natural-order time frames")
            if fr.n != n:
                raise ValueError(f"frame length {fr.n} != N={n}")
            if fr.is_fixed:
                if fr.fmt != cfg.fmt:
                    raise ValueError(f"frame format {fr.fmt} differs from {cfg.fmt}")
                raw = np.asarray(fr.samples, dtype=np.int64)
            else:
                from .radix22 import quantize_array

                raw = quantize_array(fr.to_complex(), cfg.fmt, cfg.rounding)
        else:
            raw = np.asarray(fr, dtype=np.int64)
            if raw.shape != (n, 2):
                raise ValueError(f"raw frame shape {raw.shape} != ({n}, 2)")
        raws.append(raw)
    n_in = len(raws) * n
    n_flush = -(-state.latency // n) * n
    stream = np.zeros((n_in + n_flush, 2), dtype=np.int64)
    if raws:
        stream[:n_in] = np.concatenate(raws)
    start = state.cycle
    out, valid = state.advance(stream)
    # outputs of this batch start exactly `latency` cycles after its first input
    first = state.latency
    body = out[first:first + n_in]
    if body.shape[0] != n_in or not valid[first:first + n_in].all():
        raise RuntimeError("pipeline did not deliver one output per input")
    outs = [
        Frame(body[i * n:(i + 1) * n].copy(), FREQUENCY, BIT_REVERSED, cfg.fmt)
        for i in range(len(raws))
    ]
    return RunResult(outs, state.latency, state.trace(), valid, state.cycle - start)

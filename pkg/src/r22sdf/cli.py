"""Command line: run, verify, sweep, twiddle-dump.

Exit codes: 0 success, 1 verification counterexample, 2 usage/config error,
3 I/O error.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .complex_mult import cmul3_batch, cmul3_exhaustive, gen_twiddle_rom
from .config import FFTConfig, auto_slice
from .digit_slicing import SliceConfig, multiply_batch
from .fixedpoint import FixedFormat, Rounding
from .metrics import corpus_report
from .radix22 import (
    Frame,
    bit_reverse_indices,
    dft_reference,
    fft_r22_double,
    fft_r22_fixed,
    quantize_array,
)
from .sdf_pipeline import build_pipeline, run_frames
from .signals import GENERATORS, make_corpus, read_frames_csv, write_frames_csv

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

DEFAULTS = {
    "n": 8,
    "word_bits": 16,
    "frac_bits": None,
    "slice_b": None,
    "slice_p": None,
    "rounding": "half-away",
    "scale_bf1": True,
    "scale_bf2": True,
    "shift": 6,
    "unity_bypass": True,
    "mult_delay": 1,
    "bf_delay": 1,
    "seed": 0,
    "frames": 1,
    "input": "uniform",
    "amplitude": 0.5,
}
_BOOL_KEYS = {"scale_bf1", "scale_bf2", "unity_bypass"}


class ConfigError(Exception):
    pass


def read_config_file(path) -> dict:
    """``key = value`` lines, ``#`` comments."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _coerce(key, value):
    if key in _BOOL_KEYS:
        low = value.lower()
        if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
            raise ConfigError(f"{key}: expected a boolean, got {value!r}")
        return low in ("1", "true", "yes", "on")
    if key in ("rounding", "input"):
        return value
    if key == "amplitude":
        return float(value)
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def resolve(args, **defaults) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    opts = dict(DEFAULTS, **defaults)
    if getattr(args, "config", None):
        opts.update(read_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


def build_config(opts) -> FFTConfig:
    try:
        w = opts["word_bits"]
        f = opts["frac_bits"] if opts["frac_bits"] is not None else w - 1
        fmt = FixedFormat(w, f)
        if opts["slice_b"] is None and opts["slice_p"] is None:
            sl = auto_slice(w)
        elif opts["slice_b"] is None or opts["slice_p"] is None:
            raise ConfigError("give both --slice-b and --slice-p")
        else:
            sl = SliceConfig(opts["slice_b"], opts["slice_p"])
        return FFTConfig(
            n_points=opts["n"],
            fmt=fmt,
            slice=sl,
            rounding=Rounding(opts["rounding"]),
            scale_bf1=opts["scale_bf1"],
            scale_bf2=opts["scale_bf2"],
            twiddle_shift=opts["shift"],
            unity_bypass=opts["unity_bypass"],
            mult_delay=opts["mult_delay"],
            bf_delay=opts["bf_delay"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _corpus(opts, cfg: FFTConfig, input_file=None) -> tuple[np.ndarray, str]:
    if input_file:
        try:
            frames = read_frames_csv(input_file, cfg.n_points)
        except ValueError as exc:
            raise OSError(str(exc)) from exc
        return np.stack([fr.to_complex() for fr in frames]), str(input_file)
    kind = opts["input"]
    if kind not in GENERATORS:
        raise ConfigError(f"unknown input {kind!r}")
    x = make_corpus(kind, cfg.n_points, opts["frames"], opts["seed"], opts["amplitude"])
    return x, f"{kind}:seed={opts['seed']}:frames={opts['frames']}"


# -- run --------------------------------------------------------------------

def cmd_run(args) -> int:
    opts = resolve(args)
    cfg = build_config(opts)
    x, corpus_id = _corpus(opts, cfg, args.input_file)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    state = build_pipeline(cfg, trace=args.trace)
    raw = quantize_array(x, cfg.fmt, cfg.rounding)
    run = run_frames(state, [Frame(r, fmt=cfg.fmt) for r in raw])
    write_frames_csv(out_dir / "output_frames.csv", run.outputs)
    if args.trace:
        (out_dir / "trace.csv").write_text(run.trace.to_csv())
    report = corpus_report(cfg, x, "functional", corpus_id)
    fixed_again = np.stack([f.samples for f in run.outputs])
    func = fft_r22_fixed(raw[..., 0], raw[..., 1], cfg)
    if not (np.array_equal(fixed_again[..., 0], func.re) and np.array_equal(fixed_again[..., 1], func.im)):
        print("pipeline output differs from the functional model", file=sys.stderr)
        return EXIT_MISMATCH
    (out_dir / "report.txt").write_text(report.to_text() + f"latency     {run.latency}\n")
    (out_dir / "report.csv").write_text(report.to_csv() + f"latency,{run.latency}\n")
    print(report.to_text(), end="")
    print(f"latency      {run.latency}")
    return EXIT_OK


# -- verify -----------------------------------------------------------------

class Counterexample(Exception):
    pass


def _check_equal(name, got, want, operands):
    bad = np.flatnonzero(np.asarray(got) != np.asarray(want))
    if bad.size:
        i = bad[0]
        ops = ", ".join(f"{k}={int(v[i])}" for k, v in operands.items())
        raise Counterexample(f"{name}: {ops}: expected {int(np.asarray(want)[i])}, got {int(np.asarray(got)[i])}")
    return int(np.asarray(got).size)


def verify_multiplier_exhaustive(bits=8, p=4, fault=-1) -> int:
    cfg = SliceConfig(bits // p, p)
    vals = np.arange(-(1 << (bits - 1)), 1 << (bits - 1), dtype=np.int64)
    a, b = (m.ravel() for m in np.meshgrid(vals, vals, indexing="ij"))
    got, _ = multiply_batch(a, b, cfg, fault)
    return _check_equal(f"shift_add_multiply {bits}-bit", got, a * b, {"a": a, "b": b})


def verify_multiplier_random(n, rng, fault=-1) -> int:
    cfg = SliceConfig(4, 4)
    a = rng.integers(-(1 << 15), 1 << 15, size=n)
    b = rng.integers(-(1 << 15), 1 << 15, size=n)
    got, _ = multiply_batch(a, b, cfg, fault)
    return _check_equal("shift_add_multiply 16-bit", got, a * b, {"a": a, "b": b})


def verify_cmul3_random(n, rng, fault=-1) -> int:
    cfg = SliceConfig(4, 4)
    ar, ai = (rng.integers(-(1 << 15), 1 << 15, size=n) for _ in range(2))
    wr, wi = (rng.integers(-(1 << 15), 1 << 15, size=n) for _ in range(2))
    re, im = cmul3_batch(ar, ai, wr, wi, cfg, fault)
    ops = {"ar": ar, "ai": ai, "wr": wr, "wi": wi}
    _check_equal("cmul3 real", re, ar * wr - ai * wi, ops)
    return _check_equal("cmul3 imag", im, ar * wi + ai * wr, ops)


def verify_cmul3_exhaustive(bits=8, p=4) -> int:
    n, n_bad, first = cmul3_exhaustive(bits, p)
    if n_bad:
        ar, ai, wr, wi = (int(v) for v in first)
        raise Counterexample(
            f"cmul3 {bits}-bit: ar={ar}, ai={ai}, wr={wr}, wi={wi}: "
            f"expected ({ar * wr - ai * wi}, {ar * wi + ai * wr})"
        )
    return int(n)


def verify_fft_double(n_frames, rng, sizes=(8, 16, 32, 64)) -> int:
    count = 0
    for n in sizes:
        x = rng.normal(size=(n_frames, n)) + 1j * rng.normal(size=(n_frames, n))
        got = fft_r22_double(x)[:, bit_reverse_indices(n)]
        ref = dft_reference(x)
        rel = np.abs(got - ref).max() / np.abs(ref).max()
        if rel >= 1e-9:
            raise Counterexample(f"radix-2^2 N={n}: relative error {rel:.3e} >= 1e-9")
        count += n_frames
    return count


def verify_pipeline(n_frames, rng, cfg: FFTConfig) -> int:
    raw = rng.integers(-(1 << (cfg.fmt.word_bits - 2)), 1 << (cfg.fmt.word_bits - 2),
                       size=(n_frames, cfg.n_points, 2))
    run = run_frames(build_pipeline(cfg), list(raw))
    got = np.stack([f.samples for f in run.outputs])
    ref = fft_r22_fixed(raw[..., 0], raw[..., 1], cfg)
    ops = {"frame": np.repeat(np.arange(n_frames), cfg.n_points)}
    _check_equal(f"pipeline N={cfg.n_points} real", got[..., 0].ravel(), ref.re.ravel(), ops)
    _check_equal(f"pipeline N={cfg.n_points} imag", got[..., 1].ravel(), ref.im.ravel(), ops)
    return n_frames


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    fault = args.inject_fault
    quick = args.level == "quick"
    checks = [
        ("multiplier 8-bit exhaustive", lambda: verify_multiplier_exhaustive(8, 4, fault)),
        ("multiplier 16-bit random", lambda: verify_multiplier_random(100_000 if quick else 1_000_000, rng, fault)),
        ("cmul3 16-bit random", lambda: verify_cmul3_random(100_000 if quick else 1_000_000, rng, fault)),
    ]
    if not quick:
        checks.append(("cmul3 8-bit exhaustive", lambda: verify_cmul3_exhaustive(8, 4)))
    checks += [
        ("radix-2^2 vs DFT frames", lambda: verify_fft_double(100 if quick else 1000, rng)),
        ("pipeline vs functional N=8", lambda: verify_pipeline(1000 if quick else 10_000, rng, FFTConfig())),
        ("pipeline vs functional N=16", lambda: verify_pipeline(100 if quick else 1000, rng, FFTConfig(n_points=16))),
        ("pipeline vs functional N=32", lambda: verify_pipeline(100 if quick else 1000, rng, FFTConfig(n_points=32))),
    ]
    total = 0
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            n = fn()
        except Counterexample as exc:
            print(f"FAIL {name}: {exc}")
            return EXIT_MISMATCH
        total += n
        print(f"ok   {name}: {n} cases ({time.perf_counter() - t0:.2f} s)")
    print(f"all checks passed: {total} cases")
    return EXIT_OK


# -- sweep ------------------------------------------------------------------

def _parse_range(axis, text):
    text = text.strip()
    if not text:
        raise ConfigError("empty range")
    if axis == "word_bits":
        if ".." in text:
            lo, hi = (int(s) for s in text.split(".."))
            vals = list(range(lo, hi + 1))
        else:
            vals = [int(s) for s in text.split(",") if s.strip()]
    elif axis == "slice":
        vals = []
        for item in text.split(","):
            b, p = item.lower().split("x")
            vals.append((int(b), int(p)))
    else:
        vals = [Rounding(s.strip()).value for s in text.split(",") if s.strip()]
    if not vals:
        raise ConfigError(f"range {text!r} selects no configurations")
    return vals


def cmd_sweep(args) -> int:
    opts = resolve(args, frames=1000)
    base = build_config(opts)
    try:
        values = _parse_range(args.axis, args.range)
    except ValueError as exc:
        raise ConfigError(f"bad range {args.range!r}: {exc}") from exc
    configs = []
    try:
        for v in values:
            if args.axis == "word_bits":
                cfg = base.with_(fmt=FixedFormat(v, v - 1), slice=auto_slice(v))
                label = str(v)
            elif args.axis == "slice":
                cfg = base.with_(slice=SliceConfig(*v))
                label = f"{v[0]}x{v[1]}"
            else:
                cfg = base.with_(rounding=Rounding(v))
                label = v
            configs.append((label, cfg))
    except ValueError as exc:
        raise ConfigError(f"bad range {args.range!r}: {exc}") from exc
    x, corpus_id = _corpus(opts, base)
    rows = ["axis,value,config,sqnr_db,max_abs_err"]
    for label, cfg in configs:
        rep = corpus_report(cfg, x, "functional", corpus_id)
        rows.append(f'{args.axis},{label},"{cfg.summary()}",{rep.sqnr_db:.6f},{rep.max_abs_err:.6e}')
    text = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / f"sweep_{args.axis}.csv").write_text(text)
    print(text, end="")
    return EXIT_OK


# -- twiddle-dump -----------------------------------------------------------

def twiddle_dump_text(rom) -> str:
    lines = ["k,exponent,stored_re,stored_im,exact_re,exact_im,fits"]
    for e in rom.entries:
        lines.append(
            f"{e.slot},{e.exponent},{e.stored_re},{e.stored_im},{e.exact_re},{e.exact_im},{int(rom.fits(e))}"
        )
    return "\n".join(lines) + "\n"


def cmd_twiddle_dump(args) -> int:
    opts = resolve(args)
    w = opts["word_bits"]
    f = opts["frac_bits"] if opts["frac_bits"] is not None else w - 1
    try:
        rom = gen_twiddle_rom(opts["n"], args.stage, FixedFormat(w, f), opts["shift"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    text = twiddle_dump_text(rom)
    if args.output:
        path = Path(args.output)
    else:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        path = Path(args.out) / f"twiddle_N{opts['n']}_stage{args.stage}_shift{opts['shift']}.csv"
    path.write_text(text)
    print(f"wrote {len(rom.entries)} entries to {path}; stored width {rom.stored_bits} bits; "
          f"all fit: {rom.all_fit()}")
    return EXIT_OK if rom.all_fit() else EXIT_MISMATCH


# -- parser -----------------------------------------------------------------

def _add_datapath_flags(p):
    g = p.add_argument_group("datapath")
    g.add_argument("--config", help="key = value config file (flags override it)")
    g.add_argument("--n", type=int, help="FFT length (default 8)")
    g.add_argument("--word-bits", dest="word_bits", type=int)
    g.add_argument("--frac-bits", dest="frac_bits", type=int)
    g.add_argument("--slice-b", dest="slice_b", type=int)
    g.add_argument("--slice-p", dest="slice_p", type=int)
    g.add_argument("--rounding", choices=[r.value for r in Rounding])
    g.add_argument("--no-scale-bf1", dest="scale_bf1", action="store_const", const=False)
    g.add_argument("--no-scale-bf2", dest="scale_bf2", action="store_const", const=False)
    g.add_argument("--shift", type=int, help="twiddle ROM right shift (default 6)")
    g.add_argument("--no-unity-bypass", dest="unity_bypass", action="store_const", const=False)
    g.add_argument("--mult-delay", dest="mult_delay", type=int)
    g.add_argument("--bf-delay", dest="bf_delay", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--frames", type=int)
    g.add_argument("--input", choices=GENERATORS)
    g.add_argument("--amplitude", type=float)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="r22sdf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="stream frames through the SDF pipeline")
    _add_datapath_flags(p)
    p.add_argument("--input-file", help="CSV frames (index,re,im) instead of a generator")
    p.add_argument("--trace", action="store_true", help="write trace.csv")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="check every arithmetic equivalence")
    p.add_argument("--level", choices=("quick", "exhaustive"), default="quick")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-fault", dest="inject_fault", type=int, default=-1,
                   help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="SQNR over a configuration axis")
    _add_datapath_flags(p)
    p.add_argument("--axis", choices=("word_bits", "slice", "rounding"), required=True)
    p.add_argument("--range", required=True, help="e.g. 10..16, 4x4,2x8 or truncate,half-away")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("twiddle-dump", help="write a twiddle ROM as CSV")
    _add_datapath_flags(p)
    p.add_argument("--stage", type=int, default=0)
    p.add_argument("--output", help="file path (default OUT/twiddle_*.csv)")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_twiddle_dump)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

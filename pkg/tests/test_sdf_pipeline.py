import numpy as np
import pytest

from r22sdf.config import BF2I, BF2II, TWIDDLE, FFTConfig
from r22sdf.fixedpoint import ComplexFixed, FixedFormat, Q15, Rounding
from r22sdf.radix22 import BIT_REVERSED, Frame, fft_r22_fixed
from r22sdf.sdf_pipeline import SIGNALS, build_pipeline, run_frames


def kinds(cfg):
    return [(s.kind, s.feedback) for s in cfg.stages]


def test_stage_chains():
    assert kinds(FFTConfig(n_points=8)) == [(BF2I, 4), (BF2II, 2), (TWIDDLE, 0), (BF2I, 1)]
    assert kinds(FFTConfig(n_points=16)) == [(BF2I, 8), (BF2II, 4), (TWIDDLE, 0), (BF2I, 2), (BF2II, 1)]
    st64 = FFTConfig(n_points=64).stages
    assert sum(s.kind != TWIDDLE for s in st64) == 6
    assert sum(s.kind == TWIDDLE for s in st64) == 2
    fbs = [s.feedback for s in st64 if s.kind != TWIDDLE]
    assert fbs == [32, 16, 8, 4, 2, 1]


def test_build_rejects_bad_config():
    with pytest.raises(ValueError):
        FFTConfig(n_points=12)
    with pytest.raises(ValueError):
        FFTConfig(fmt=FixedFormat(12, 11))  # 4x4 slicing does not cover 12 bits


def random_raw(rng, frames, n, amp=1 << 14):
    return rng.integers(-amp, amp, size=(frames, n, 2))


def check_equivalent(cfg, raw):
    run = run_frames(build_pipeline(cfg), list(raw))
    got = np.stack([f.samples for f in run.outputs])
    ref = fft_r22_fixed(raw[..., 0], raw[..., 1], cfg)
    assert np.array_equal(got[..., 0], ref.re)
    assert np.array_equal(got[..., 1], ref.im)
    return run


@pytest.mark.parametrize("n", [8, 16, 32, 64, 128])
def test_pipeline_matches_functional(rng, n):
    check_equivalent(FFTConfig(n_points=n), random_raw(rng, 50, n))


@pytest.mark.parametrize("mult_delay, bf_delay", [(0, 0), (1, 0), (2, 1), (3, 2)])
def test_register_depth_only_moves_latency(rng, mult_delay, bf_delay):
    cfg = FFTConfig(n_points=16, mult_delay=mult_delay, bf_delay=bf_delay)
    run = check_equivalent(cfg, random_raw(rng, 20, 16))
    n_bf = sum(s.kind != TWIDDLE for s in cfg.stages)
    n_tw = sum(s.kind == TWIDDLE for s in cfg.stages)
    assert run.latency == 15 + n_bf * bf_delay + n_tw * mult_delay


@pytest.mark.parametrize(
    "overrides",
    [
        dict(scale_bf1=False),
        dict(scale_bf1=False, scale_bf2=False),
        dict(rounding=Rounding.TRUNCATE),
        dict(unity_bypass=False),
        dict(twiddle_shift=0),
    ],
)
def test_equivalence_across_modes(rng, overrides):
    cfg = FFTConfig(n_points=16, **overrides)
    check_equivalent(cfg, random_raw(rng, 30, 16, amp=1 << 15))


def test_equivalence_other_word_length(rng):
    from r22sdf.digit_slicing import SliceConfig

    cfg = FFTConfig(n_points=32, fmt=FixedFormat(12, 11), slice=SliceConfig(3, 4))
    check_equivalent(cfg, random_raw(rng, 30, 32, amp=1 << 10))


def test_zero_frames():
    run = run_frames(build_pipeline(), [np.zeros((8, 2), dtype=np.int64)] * 3)
    assert all(np.all(f.samples == 0) for f in run.outputs)


def test_impulse_frame():
    x = np.zeros((8, 2), dtype=np.int64)
    x[0, 0] = 16384
    run = run_frames(build_pipeline(), [x])
    out = run.outputs[0]
    assert out.ordering == BIT_REVERSED
    assert np.all(out.samples[:, 0] == 2048) and np.all(out.samples[:, 1] == 0)


def test_tick_one_in_one_out(rng):
    cfg = FFTConfig()
    st = build_pipeline(cfg)
    lam = st.latency
    assert lam == 7 + 4
    raw = random_raw(rng, 3, 8).reshape(-1, 2)
    outs = []
    for c in range(len(raw) + lam):
        sample = ComplexFixed.from_raw(*raw[c]) if c < len(raw) else (0, 0)
        y = st.tick(sample)
        assert (y is None) == (c < lam)
        if y is not None:
            outs.append(y.raw)
    assert st.cycle == len(raw) + lam
    ref = fft_r22_fixed(raw[:, 0].reshape(3, 8), raw[:, 1].reshape(3, 8), cfg)
    got = np.array(outs).reshape(3, 8, 2)
    assert np.array_equal(got[..., 0], ref.re) and np.array_equal(got[..., 1], ref.im)


def test_tick_rejects_other_format():
    st = build_pipeline()
    with pytest.raises(ValueError):
        st.tick(ComplexFixed.from_raw(0, 0, FixedFormat(12, 11)))


def test_run_frames_validation(rng):
    st = build_pipeline()
    with pytest.raises(ValueError):
        run_frames(st, [np.zeros((16, 2))])
    st.tick((0, 0))
    with pytest.raises(ValueError):
        run_frames(st, [np.zeros((8, 2))])


def test_double_frames_are_quantised():
    x = np.zeros(8, dtype=complex)
    x[0] = 0.5
    run = run_frames(build_pipeline(), [Frame(x)])
    assert np.all(run.outputs[0].samples[:, 0] == 2048)


def test_consecutive_batches_continue_cleanly(rng):
    cfg = FFTConfig()
    st = build_pipeline(cfg)
    a, b = random_raw(rng, 5, 8), random_raw(rng, 5, 8)
    ra = run_frames(st, list(a))
    rb = run_frames(st, list(b))
    for raw, run in ((a, ra), (b, rb)):
        ref = fft_r22_fixed(raw[..., 0], raw[..., 1], cfg)
        got = np.stack([f.samples for f in run.outputs])
        assert np.array_equal(got[..., 0], ref.re)


def test_trace_format_and_determinism(rng):
    raw = random_raw(rng, 4, 8)
    texts = []
    for _ in range(2):
        st = build_pipeline(trace=True)
        texts.append(run_frames(st, list(raw)).trace.to_csv())
    assert texts[0] == texts[1]
    lines = texts[0].splitlines()
    assert lines[0] == "cycle,stage,signal,re_raw,im_raw"
    n_stages = 4
    cycles = 4 * 8 + 16  # frames plus flush
    assert len(lines) - 1 == cycles * n_stages * len(SIGNALS)
    assert lines[1].startswith("0,0_BF2I,in,")


def test_feedback_holds_l_values_and_ci_schedule(rng):
    cfg = FFTConfig(n_points=16)
    st = build_pipeline(cfg, trace=True)
    raw = random_raw(rng, 6, 16)
    tr = run_frames(st, list(raw)).trace
    data = tr.data
    for s, stage in enumerate(cfg.stages):
        if stage.kind == TWIDDLE:
            continue
        L = stage.feedback
        off = int(st.info[s, 4])
        ci = data[:, s, 2, 0]
        for c in range(off, data.shape[0]):
            assert ci[c] == (1 if (c - off) % (2 * L) >= L else 0)
        # while CI is high the FIFO head is the input from exactly L clocks before
        for c in range(off + L, data.shape[0]):
            if ci[c] == 1:
                assert tuple(data[c, s, 1]) == tuple(data[c - L, s, 0])
        if stage.kind == BF2II:
            c2 = data[:, s, 2, 1]
            assert c2.sum() > 0
            assert np.all(ci[c2 == 1] == 1)


def test_minus_j_and_butterflies_use_no_multiplier(rng):
    cfg = FFTConfig(n_points=16)
    st = build_pipeline(cfg)
    run_frames(st, list(random_raw(rng, 10, 16)))
    stats = st.stage_stats()
    for label, s in stats.items():
        if TWIDDLE in label:
            assert s["multiplies"] > 0 and s["multiplies"] % 3 == 0
        else:
            assert s["multiplies"] == 0
        if BF2II in label:
            assert s["swaps"] > 0


def test_multiplier_calls_per_slot(rng):
    cfg = FFTConfig(n_points=8)
    st = build_pipeline(cfg)
    frames = 10
    run_frames(st, list(random_raw(rng, frames, 8)))
    exps = [e.exponent for e in st.roms[0].entries]
    non_trivial = sum(e != 0 for e in exps)
    cycles = st.cycle
    # every clock (frames and flush) presents one sample to the multiplier
    per_cycle = sum(exps[(c - int(st.info[2, 4])) % 8] != 0 for c in range(cycles))
    assert st.stats[2, 0] == 3 * per_cycle
    assert non_trivial == 3


def test_reset(rng):
    st = build_pipeline()
    run_frames(st, list(random_raw(rng, 2, 8)))
    st.reset()
    assert st.cycle == 0 and not st.stats.any() and not st.fb.any()

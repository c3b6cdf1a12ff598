import csv
import io
import math

import numpy as np
import pytest

from r22sdf.cli import EXIT_CONFIG, EXIT_IO, EXIT_MISMATCH, EXIT_OK, main
from r22sdf.complex_mult import quantize_twiddle


def read_report(path):
    return dict(line.split(",", 1) for line in path.read_text().splitlines()[1:])


def test_run_impulse(tmp_path, capsys):
    assert main(["run", "--n", "8", "--input", "impulse", "--out", str(tmp_path)]) == EXIT_OK
    rows = (tmp_path / "output_frames.csv").read_text().splitlines()
    assert rows[0] == "index,re,im"
    assert rows[1:] == [f"{i},2048,0" for i in range(8)]
    rep = read_report(tmp_path / "report.csv")
    assert rep["latency"] == "11"
    assert "sqnr_db" in capsys.readouterr().out


def test_run_is_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert main(["run", "--n", "8", "--frames", "100", "--seed", "7", "--trace", "--out", str(d)]) == 0
        outs.append({f: (d / f).read_bytes() for f in ("output_frames.csv", "trace.csv", "report.csv")})
    assert outs[0] == outs[1]


def test_narrow_word_loses_accuracy(tmp_path):
    base = tmp_path / "w16"
    narrow = tmp_path / "w12"
    assert main(["run", "--frames", "200", "--out", str(base)]) == 0
    assert main(["run", "--frames", "200", "--word-bits", "12", "--slice-b", "3", "--slice-p", "4",
                 "--out", str(narrow)]) == 0
    assert float(read_report(narrow / "report.csv")["sqnr_db"]) < float(read_report(base / "report.csv")["sqnr_db"])


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# 16-point build\nn = 16\nframes = 3\nrounding = truncate\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    rep = read_report(tmp_path / "a" / "report.csv")
    assert "N=16" in rep["config"] and "truncate" in rep["config"] and rep["frames"] == "3"
    assert main(["run", "--config", str(cfg), "--n", "8", "--out", str(tmp_path / "b")]) == 0
    rep = read_report(tmp_path / "b" / "report.csv")
    assert "N=8" in rep["config"] and "truncate" in rep["config"]


@pytest.mark.parametrize(
    "text", ["n = twelve\n", "bogus = 1\n", "just words\n", "scale_bf1 = maybe\n", "n = 12\n"]
)
def test_bad_config_file(tmp_path, text):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(text)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


@pytest.mark.parametrize(
    "flags",
    [["--n", "12"], ["--word-bits", "12"], ["--slice-b", "3"], ["--shift", "15"], ["--mult-delay", "-1"]],
)
def test_bad_flags_exit_2(tmp_path, flags):
    # 12-bit words without an explicit slice auto-slice to 3x4, so add a bad one
    if flags == ["--word-bits", "12"]:
        flags = flags + ["--slice-b", "4", "--slice-p", "4"]
    assert main(["run", *flags, "--out", str(tmp_path)]) == EXIT_CONFIG


def test_io_errors(tmp_path):
    assert main(["run", "--input-file", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == EXIT_IO
    assert main(["run", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path)]) == EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--out", str(blocker / "sub")]) == EXIT_IO


def test_run_from_input_file(tmp_path):
    src = tmp_path / "in.csv"
    src.write_text("index,re,im\n" + "".join(f"{i},{0.5 if i == 0 else 0.0},0.0\n" for i in range(8)))
    assert main(["run", "--input-file", str(src), "--out", str(tmp_path / "o")]) == 0
    rows = (tmp_path / "o" / "output_frames.csv").read_text().splitlines()[1:]
    assert all(r.endswith(",2048,0") for r in rows)


def test_verify_quick(capsys):
    assert main(["verify", "--level", "quick"]) == EXIT_OK
    out = capsys.readouterr().out
    total = int(out.strip().splitlines()[-1].split(":")[1].split()[0])
    assert total >= 100_000
    assert "multiplier 8-bit exhaustive: 65536 cases" in out


def test_verify_catches_injected_fault(capsys):
    assert main(["verify", "--inject-fault", "3"]) == EXIT_MISMATCH
    out = capsys.readouterr().out
    assert out.startswith("FAIL")
    assert "a=" in out and "expected" in out and "got" in out


def test_sweep_word_bits(tmp_path, capsys):
    assert main(["sweep", "--axis", "word_bits", "--range", "10..16", "--frames", "200",
                 "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "sweep_word_bits.csv").read_text())))
    assert [r["value"] for r in rows] == [str(w) for w in range(10, 17)]
    s = [float(r["sqnr_db"]) for r in rows]
    assert all(b >= a - 0.1 for a, b in zip(s, s[1:]))


def test_sweep_rounding(capsys):
    assert main(["sweep", "--axis", "rounding", "--range", "truncate,half-away", "--frames", "300"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 2
    trunc, half = (float(r["sqnr_db"]) for r in rows)
    assert trunc <= half + 0.5


def test_sweep_slice(capsys):
    assert main(["sweep", "--axis", "slice", "--range", "4x4,2x8,8x2", "--frames", "50"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    # slicing changes how the product is formed, never its value
    assert len({r["sqnr_db"] for r in rows}) == 1


@pytest.mark.parametrize(
    "axis, rng", [("word_bits", ""), ("word_bits", "16..10"), ("slice", "4y4"), ("slice", "3x4"),
                  ("rounding", "stochastic"), ("word_bits", "1..2")]
)
def test_sweep_bad_range(axis, rng):
    assert main(["sweep", "--axis", axis, "--range", rng, "--frames", "5"]) == EXIT_CONFIG


def test_sweep_deterministic(capsys):
    args = ["sweep", "--axis", "word_bits", "--range", "12,16", "--frames", "100"]
    main(args)
    a = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == a


def parse_dump(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_twiddle_dump_fits_10_bits(tmp_path):
    out = tmp_path / "tw.csv"
    assert main(["twiddle-dump", "--n", "8", "--shift", "6", "--output", str(out)]) == 0
    rows = parse_dump(out)
    assert len(rows) == 8
    for r in rows:
        assert r["fits"] == "1"
        for k in ("stored_re", "stored_im"):
            assert -512 <= int(r[k]) <= 511


def test_twiddle_dump_shift_0_is_full_quantisation(tmp_path):
    out = tmp_path / "tw.csv"
    assert main(["twiddle-dump", "--n", "8", "--shift", "0", "--output", str(out)]) == 0
    for r in parse_dump(out):
        want = quantize_twiddle(int(r["exponent"]), 8)
        assert (int(r["stored_re"]), int(r["stored_im"])) == want
        assert (int(r["exact_re"]), int(r["exact_im"])) == want


def test_twiddle_dump_n16_within_one_shifted_lsb(tmp_path):
    assert main(["twiddle-dump", "--n", "16", "--stage", "0", "--out", str(tmp_path)]) == 0
    rows = parse_dump(tmp_path / "twiddle_N16_stage0_shift6.csv")
    assert [int(r["exponent"]) for r in rows] == [0, 0, 0, 0, 0, 2, 4, 6, 0, 1, 2, 3, 0, 3, 6, 9]
    lsb = 2.0 ** -9
    for r in rows:
        w = complex(math.cos(2 * math.pi * int(r["exponent"]) / 16), -math.sin(2 * math.pi * int(r["exponent"]) / 16))
        got = complex(int(r["stored_re"]), int(r["stored_im"])) * lsb
        assert abs(got.real - w.real) <= lsb and abs(got.imag - w.imag) <= lsb


def test_twiddle_dump_bad_stage(tmp_path):
    assert main(["twiddle-dump", "--n", "8", "--stage", "1", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["twiddle-dump", "--n", "64", "--stage", "1", "--out", str(tmp_path)]) == EXIT_OK


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2

import numpy as np
import pytest

from lssounder import formats
from lssounder.cli import main
from lssounder.lscode import default_code_set
from lssounder.txchain import format_mem_lines, parse_mem_lines, quantize_q15, transmit

SMALL = ["--k", "5", "--gap", "32"]


def run(*argv):
    return main([str(a) for a in argv])


def tree_bytes(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture
def codes_dir(tmp_path):
    out = tmp_path / "codes"
    assert run("gen", *SMALL, "-o", out) == 0
    return out


def test_gen_writes_codes_and_manifest(codes_dir):
    manifest = formats.read_manifest(codes_dir / "manifest.json")
    assert manifest["code_files"] == ["L0N0b.code", "L0N0m.code"]
    assert manifest["gap"] == 32 and manifest["part_length"] == 32
    assert manifest["predicted_ifw"] == {"L0N0b-L0N0m": 32}
    codes = formats.read_codes(codes_dir)
    for a, b in zip(codes, default_code_set(5, 32)):
        np.testing.assert_array_equal(a.chips, b.chips)
        assert a.id == b.id


def test_gen_deeper_layer(tmp_path):
    assert run("gen", "--k", 2, "--depth", 2, "--layer", 2, "--gap", 16, "-o", tmp_path / "c") == 0
    assert len(formats.read_codes(tmp_path / "c")) == 8


def test_code_file_errors():
    with pytest.raises(ValueError):
        formats.parse_code("# id: L0N0b\n# part_length: 1\n# gap: 1\n# trailing_gap: 0\n1\n1\n1\n")
    with pytest.raises(ValueError):
        formats.parse_code("1\n-1\n")


def test_corr_csv_zero_run(codes_dir, tmp_path):
    out = tmp_path / "corr.csv"
    assert run("corr", "--codes", codes_dir, "--lags", 64, "-o", out) == 0
    header, rows = formats.parse_csv(out.read_text())
    assert header == ["code_i", "code_j", "lag", "value"]
    cross = {int(r[2]): int(r[3]) for r in rows if r[0] != r[1]}
    assert all(cross[t] == 0 for t in range(-32, 33))
    auto = {int(r[2]): int(r[3]) for r in rows if r[0] == r[1] == "L0N0b"}
    assert auto[0] == 64


def test_report(codes_dir, tmp_path):
    out = tmp_path / "report.txt"
    assert run("report", "--codes", codes_dir, "-o", out) == 0
    values = formats.parse_keyvalue("\n".join(l for l in out.read_text().splitlines() if "=" in l
                                              and " " not in l.split("=")[0].strip()))
    assert int(values["min_ifw"]) == 32
    assert float(values["min_ifw_us"]) == pytest.approx(32 / 7.68)


def test_wave_raw_round_trip(codes_dir, tmp_path):
    out = tmp_path / "wave"
    assert run("wave", "--codes", codes_dir, "-o", out) == 0
    words, meta = formats.read_raw(out / "tx0.i16")
    assert float(meta["sample_rate"]) == pytest.approx(30.72e6)
    assert meta["stage"] == "if" and int(meta["saturated"]) == 0
    code = formats.read_codes(codes_dir)[0]
    _, if_wave, _ = transmit(code.chips)
    expect = quantize_q15(if_wave, float(meta["scale"])).words
    np.testing.assert_array_equal(words, expect)


def test_mem_round_trip(codes_dir, tmp_path):
    out = tmp_path / "mem"
    assert run("mem", "--codes", codes_dir, "-o", out) == 0
    code = formats.read_codes(codes_dir)[0]
    words = parse_mem_lines((out / "L0N0b.mem").read_text().splitlines())
    np.testing.assert_array_equal(words, np.clip(code.chips * 32768, -32768, 32767))
    assert (out / "L0N0b.mem").read_text() == "\n".join(format_mem_lines(words)) + "\n"
    assert run("mem", "--codes", codes_dir, "--source", "if", "-o", tmp_path / "m2") == 0
    _, _, q = transmit(code.chips)
    np.testing.assert_array_equal(parse_mem_lines((tmp_path / "m2" / "L0N0b.mem").read_text().splitlines()),
                                  q.words)


def test_spectrum_files(codes_dir, tmp_path):
    assert run("wave", "--codes", codes_dir, "-o", tmp_path / "w") == 0
    out = tmp_path / "spec.csv"
    assert run("spectrum", "--input", tmp_path / "w" / "tx0.i16", "--bw", 80e6, "-o", out) == 0
    header, rows = formats.parse_csv((tmp_path / "spec.peaks.csv").read_text())
    assert header == ["frequency_hz", "level_db"]
    assert len(rows) == 5
    header, rows = formats.parse_csv(out.read_text())
    freqs = np.array([float(r[0]) for r in rows])
    assert freqs[0] == 0 and freqs[-1] <= 80e6


def _sim_config(tmp_path, snr="none"):
    (tmp_path / "ch.chan").write_text("0 0 4 1.0\n1 1 8 -0.5\n0 1 40 0.3\n1 0 120 0.2\n")
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(f"k = 6\ngap = 64\nchannel = ch.chan\nsnr_db = {snr}\nseed = 7\n")
    return cfg


def test_simulate_metrics(tmp_path):
    cfg = _sim_config(tmp_path)
    assert run("simulate", "--config", cfg, "-o", tmp_path / "run") == 0
    metrics = formats.parse_metrics((tmp_path / "run" / "metrics.txt").read_text())
    assert metrics["exact_delays"] is True
    assert metrics["window_samples"] == 256
    assert metrics["paths"][(1, 1)]["delay_errors"] == [0]
    assert metrics["paths"][(1, 1)]["gain_errors"][0] < 0.05
    header, rows = formats.parse_csv((tmp_path / "run" / "peaks_r0_t1.csv").read_text())
    assert [int(r[0]) for r in rows] == [40]


def test_byte_determinism(tmp_path):
    cfg = _sim_config(tmp_path, snr="15")
    trees = []
    for name in ("a", "b"):
        root = tmp_path / name
        assert run("gen", "--config", cfg, "-o", root / "codes") == 0
        assert run("corr", "--config", cfg, "-o", root / "corr.csv") == 0
        assert run("wave", "--config", cfg, "-o", root / "wave") == 0
        assert run("spectrum", "--config", cfg, "-o", root / "spec.csv") == 0
        assert run("mem", "--config", cfg, "-o", root / "mem") == 0
        assert run("simulate", "--config", cfg, "-o", root / "sim") == 0
        assert run("constellation", "--config", cfg, "-o", root / "const.csv") == 0
        assert run("report", "--config", cfg, "-o", root / "report.txt") == 0
        trees.append(tree_bytes(root))
    assert trees[0] == trees[1]
    assert len(trees[0]) > 15


def test_constellation_csv(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert run("constellation", *SMALL, "-o", out) == 0
    header, rows = formats.parse_csv(out.read_text())
    assert header == ["tx", "chip", "value"]
    assert len(rows) == 2 * 64
    assert "EVM" in capsys.readouterr().out


def test_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("gap = -1\n")
    assert run("gen", "--config", bad, "-o", tmp_path / "x") == 3
    assert "gap" in capsys.readouterr().err
    assert run("gen", "--config", tmp_path / "missing.cfg", "-o", tmp_path / "x") == 4
    assert run("simulate", *SMALL, "--channel", tmp_path / "nope.chan", "-o", tmp_path / "y") == 4
    (tmp_path / "bad.chan").write_text("0 0 zero 1\n")
    assert run("simulate", *SMALL, "--channel", tmp_path / "bad.chan", "-o", tmp_path / "y") == 3
    assert run("gen", "--k", 20, "-o", tmp_path / "z") == 3


def test_metrics_round_trip(tmp_path):
    cfg = _sim_config(tmp_path)
    assert run("simulate", "--config", cfg, "-o", tmp_path / "run") == 0
    text = (tmp_path / "run" / "metrics.txt").read_text()
    parsed = formats.parse_metrics(text)
    assert set(parsed["paths"]) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert all(not line.endswith(" ") for line in text.splitlines())

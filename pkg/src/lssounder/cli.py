"""Command-line entry point: ``lssounder <command> [options]``.

Commands
--------
gen            write the LS codes of one tree layer plus a manifest
corr           correlation profiles of every code pair as CSV
wave           shaped, up-converted, Q1.15 transmit waveforms (.i16 + .meta)
spectrum       DAC output spectrum with image centres (CSV)
mem            ROM initialisation files (.mem), one per code
simulate       end-to-end 2x2 sounding run: CIRs, metrics, manifest
constellation  loopback decision points per transmitter (CSV)
report         correlation / IFW summary of a code set

Exit status: 0 success, 2 usage error, 3 invalid configuration or input,
4 file I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import formats
from .channel import MimoChannel, NoiseSpec, add_awgn, parse_channel
from .config import ConfigError, RunConfig, format_config, load_config
from .correlation import MODES, corr_profile, correlation_report, measure_ifw
from .golay import generate_pair
from .lscode import code_set, expand, predicted_ifw
from .sounder import constellation, evm, matched_cir, run_sounding, transmit_codes
from .txchain import bandwidth_warnings, format_mem_lines, quantize_q15, spectrum, transmit

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3, 4


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {name: getattr(args, name, None) for name in (
        "k", "depth", "layer", "gap", "trailing_gap", "rolloff", "sps", "order", "chip_rate",
        "scale", "channel", "snr_db", "seed", "threshold_db")}
    if overrides.get("layer") is not None and overrides.get("depth") is None:
        overrides["depth"] = max(cfg.depth, overrides["layer"])
    return cfg.replace(**overrides)


def _build_codes(cfg: RunConfig):
    tree = expand(generate_pair(cfg.k), cfg.depth)
    return tree, code_set(tree, cfg.layer, cfg.gap, cfg.effective_trailing_gap)


def _codes(args, cfg: RunConfig) -> list:
    if getattr(args, "codes", None):
        return formats.read_codes(Path(args.codes))
    return list(_build_codes(cfg)[1])


def _say(msg: str) -> None:
    print(msg)


def cmd_gen(args) -> int:
    cfg = _config(args)
    tree, codes = _build_codes(cfg)
    ifw = {}
    for i, a in enumerate(codes):
        for b in codes.codes[i + 1:]:
            ifw[f"{a.id}-{b.id}"] = predicted_ifw(tree, a.id, b.id, cfg.gap)
    manifest = {
        "command": "gen",
        "k": cfg.k, "depth": cfg.depth, "layer": cfg.layer,
        "seed_length": tree.seed_length,
        "part_length": codes[0].part_length,
        "gap": cfg.gap, "trailing_gap": cfg.effective_trailing_gap,
        "code_length": len(codes[0]),
        "predicted_ifw": ifw,
    }
    names = formats.write_codes(Path(args.output), codes, manifest)
    _say(f"wrote {len(names)} codes of {len(codes[0])} chips to {args.output}")
    return EXIT_OK


def cmd_corr(args) -> int:
    cfg = _config(args)
    codes = _codes(args, cfg)
    span = args.lags if args.lags is not None else codes[0].gap
    lags = range(-span, span + 1)
    rows = []
    for i, a in enumerate(codes):
        for b in codes[i:]:
            prof = corr_profile(a, b, lags, args.mode, args.domain)
            rows.extend((str(a.id), str(b.id), int(t), int(v)) for t, v in zip(prof.lags, prof.values))
            _say(f"{a.id} x {b.id}: {prof.kind} IFW {measure_ifw(prof).width} chips")
    Path(args.output).write_text(formats.format_csv(["code_i", "code_j", "lag", "value"], rows))
    return EXIT_OK


def cmd_wave(args) -> int:
    cfg = _config(args)
    codes = _codes(args, cfg)
    spec = cfg.rrc
    for w in bandwidth_warnings(spec):
        print(f"warning: {w}", file=sys.stderr)
    waves = [transmit(code.chips, spec)[1] for code in codes]
    scale = cfg.scale or min(0.9 / np.max(np.abs(w.samples)) for w in waves)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for i, (code, w) in enumerate(zip(codes, waves)):
        q = quantize_q15(w, scale)
        name = f"tx{i}.i16"
        formats.write_raw(out / name, q.words, {
            "sample_rate": w.sample_rate, "scale": float(scale), "stage": w.stage,
            "saturated": q.saturated, "code": str(code.id), "group_delay": spec.group_delay})
        files.append(name)
    formats.write_manifest(out / "manifest.json", {
        "command": "wave", "config": cfg.as_dict(), "files": files, "scale": float(scale)})
    _say(f"wrote {len(files)} waveforms at {spec.sample_rate / 1e6:g} MHz to {out}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = _config(args)
    if args.input:
        words, meta = formats.read_raw(Path(args.input))
        fs = float(meta["sample_rate"])
        x = words.astype(np.float64) / (32768 * float(meta["scale"]))
    else:
        code = _codes(args, cfg)[0]
        _, if_wave, q = transmit(code.chips, cfg.rrc, cfg.scale)
        fs, x = if_wave.sample_rate, q.dequantize().samples
    bw = args.bw if args.bw is not None else cfg.analysis_bw
    nfft = args.nfft or cfg.nfft
    rep = spectrum(x, fs, bw, apply_zoh=cfg.zoh and not args.no_zoh, nfft=nfft)
    out = Path(args.output)
    out.write_text(formats.format_csv(["frequency_hz", "magnitude_db"],
                                      zip(rep.frequencies, rep.magnitudes_db)))
    peaks = out.with_name(out.stem + ".peaks.csv")
    peaks.write_text(formats.format_csv(["frequency_hz", "level_db"], zip(rep.peaks, rep.peak_levels_db)))
    for f, lvl in zip(rep.peaks, rep.peak_levels_db):
        _say(f"image at {f / 1e6:.4f} MHz, {lvl:.2f} dB")
    return EXIT_OK


def cmd_mem(args) -> int:
    cfg = _config(args)
    codes = _codes(args, cfg)
    source = args.source or cfg.mem_source
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for code in codes:
        if source == "chips":
            words = quantize_q15(code.chips.astype(np.float64), 1.0).words
        else:
            words = transmit(code.chips, cfg.rrc, cfg.scale)[2].words
        (out / f"{code.id}.mem").write_text("\n".join(format_mem_lines(words)) + "\n")
    _say(f"wrote {len(codes)} .mem files ({source}) to {out}")
    return EXIT_OK


def _channel(cfg: RunConfig) -> MimoChannel:
    if cfg.channel:
        return parse_channel(Path(cfg.channel).read_text())
    return MimoChannel.diagonal()


def cmd_simulate(args) -> int:
    cfg = _config(args)
    codes = _codes(args, cfg)[:2]
    ch = _channel(cfg)
    run = run_sounding(codes, ch, cfg.rrc, NoiseSpec(cfg.snr_db, cfg.seed), cfg.threshold_db)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for r, row in enumerate(run.estimates):
        for t, est in enumerate(row):
            (out / f"cir_r{r}_t{t}.csv").write_text(formats.format_csv(
                ["lag_samples", "magnitude"], zip(est.lags, est.magnitudes)))
            (out / f"peaks_r{r}_t{t}.csv").write_text(formats.format_csv(
                ["delay_samples", "gain", "level_db"],
                ((p.delay, p.gain, p.level_db) for p in est.peaks)))
    warnings = run.warnings + bandwidth_warnings(cfg.rrc)
    (out / "metrics.txt").write_text(formats.format_metrics(run.metrics, warnings))
    (out / "run.cfg").write_text(format_config(cfg))
    formats.write_manifest(out / "manifest.json", {
        "command": "simulate", "config": cfg.as_dict(), "codes": [str(c.id) for c in codes]})
    m = run.metrics
    _say(f"delays exact: {m.exact_delays}; max gain error {m.max_gain_error:.3g}; "
         f"dynamic range {m.dynamic_range_db:.1f} dB; flagged {len(m.flagged)}")
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_constellation(args) -> int:
    """Transmitter loopback, one code at a time, optional AWGN."""
    cfg = _config(args)
    codes = _codes(args, cfg)[:2]
    refs = transmit_codes(codes, cfg.rrc)
    rows = []
    for t, (code, ref) in enumerate(zip(codes, refs)):
        rx = add_awgn(ref, NoiseSpec(cfg.snr_db, cfg.seed + t))
        est = matched_cir(rx, ref, cfg.gap * cfg.sps, cfg.threshold_db)
        if est.main_peak is None:
            raise ValueError(f"no signal from tx {t}")
        points = constellation(rx, code, cfg.rrc, est.main_peak.delay)
        amp, err = evm(points, code)
        _say(f"tx{t}: amplitude {amp:.4f}, EVM {100 * err:.2f} %")
        rows.extend((t, i, p) for i, p in enumerate(points))
    Path(args.output).write_text(formats.format_csv(["tx", "chip", "value"], rows))
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _config(args)
    codes = _codes(args, cfg)
    rep = correlation_report(codes, mode=args.mode)
    lines = [f"# correlation report, {rep.mode}, lags {rep.lag_min}..{rep.lag_max}"]
    for p in rep.pairs:
        lines.append(f"{p.id_i} {p.id_j} {p.kind} ifw={p.ifw.width} "
                     f"dynamic_range_db={p.ifw.dynamic_range_db!r} zero_lag={p.zero_lag} "
                     f"peak_inside={p.peak_inside} peak_outside={p.peak_outside}")
    lines.append(f"min_ifw = {rep.min_ifw}")
    duration = rep.min_ifw / cfg.chip_rate
    lines.append(f"min_ifw_us = {duration * 1e6!r}")
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, codes: bool = True, rrc: bool = False) -> None:
    p.add_argument("--config", help="key = value run configuration file")
    if codes:
        p.add_argument("--codes", help="directory written by 'gen'")
        p.add_argument("--k", type=int, help="seed Golay length 2**k")
        p.add_argument("--depth", type=int, help="code tree depth")
        p.add_argument("--layer", type=int, help="tree layer to use")
        p.add_argument("--gap", type=int, help="zero gap between C and S (chips)")
        p.add_argument("--trailing-gap", dest="trailing_gap", type=int,
                       help="zeros after S (default: gap)")
    if rrc:
        p.add_argument("--rolloff", type=float)
        p.add_argument("--sps", type=int)
        p.add_argument("--order", type=int)
        p.add_argument("--chip-rate", dest="chip_rate", type=float)
        p.add_argument("--scale", type=float, help="Q1.15 scale (default: 0.9 of peak)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lssounder", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate LS codes")
    _add_common(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("corr", help="correlation profiles")
    _add_common(p)
    p.add_argument("--lags", type=int, help="largest |lag| (default: gap)")
    p.add_argument("--mode", choices=MODES, default="aperiodic")
    p.add_argument("--domain", choices=("parts", "chips"), default="parts")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("wave", help="transmit waveforms")
    _add_common(p, rrc=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_wave)

    p = sub.add_parser("spectrum", help="DAC output spectrum")
    _add_common(p, rrc=True)
    p.add_argument("--input", help=".i16 waveform written by 'wave'")
    p.add_argument("--bw", type=float, help="analysis bandwidth in Hz")
    p.add_argument("--nfft", type=int)
    p.add_argument("--no-zoh", action="store_true", help="skip the zero-order-hold weighting")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("mem", help="ROM initialisation files")
    _add_common(p, rrc=True)
    p.add_argument("--source", choices=("chips", "if"))
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_mem)

    for name, func, help_ in (("simulate", cmd_simulate, "2x2 sounding simulation"),
                              ("constellation", cmd_constellation, "loopback constellation")):
        p = sub.add_parser(name, help=help_)
        _add_common(p, rrc=True)
        if name == "simulate":
            p.add_argument("--channel", help="channel description file")
        p.add_argument("--snr-db", dest="snr_db", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--threshold-db", dest="threshold_db", type=float)
        p.add_argument("-o", "--output", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("report", help="correlation / IFW report")
    _add_common(p)
    p.add_argument("--mode", choices=MODES, default="aperiodic")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"lssounder: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"lssounder: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Artifact file formats. Every writer has a matching reader.

Code file (``<id>.code``)
    ``# key: value`` header lines (id, part_length, gap, trailing_gap),
    then one chip (-1, 0 or 1) per line.
CSV
    Comma separated, one header row, floats written with ``repr``.
Raw waveform (``.i16``)
    Header-less little-endian int16 samples. The sidecar ``.meta`` file
    holds ``key = value`` lines: sample_rate, scale, stage, samples,
    saturated.
Metrics report (``metrics.txt``)
    ``key = value`` lines; per-path keys are ``path.<r>.<t>.<field>`` and
    list values are space separated. Repeated ``warning`` keys collect.
Manifest (``manifest.json``)
    Parameters of the run, keys sorted.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .lscode import CodeId, LsCode, assemble


def format_code(code: LsCode) -> str:
    head = [
        f"# id: {code.id}",
        f"# part_length: {code.part_length}",
        f"# gap: {code.gap}",
        f"# trailing_gap: {code.trailing_gap}",
    ]
    return "\n".join(head + [str(int(c)) for c in code.chips]) + "\n"


def parse_code(text: str) -> LsCode:
    meta, chips = {}, []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
            continue
        try:
            chips.append(int(line))
        except ValueError:
            raise ValueError(f"line {n}: bad chip {line!r}") from None
    try:
        n = int(meta["part_length"])
        gap = int(meta["gap"])
        tail = int(meta["trailing_gap"])
        code_id = CodeId.parse(meta["id"])
    except KeyError as exc:
        raise ValueError(f"code file lacks header field {exc}") from None
    if len(chips) != 2 * n + gap + tail:
        raise ValueError(f"expected {2 * n + gap + tail} chips, found {len(chips)}")
    code = assemble(chips[:n], chips[n + gap:2 * n + gap], gap, tail, code_id)
    if not np.array_equal(code.chips, chips):
        raise ValueError("gap positions hold non-zero chips")
    return code


def write_codes(directory: Path, codes, manifest: dict) -> list:
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for code in codes:
        name = f"{code.id}.code"
        (directory / name).write_text(format_code(code))
        names.append(name)
    write_manifest(directory / "manifest.json", {**manifest, "code_files": names})
    return names


def read_codes(directory: Path) -> list:
    manifest = read_manifest(directory / "manifest.json")
    return [parse_code((directory / name).read_text()) for name in manifest["code_files"]]


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str) -> tuple:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise ValueError("empty CSV")
    return rows[0], rows[1:]


def write_raw(path: Path, words, meta: dict) -> None:
    words = np.asarray(words, dtype="<i2")
    path.write_bytes(words.tobytes())
    lines = [f"{k} = {_cell(v)}" for k, v in sorted({**meta, "samples": words.size}.items())]
    meta_path(path).write_text("\n".join(lines) + "\n")


def meta_path(path: Path) -> Path:
    return path.with_suffix(".meta")


def read_raw(path: Path) -> tuple:
    words = np.frombuffer(path.read_bytes(), dtype="<i2").astype(np.int16)
    meta = parse_keyvalue(meta_path(path).read_text())
    if int(meta["samples"]) != words.size:
        raise ValueError(f"{path}: sidecar says {meta['samples']} samples, file has {words.size}")
    return words, meta


def parse_keyvalue(text: str) -> dict:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"line {n}: expected 'key = value'")
        key, value = (p.strip() for p in body.split("=", 1))
        out[key] = value
    return out


def format_metrics(metrics, warnings=()) -> str:
    lines = [
        "# lssounder metrics v1",
        f"window_samples = {metrics.window_samples}",
        f"dynamic_range_db = {metrics.dynamic_range_db!r}",
        f"min_delay_us = {metrics.min_delay_us!r}",
        f"max_delay_us = {metrics.max_delay_us!r}",
        f"exact_delays = {str(metrics.exact_delays).lower()}",
        f"max_gain_error = {metrics.max_gain_error!r}",
    ]
    for (r, t), m in sorted(metrics.paths.items()):
        key = f"path.{r}.{t}"
        lines += [
            f"{key}.delay_errors = {' '.join(str(e) for e in m.delay_errors)}",
            f"{key}.gain_errors = {' '.join(repr(float(e)) for e in m.gain_errors)}",
            f"{key}.missed = {m.missed}",
            f"{key}.out_of_window = {' '.join(str(d) for d in m.out_of_window)}",
            f"{key}.interference_floor_db = {m.interference_floor_db!r}",
        ]
    lines += [f"warning = {w}" for w in warnings]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def parse_metrics(text: str) -> dict:
    """Metrics report back into plain Python values."""
    out = {"paths": {}, "warnings": []}
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {n}: expected 'key = value'")
        key, value = key.strip(), value.strip()
        if key == "warning":
            out["warnings"].append(value)
        elif key.startswith("path."):
            _, r, t, field = key.split(".")
            entry = out["paths"].setdefault((int(r), int(t)), {})
            items = value.split()
            if field == "delay_errors" or field == "out_of_window":
                entry[field] = [int(v) for v in items]
            elif field == "gain_errors":
                entry[field] = [float(v) for v in items]
            elif field == "missed":
                entry[field] = int(value)
            else:
                entry[field] = float(value)
        elif key == "window_samples":
            out[key] = int(value)
        elif key == "exact_delays":
            out[key] = value == "true"
        else:
            out[key] = float(value)
    return out


def write_manifest(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def read_manifest(path: Path) -> dict:
    return json.loads(path.read_text())

"""Run configuration: line-oriented ``key = value`` text.

``#`` starts a comment. Every key is optional; the defaults reproduce the
reference sounder (N = 4096 sub-codes, 4000-chip gap, roll-off 0.25,
4 samples per chip at 7.68 Mchip/s). ``channel`` is a path to a channel
description file, resolved relative to the config file.

Keys
----
k, depth, layer, gap, trailing_gap        code construction
rolloff, sps, order, chip_rate            RRC / sampling
scale                                     Q1.15 scale (``auto`` = 0.9 of peak)
channel, snr_db, seed, threshold_db       simulation
analysis_bw, nfft, zoh                    spectrum analysis
mem_source                                ``chips`` or ``if``
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from .golay import MAX_EXPONENT
from .lscode import MAX_DEPTH
from .txchain import RrcSpec


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    k: int = 12
    depth: int = 0
    layer: int = 0
    gap: int = 4000
    trailing_gap: int | None = None
    rolloff: float = 0.25
    sps: int = 4
    order: int = 32
    chip_rate: float = 7.68e6
    scale: float | None = None
    channel: str | None = None
    snr_db: float | None = None
    seed: int = 0
    threshold_db: float = -40.0
    analysis_bw: float = 80e6
    nfft: int = 1024
    zoh: bool = True
    mem_source: str = "chips"

    def __post_init__(self):
        checks = [
            ("k", 0 <= self.k <= MAX_EXPONENT, f"must be in 0..{MAX_EXPONENT}"),
            ("depth", 0 <= self.depth <= MAX_DEPTH, f"must be in 0..{MAX_DEPTH}"),
            ("layer", 0 <= self.layer <= self.depth, "must be in 0..depth"),
            ("gap", self.gap >= 0, "must be non-negative"),
            ("trailing_gap", self.trailing_gap is None or self.trailing_gap >= 0,
             "must be non-negative"),
            ("rolloff", 0.0 <= self.rolloff <= 1.0, "must be in [0, 1]"),
            ("sps", self.sps >= 1, "must be at least 1"),
            ("order", self.order >= 0 and self.order % 2 == 0, "must be even and non-negative"),
            ("chip_rate", self.chip_rate > 0, "must be positive"),
            ("scale", self.scale is None or self.scale > 0, "must be positive"),
            ("snr_db", self.snr_db is None or not math.isnan(self.snr_db), "must be a number"),
            ("analysis_bw", self.analysis_bw > 0, "must be positive"),
            ("nfft", self.nfft >= 8, "must be at least 8"),
            ("mem_source", self.mem_source in ("chips", "if"), "must be 'chips' or 'if'"),
        ]
        for name, ok, why in checks:
            if not ok:
                raise ConfigError(f"{name} {why} (got {getattr(self, name)!r})")

    @property
    def effective_trailing_gap(self) -> int:
        return self.gap if self.trailing_gap is None else self.trailing_gap

    @property
    def rrc(self) -> RrcSpec:
        return RrcSpec(self.rolloff, self.sps, self.order, self.chip_rate)

    def replace(self, **changes) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_INTS = {"k", "depth", "layer", "gap", "trailing_gap", "sps", "order", "seed", "nfft"}
_FLOATS = {"rolloff", "chip_rate", "scale", "snr_db", "threshold_db", "analysis_bw"}
_NONE_WORDS = {"", "none", "auto", "off", "inf"}


def _convert(key: str, text: str, lineno: int):
    low = text.lower()
    try:
        if key in _INTS:
            if key == "trailing_gap" and low in _NONE_WORDS:
                return None
            return int(text)
        if key in _FLOATS:
            if key in ("scale", "snr_db") and low in _NONE_WORDS:
                return None
            return float(text)
        if key == "zoh":
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if key == "channel":
            return None if low in ("", "none") else text
        return text
    except ValueError:
        raise ConfigError(f"line {lineno}: bad value for {key}: {text!r}") from None


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, value = (part.strip() for part in body.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, value, lineno)
    if values.get("channel") and base_dir is not None:
        path = Path(values["channel"])
        if not path.is_absolute():
            path = base_dir / path
        values["channel"] = str(path)
    if values.get("channel") and not Path(values["channel"]).is_file():
        raise ConfigError(f"channel file not found: {values['channel']}")
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), path.parent)


def format_config(cfg: RunConfig) -> str:
    lines = []
    for key, value in cfg.as_dict().items():
        if value is None:
            value = "auto" if key in ("scale", "trailing_gap") else "none"
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"

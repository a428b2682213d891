"""BPSK transmit chain: chips -> RRC shaping -> fs/4 up-conversion -> Q1.15.

With the default 7.68 Mchip/s and 4 samples per chip the DAC runs at
30.72 MHz, the fs/4 mixer centres the signal on 7.68 MHz and the DAC
images fall at k*30.72 +/- 7.68 MHz; the one at 69.12 MHz is the one the
RF stage keeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

CHIP_RATE = 7.68e6
SAMPLES_PER_CHIP = 4
ROLLOFF = 0.25
FILTER_ORDER = 32
ALLOWED_BANDWIDTH = 16e6
Q15_ONE = 32768
STAGES = ("baseband", "if")
MIN_SEGMENTS = 8


@dataclass(frozen=True)
class RrcSpec:
    rolloff: float = ROLLOFF
    sps: int = SAMPLES_PER_CHIP
    order: int = FILTER_ORDER
    chip_rate: float = CHIP_RATE

    def __post_init__(self):
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError(f"rolloff must be in [0, 1], got {self.rolloff}")
        if int(self.sps) != self.sps or self.sps < 1:
            raise ValueError(f"sps must be a positive integer, got {self.sps}")
        if int(self.order) != self.order or self.order < 0 or self.order % 2:
            raise ValueError(f"order must be a non-negative even integer, got {self.order}")
        if self.chip_rate <= 0:
            raise ValueError(f"chip_rate must be positive, got {self.chip_rate}")

    @property
    def sample_rate(self) -> float:
        return self.chip_rate * self.sps

    @property
    def group_delay(self) -> int:
        """Filter delay in samples."""
        return self.order // 2

    @property
    def occupied_bandwidth(self) -> float:
        return (1 + self.rolloff) * self.chip_rate


@dataclass(frozen=True, eq=False)
class IqWaveform:
    samples: np.ndarray
    sample_rate: float
    stage: str = "baseband"
    group_delay: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.stage not in STAGES:
            raise ValueError(f"stage must be one of {STAGES}, got {self.stage!r}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)

    def replace(self, samples) -> "IqWaveform":
        return IqWaveform(samples, self.sample_rate, self.stage, self.group_delay)


@dataclass(frozen=True, eq=False)
class Q15Words:
    """Saturated 16-bit two's-complement samples (Q1.15)."""

    words: np.ndarray
    scale: float
    saturated: int = 0
    sample_rate: float = CHIP_RATE * SAMPLES_PER_CHIP
    stage: str = "if"

    def __len__(self) -> int:
        return int(self.words.size)

    def dequantize(self) -> IqWaveform:
        return IqWaveform(dequantize_q15(self.words, self.scale), self.sample_rate, self.stage)


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    frequencies: np.ndarray
    magnitudes_db: np.ndarray
    peaks: list
    peak_levels_db: list
    zoh_applied: bool
    bin_width: float


def rrc_pulse(t, rolloff: float) -> np.ndarray:
    """Unnormalised root-raised-cosine pulse, ``t`` in chip periods.

    ``h(0) = 1 - beta + 4 beta / pi``; the points ``t = +/- 1/(4 beta)`` use
    their analytic limit.
    """
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    beta = float(rolloff)
    h = np.empty_like(t)
    eps = 1e-9
    at_zero = np.abs(t) < eps
    if beta > 0:
        at_edge = np.abs(np.abs(t) - 1 / (4 * beta)) < eps
    else:
        at_edge = np.zeros_like(at_zero)
    rest = ~(at_zero | at_edge)

    h[at_zero] = 1 - beta + 4 * beta / math.pi
    if at_edge.any():
        a = math.pi / (4 * beta)
        h[at_edge] = beta / math.sqrt(2) * (
            (1 + 2 / math.pi) * math.sin(a) + (1 - 2 / math.pi) * math.cos(a))
    x = t[rest]
    h[rest] = (np.sin(math.pi * x * (1 - beta)) + 4 * beta * x * np.cos(math.pi * x * (1 + beta))) / (
        math.pi * x * (1 - (4 * beta * x) ** 2))
    return h


def design_rrc(spec: RrcSpec) -> np.ndarray:
    """``order + 1`` symmetric RRC taps with unit energy."""
    half = spec.order // 2
    t = (np.arange(half + 1) - half) / spec.sps
    left = rrc_pulse(t, spec.rolloff)
    taps = np.concatenate([left, left[-2::-1]])
    return taps / np.sqrt(np.sum(taps ** 2))


def upsample(chips, sps: int) -> np.ndarray:
    """Zero-stuff: chip m lands on sample m*sps, no trailing zeros."""
    chips = np.asarray(chips, dtype=np.float64).reshape(-1)
    if chips.size == 0:
        return chips
    out = np.zeros((chips.size - 1) * sps + 1)
    out[::sps] = chips
    return out


def shape(chips, spec: RrcSpec = RrcSpec()) -> IqWaveform:
    """Pulse-shape a chip sequence at ``spec.sample_rate``.

    Output length is ``(len(chips) - 1) * sps + order + 1``; chip m peaks at
    sample ``m * sps + order / 2``.
    """
    taps = design_rrc(spec)
    up = upsample(chips, spec.sps)
    samples = np.convolve(up, taps) if up.size else np.zeros(0)
    return IqWaveform(samples, spec.sample_rate, "baseband", spec.group_delay)


def fs4_mixer(n: int, offset: int = 0) -> np.ndarray:
    """``cos(pi (k - offset) / 2)`` for k in 0..n-1, as exact 1, 0, -1, 0."""
    pattern = np.array([1.0, 0.0, -1.0, 0.0])
    return pattern[(np.arange(n) - offset) % 4]


def upconvert_fs4(baseband: IqWaveform) -> IqWaveform:
    if baseband.stage != "baseband":
        raise ValueError(f"expected a baseband waveform, got stage {baseband.stage!r}")
    mixed = baseband.samples * fs4_mixer(len(baseband))
    return IqWaveform(mixed, baseband.sample_rate, "if", baseband.group_delay)


def quantize_q15(w, scale: float = 1.0) -> Q15Words:
    """``round(x * scale * 32768)`` saturated to int16; +1.0 becomes 32767."""
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if isinstance(w, IqWaveform):
        x, rate, stage = w.samples, w.sample_rate, w.stage
    else:
        x, rate, stage = np.asarray(w, dtype=np.float64), CHIP_RATE * SAMPLES_PER_CHIP, "if"
    raw = np.rint(x * scale * Q15_ONE)
    saturated = int(np.count_nonzero((raw > 32767) | (raw < -32768)))
    words = np.clip(raw, -32768, 32767).astype(np.int16)
    return Q15Words(words, float(scale), saturated, rate, stage)


def dequantize_q15(words, scale: float = 1.0) -> np.ndarray:
    return np.asarray(words, dtype=np.float64) / (Q15_ONE * scale)


def auto_scale(w: IqWaveform, headroom: float = 0.9) -> float:
    """Scale that maps the waveform peak to ``headroom`` of full scale."""
    peak = float(np.max(np.abs(w.samples))) if len(w) else 0.0
    return headroom / peak if peak > 0 else 1.0


def bandwidth_warnings(spec: RrcSpec, allowed: float = ALLOWED_BANDWIDTH) -> list:
    occupied = spec.occupied_bandwidth
    if occupied > allowed:
        return [f"occupied bandwidth {occupied / 1e6:.3f} MHz exceeds the "
                f"{allowed / 1e6:.3f} MHz allowance"]
    return []


def _region_centres(power: np.ndarray, threshold: float) -> list:
    """Centre index (may be half-integer) of each run above ``threshold``.

    The centre maximises the overlap of the run with its own mirror image,
    which is exact for symmetric bands and robust to ripple.
    """
    above = power > threshold
    centres = []
    i, n = 0, power.size
    while i < n:
        if not above[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and above[j + 1]:
            j += 1
        run = power[i:j + 1]
        overlap = np.convolve(run, run)
        centres.append(i + int(np.argmax(overlap)) / 2)
        i = j + 1
    return centres


def spectrum(x, fs: float | None = None, analysis_bw: float | None = None,
             apply_zoh: bool = True, nfft: int = 1024, floor_db: float = -20.0) -> SpectrumReport:
    """Power spectrum of a DAC output, replicas included up to ``analysis_bw``.

    The sampled spectrum is averaged with Welch's method over ``nfft``-point
    segments (shorter for records under ``MIN_SEGMENTS * nfft`` samples) and extended periodically past fs/2, which is what a DAC puts
    out before reconstruction. With ``apply_zoh`` the replicas are weighted
    by the zero-order-hold response ``|sinc(f / fs)|``.

    Image centres are found on the unweighted replica spectrum (the hold
    response is a known tilt) from every band that rises above ``floor_db``
    relative to the strongest; bands cut off by ``analysis_bw`` are dropped.
    Reported levels are taken at each centre from the (weighted) spectrum.
    """
    if isinstance(x, Q15Words):
        fs = x.sample_rate if fs is None else fs
        samples = dequantize_q15(x.words, x.scale)
    elif isinstance(x, IqWaveform):
        fs = x.sample_rate if fs is None else fs
        samples = x.samples
    else:
        samples = np.asarray(x)
        if samples.dtype == np.int16:
            samples = dequantize_q15(samples)
        samples = samples.astype(np.float64)
    if fs is None or fs <= 0:
        raise ValueError("a positive sample rate is required")
    if samples.size == 0:
        raise ValueError("empty input")
    if analysis_bw is None:
        analysis_bw = fs / 2

    # short records get shorter segments so there is always something to average
    nper = min(nfft, max(samples.size // MIN_SEGMENTS, 16), samples.size)
    _, psd = signal.welch(samples, fs=fs, nperseg=nper, return_onesided=False,
                          detrend=False, scaling="density")
    df = fs / nper

    top = int(math.floor(analysis_bw / df + 1e-9))
    idx = np.arange(-nper, top + nper + 1)
    freqs_all = idx * df
    raw = psd[idx % nper]
    weight = np.abs(np.sinc(freqs_all / fs)) ** 2 if apply_zoh else np.ones_like(raw)
    weighted = raw * weight

    threshold = raw.max() * 10 ** (floor_db / 10)
    peaks, levels = [], []
    for c in _region_centres(raw, threshold):
        f = (idx[0] + c) * df
        if -1e-9 <= f <= analysis_bw + 1e-9:
            peaks.append(float(f))
            k = int(round(c))
            levels.append(float(10 * np.log10(max(weighted[k], 1e-300))))

    keep = (idx >= 0) & (idx <= top)
    mags = 10 * np.log10(np.maximum(weighted[keep], 1e-300))
    return SpectrumReport(freqs_all[keep], mags, peaks, levels, bool(apply_zoh), df)


def format_mem_lines(words) -> list:
    """One lowercase 4-digit hex word per line (two's complement)."""
    return [f"{int(w) & 0xFFFF:04x}" for w in np.asarray(words, dtype=np.int64)]


def parse_mem_lines(lines) -> np.ndarray:
    out = []
    for n, line in enumerate(lines, 1):
        text = line.strip()
        if not text:
            continue
        if len(text) != 4:
            raise ValueError(f"line {n}: expected 4 hex digits, got {text!r}")
        value = int(text, 16)
        out.append(value - 0x10000 if value & 0x8000 else value)
    return np.array(out, dtype=np.int16)


def transmit(chips, spec: RrcSpec = RrcSpec(), scale: float | None = None) -> tuple:
    """Run the full chain; returns (baseband, if waveform, Q15 words)."""
    bb = shape(chips, spec)
    if_wave = upconvert_fs4(bb)
    if scale is None:
        scale = auto_scale(if_wave)
    return bb, if_wave, quantize_q15(if_wave, scale)

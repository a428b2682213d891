"""Simulated CDM sounding receiver for the 2x2 LS-code transmitter.

Each receive antenna is correlated against the IF reference waveform of
every transmitted code. Inside the interference-free window the other
code contributes nothing (its chip cross-correlation is exactly zero), so
each correlation is the channel response of one (rx, tx) path convolved
with the code's own pulse autocorrelation.

Paths are picked off iteratively: take the strongest lag, subtract the
scaled reference autocorrelation there, repeat until the residual falls
below the detection threshold. This keeps the raised-cosine sidelobes of a
strong path from being reported as paths of their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .channel import N_ANT, MimoChannel, NoiseSpec, add_awgn, apply_mimo, validate_delay_spread
from .lscode import LsCode
from .txchain import IqWaveform, RrcSpec, auto_scale, design_rrc, fs4_mixer, quantize_q15, shape, upconvert_fs4

DEFAULT_THRESHOLD_DB = -40.0
FLOOR_DB = -300.0


@dataclass(frozen=True)
class Peak:
    delay: int
    gain: float
    level_db: float


@dataclass(frozen=True, eq=False)
class CirEstimate:
    lags: np.ndarray
    values: np.ndarray
    peaks: list
    residual: np.ndarray

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def main_peak(self) -> Peak | None:
        return max(self.peaks, key=lambda p: abs(p.gain), default=None)


@dataclass(frozen=True)
class PathMetrics:
    delay_errors: list
    gain_errors: list
    missed: int
    out_of_window: list
    interference_floor_db: float


@dataclass(frozen=True)
class SoundingMetrics:
    paths: dict
    dynamic_range_db: float
    window_samples: int
    min_delay_us: float
    max_delay_us: float

    @property
    def exact_delays(self) -> bool:
        return all(m.missed == 0 and all(e == 0 for e in m.delay_errors)
                   for m in self.paths.values())

    @property
    def max_gain_error(self) -> float:
        return max((e for m in self.paths.values() for e in m.gain_errors), default=0.0)

    @property
    def worst_floor_db(self) -> float:
        return max(m.interference_floor_db for m in self.paths.values())

    @property
    def flagged(self) -> list:
        return [(key, d) for key, m in sorted(self.paths.items()) for d in m.out_of_window]


def transmit_codes(codes, spec: RrcSpec = RrcSpec(), quantize: bool = True) -> list:
    """IF waveforms of each code, sharing one Q1.15 scale when quantised."""
    waves = [upconvert_fs4(shape(code.chips, spec)) for code in codes]
    if not quantize:
        return waves
    scale = min(auto_scale(w) for w in waves)
    return [w.replace(quantize_q15(w, scale).dequantize().samples) for w in waves]


def _normalised_acf(ref: np.ndarray, energy: float) -> np.ndarray:
    return signal.correlate(ref, ref, mode="full", method="fft") / energy


def matched_cir(rx: IqWaveform, ref: IqWaveform, max_lag: int | None = None,
                threshold_db: float = DEFAULT_THRESHOLD_DB, max_peaks: int = 64) -> CirEstimate:
    """Sliding correlation of ``rx`` against ``ref`` for lags ``0..max_lag-1``.

    Values are normalised by the reference energy, so a path of gain g shows
    up as g at its delay.
    """
    x, h = rx.samples, ref.samples
    if x.size == 0 or h.size == 0:
        raise ValueError("empty waveform")
    energy = float(np.dot(h, h))
    if energy == 0:
        raise ValueError("reference has zero energy")
    if max_lag is None:
        max_lag = max(x.size - h.size + 1, 1)
    need = max_lag + h.size - 1
    if x.size < need:
        x = np.concatenate([x, np.zeros(need - x.size)])
    full = signal.correlate(x[:need], h, mode="full", method="fft")
    values = full[h.size - 1:h.size - 1 + max_lag] / energy
    lags = np.arange(max_lag)

    residual = values.copy()
    template = _normalised_acf(h, energy)
    centre = h.size - 1
    found = []
    main = float(np.max(np.abs(residual)))
    if main > 0:
        limit = main * 10 ** (threshold_db / 20)
        for _ in range(max_peaks):
            d = int(np.argmax(np.abs(residual)))
            v = float(residual[d])
            if abs(v) < limit or abs(v) == 0:
                break
            found.append((d, v))
            lo, hi = max(0, d - centre), min(max_lag, d + centre + 1)
            residual[lo:hi] -= v * template[lo - d + centre:hi - d + centre]

    peaks = []
    if found:
        strongest = max(abs(v) for _, v in found)
        peaks = [Peak(d, v, 20 * math.log10(abs(v) / strongest)) for d, v in sorted(found)]
    return CirEstimate(lags, values, peaks, residual)


def estimate_mimo(rx, refs, max_lag: int | None = None,
                  threshold_db: float = DEFAULT_THRESHOLD_DB) -> list:
    """``est[r][t]``: receive antenna r correlated against the code of tx t."""
    rx, refs = list(rx), list(refs)
    if len(rx) != N_ANT or len(refs) != N_ANT:
        raise ValueError(f"expected {N_ANT} received and {N_ANT} reference waveforms")
    return [[matched_cir(x, ref, max_lag, threshold_db) for ref in refs] for x in rx]


def evaluate(est, truth: MimoChannel, window: int, guard: int,
             chip_rate: float, sps: int) -> SoundingMetrics:
    """Compare estimates with the true channel.

    ``window`` is the interference-free window in samples; true taps at or
    beyond it are flagged rather than scored. The interference floor of a
    path is its largest estimate magnitude more than ``guard`` samples away
    from every true tap, relative to the strongest tap at that receiver.
    """
    paths = {}
    floors = []
    for r in range(N_ANT):
        strongest = max((abs(tap.coefficient) for t in range(N_ANT) for tap in truth.path(r, t)),
                        default=0.0)
        for t in range(N_ANT):
            e = est[r][t]
            taps = truth.path(r, t)
            inside = [tap for tap in taps if tap.delay < window]
            outside = [tap.delay for tap in taps if tap.delay >= window]
            delay_err, gain_err, missed = [], [], 0
            for tap in inside:
                if not e.peaks:
                    missed += 1
                    continue
                best = min(e.peaks, key=lambda p: abs(p.delay - tap.delay))
                if abs(best.delay - tap.delay) > guard:
                    missed += 1
                    continue
                delay_err.append(best.delay - tap.delay)
                gain_err.append(abs(best.gain - tap.coefficient) / abs(tap.coefficient))

            mask = e.lags < window
            for tap in inside:
                mask &= np.abs(e.lags - tap.delay) > guard
            spur = float(np.max(np.abs(e.values[mask]))) if mask.any() else 0.0
            if strongest > 0 and spur > 0:
                floor = max(20 * math.log10(spur / strongest), FLOOR_DB)
            else:
                floor = FLOOR_DB
            floors.append(floor)
            paths[(r, t)] = PathMetrics(delay_err, gain_err, missed, outside, floor)

    return SoundingMetrics(paths, -max(floors), window,
                           1e6 / chip_rate, 1e6 * (window // sps) / chip_rate)


def constellation(rx: IqWaveform, code: LsCode, spec: RrcSpec = RrcSpec(),
                  delay: int = 0) -> np.ndarray:
    """One real decision value per non-gap chip of ``code``.

    The IF signal is mixed back with the fs/4 sequence aligned to ``delay``,
    matched filtered with the RRC taps and sampled at the chip instants.
    """
    x = rx.samples
    if x.size == 0:
        raise ValueError("empty waveform")
    taps = design_rrc(spec)
    mixed = 2.0 * x * fs4_mixer(x.size, offset=delay)
    filtered = np.convolve(mixed, taps)
    chips = np.flatnonzero(code.active_mask())
    instants = delay + chips * spec.sps + spec.order
    points = np.zeros(chips.size)
    ok = instants < filtered.size
    points[ok] = filtered[instants[ok]]
    return points


def evm(points: np.ndarray, code: LsCode) -> tuple:
    """(cluster amplitude A, rms error / |A|) against the code's ±1 chips."""
    ideal = code.chips[code.active_mask()].astype(np.float64)
    amp = float(np.mean(points * ideal))
    if amp == 0:
        return 0.0, math.inf
    err = points - amp * ideal
    return amp, float(np.sqrt(np.mean(err ** 2)) / abs(amp))


@dataclass(frozen=True, eq=False)
class SoundingRun:
    tx: list
    rx: list
    estimates: list
    metrics: SoundingMetrics
    warnings: list = field(default_factory=list)


def run_sounding(codes, channel: MimoChannel, spec: RrcSpec = RrcSpec(),
                 noise: NoiseSpec = NoiseSpec(), threshold_db: float = DEFAULT_THRESHOLD_DB,
                 active=(True, True)) -> SoundingRun:
    """Transmit the two codes through ``channel`` and estimate all four paths.

    ``active`` switches individual transmitters off (their waveform is
    replaced by zeros) for sequential, TDM-style comparison runs.
    """
    codes = list(codes)
    if len(codes) != N_ANT:
        raise ValueError(f"the 2x2 sounder needs {N_ANT} codes, got {len(codes)}")
    gap = codes[0].gap
    window = gap * spec.sps
    refs = transmit_codes(codes, spec)
    tx = [w if on else w.replace(np.zeros(len(w))) for w, on in zip(refs, active)]
    rx = apply_mimo(channel, tx)
    rx = [add_awgn(w, NoiseSpec(noise.snr_db, noise.seed + r)) for r, w in enumerate(rx)]
    est = estimate_mimo(rx, refs, window, threshold_db)
    metrics = evaluate(est, channel, window, spec.order, spec.chip_rate, spec.sps)
    return SoundingRun(tx, rx, est, metrics, validate_delay_spread(channel, gap, spec.sps))

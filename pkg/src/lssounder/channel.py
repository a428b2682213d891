"""2x2 tapped-delay-line channel acting on real IF waveforms.

Channel description file (``.chan``), one tap per line::

    # rx tx delay_samples gain [phase_rad]
    0 0 0    1.0
    0 1 120  0.4  3.141592653589793

Blank lines and ``#`` comments are ignored. A path with no lines has no
taps (the antennas are not coupled).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .txchain import IqWaveform

N_ANT = 2
MAX_GAIN = 10.0


@dataclass(frozen=True)
class PathTap:
    delay: int
    gain: float
    phase: float = 0.0

    def __post_init__(self):
        if int(self.delay) != self.delay or self.delay < 0:
            raise ValueError(f"tap delay must be a non-negative integer, got {self.delay}")
        if not math.isfinite(self.gain) or abs(self.gain) > MAX_GAIN:
            raise ValueError(f"|gain| must be at most {MAX_GAIN}, got {self.gain}")
        object.__setattr__(self, "delay", int(self.delay))

    @property
    def coefficient(self) -> float:
        """Real tap weight; the phase only contributes its sign."""
        wrapped = math.remainder(self.phase, 2 * math.pi)
        if not (math.isclose(wrapped, 0.0, abs_tol=1e-9)
                or math.isclose(abs(wrapped), math.pi, abs_tol=1e-9)):
            warnings.warn(f"phase {self.phase} rad reduced to its sign on the real IF channel",
                          stacklevel=2)
        return -self.gain if math.cos(self.phase) < 0 else self.gain


@dataclass(frozen=True)
class MimoChannel:
    taps: tuple  # taps[r][t] -> tuple of PathTap

    def __post_init__(self):
        taps = tuple(tuple(tuple(path) for path in row) for row in self.taps)
        if len(taps) != N_ANT or any(len(row) != N_ANT for row in taps):
            raise ValueError("a 2x2 channel needs taps[r][t] for r, t in {0, 1}")
        object.__setattr__(self, "taps", taps)

    @property
    def max_delay(self) -> int:
        return max((tap.delay for row in self.taps for path in row for tap in path), default=0)

    def path(self, r: int, t: int) -> tuple:
        return self.taps[r][t]

    @classmethod
    def from_paths(cls, paths: dict) -> "MimoChannel":
        """Build from ``{(r, t): [PathTap, ...]}``; missing paths are empty."""
        return cls(tuple(tuple(tuple(paths.get((r, t), ())) for t in range(N_ANT))
                         for r in range(N_ANT)))

    @classmethod
    def diagonal(cls, delay: int = 0, gain: float = 1.0) -> "MimoChannel":
        return cls.from_paths({(0, 0): [PathTap(delay, gain)], (1, 1): [PathTap(delay, gain)]})


@dataclass(frozen=True)
class NoiseSpec:
    snr_db: float | None = None
    seed: int = 0


def _apply_path(x: np.ndarray, path, out_len: int) -> np.ndarray:
    y = np.zeros(out_len)
    for tap in path:
        y[tap.delay:tap.delay + x.size] += tap.coefficient * x
    return y


def apply_mimo(ch: MimoChannel, tx) -> list:
    """``rx_r[n] = sum_t sum_p g_p tx_t[n - d_p]``; output grows by max_delay."""
    tx = list(tx)
    if len(tx) != N_ANT:
        raise ValueError(f"expected {N_ANT} transmit waveforms, got {len(tx)}")
    rates = {w.sample_rate for w in tx}
    if len(rates) != 1:
        raise ValueError(f"transmit sample rates differ: {sorted(rates)}")
    if len({len(w) for w in tx}) != 1:
        raise ValueError("transmit waveforms differ in length")
    out_len = len(tx[0]) + ch.max_delay
    rx = []
    for r in range(N_ANT):
        y = np.zeros(out_len)
        for t in range(N_ANT):
            y += _apply_path(tx[t].samples, ch.path(r, t), out_len)
        rx.append(IqWaveform(y, tx[0].sample_rate, tx[0].stage, tx[0].group_delay))
    return rx


def add_awgn(w: IqWaveform, noise: NoiseSpec) -> IqWaveform:
    """Add white Gaussian noise at ``snr_db`` relative to the mean signal power."""
    if noise.snr_db is None or (math.isinf(noise.snr_db) and noise.snr_db > 0):
        return w
    power = float(np.mean(w.samples ** 2)) if len(w) else 0.0
    if power <= 0:
        raise ValueError("cannot scale noise to a zero-power signal")
    sigma = math.sqrt(power / 10 ** (noise.snr_db / 10))
    rng = np.random.default_rng(noise.seed)
    return w.replace(w.samples + rng.normal(0.0, sigma, len(w)))


def validate_delay_spread(ch: MimoChannel, ifw_chips: int, sps: int) -> list:
    limit = ifw_chips * sps
    if ch.max_delay >= limit:
        return [f"max delay {ch.max_delay} samples reaches the interference-free window "
                f"({ifw_chips} chips = {limit} samples)"]
    return []


def random_channel(rng: np.random.Generator, max_delay: int, gain_range=(0.2, 1.0),
                   taps_per_path: int = 1) -> MimoChannel:
    """Random real channel with delays in ``[0, max_delay)`` and random signs."""
    paths = {}
    for r in range(N_ANT):
        for t in range(N_ANT):
            delays = rng.choice(max_delay, size=taps_per_path, replace=False)
            gains = rng.uniform(*gain_range, size=taps_per_path) * rng.choice([-1, 1], taps_per_path)
            paths[(r, t)] = [PathTap(int(d), float(g)) for d, g in sorted(zip(delays, gains))]
    return MimoChannel.from_paths(paths)


def parse_channel(text: str) -> MimoChannel:
    paths = {}
    for n, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        fields = body.split()
        if len(fields) not in (4, 5):
            raise ValueError(f"line {n}: expected 'rx tx delay gain [phase]', got {body!r}")
        try:
            r, t, delay = (int(f) for f in fields[:3])
            gain = float(fields[3])
            phase = float(fields[4]) if len(fields) == 5 else 0.0
        except ValueError:
            raise ValueError(f"line {n}: malformed number in {body!r}") from None
        if r not in (0, 1) or t not in (0, 1):
            raise ValueError(f"line {n}: antenna index out of range")
        try:
            paths.setdefault((r, t), []).append(PathTap(delay, gain, phase))
        except ValueError as exc:
            raise ValueError(f"line {n}: {exc}") from None
    return MimoChannel.from_paths(paths)


def format_channel(ch: MimoChannel) -> str:
    lines = ["# rx tx delay_samples gain phase_rad"]
    for r in range(N_ANT):
        for t in range(N_ANT):
            for tap in ch.path(r, t):
                lines.append(f"{r} {t} {tap.delay} {tap.gain!r} {tap.phase!r}")
    return "\n".join(lines) + "\n"

"""Combined C/S correlation of LS codes and interference-free window measurement.

``combined_corr`` sums the correlation of the two C parts and of the two S
parts. In ``"periodic"`` mode shifts wrap modulo the part length N; in
``"aperiodic"`` mode (the default) they do not. For shifts up to the gap the
aperiodic part sum equals the correlation of the full transmitted chip
sequences, which ``corr_profile(..., domain="chips")`` computes directly.

All values are exact integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .golay import aperiodic_xcorr, xcorr_full
from .lscode import LsCode, LsCodeSet

MODES = ("aperiodic", "periodic")
DOMAINS = ("parts", "chips")


@dataclass(frozen=True, eq=False)
class CorrelationProfile:
    lags: np.ndarray
    values: np.ndarray
    mode: str
    kind: str
    id_i: object
    id_j: object
    part_length: int
    domain: str = "parts"

    def value_at(self, lag: int) -> int:
        hits = np.flatnonzero(self.lags == lag)
        if hits.size == 0:
            raise KeyError(f"lag {lag} not in profile")
        return int(self.values[hits[0]])


@dataclass(frozen=True)
class IfwMeasurement:
    width: int
    dynamic_range_db: float


@dataclass(frozen=True)
class PairReport:
    id_i: object
    id_j: object
    kind: str
    ifw: IfwMeasurement
    zero_lag: int
    peak_inside: int
    peak_outside: int


@dataclass(frozen=True)
class CorrelationReport:
    mode: str
    lag_min: int
    lag_max: int
    pairs: list = field(default_factory=list)

    @property
    def min_ifw(self) -> int:
        return min(p.ifw.width for p in self.pairs)

    @property
    def min_cross_ifw(self) -> int | None:
        widths = [p.ifw.width for p in self.pairs if p.kind == "cross"]
        return min(widths) if widths else None


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _check_parts(code_i: LsCode, code_j: LsCode) -> int:
    if code_i.part_length != code_j.part_length:
        raise ValueError(
            f"part lengths differ: {code_i.part_length} != {code_j.part_length}")
    return code_i.part_length


def combined_corr(code_i: LsCode, code_j: LsCode, lag: int, mode: str = "aperiodic") -> int:
    """Single-lag reference evaluation of the summed C/S correlation."""
    _check_mode(mode)
    n = _check_parts(code_i, code_j)
    if mode == "aperiodic":
        return (aperiodic_xcorr(code_i.c_part, code_j.c_part, lag)
                + aperiodic_xcorr(code_i.s_part, code_j.s_part, lag))
    idx = (np.arange(n) + lag) % n
    return int(np.dot(code_i.c_part, code_j.c_part[idx])
               + np.dot(code_i.s_part, code_j.s_part[idx]))


def _kind(code_i: LsCode, code_j: LsCode) -> str:
    same = code_i.id == code_j.id and np.array_equal(code_i.chips, code_j.chips)
    return "auto" if same else "cross"


def corr_profile(code_i: LsCode, code_j: LsCode, lags, mode: str = "aperiodic",
                 domain: str = "parts") -> CorrelationProfile:
    """Correlation over ``lags`` (any iterable of ints), vectorised.

    ``domain="chips"`` correlates the assembled chip sequences (gaps
    included) instead of the C/S parts; it is always aperiodic.
    """
    _check_mode(mode)
    if domain not in DOMAINS:
        raise ValueError(f"domain must be one of {DOMAINS}, got {domain!r}")
    n = _check_parts(code_i, code_j)
    lags = np.array(list(lags), dtype=np.int64)
    values = np.zeros(lags.size, dtype=np.int64)

    if domain == "chips":
        full = xcorr_full(code_i.chips, code_j.chips)
        offset = len(code_i) - 1
        ok = (lags + offset >= 0) & (lags + offset < full.size)
        values[ok] = full[lags[ok] + offset]
        mode = "aperiodic"
    else:
        full = xcorr_full(code_i.c_part, code_j.c_part) + xcorr_full(code_i.s_part, code_j.s_part)
        if mode == "aperiodic":
            ok = np.abs(lags) < n
            values[ok] = full[lags[ok] + n - 1]
        else:
            # fold the aperiodic lags into the N circular ones
            circ = full[n - 1:].copy()
            circ[1:] += full[:n - 1]
            values = circ[lags % n]

    return CorrelationProfile(lags, values, mode, _kind(code_i, code_j),
                              code_i.id, code_j.id, n, domain)


def measure_ifw(profile: CorrelationProfile, window: int | None = None) -> IfwMeasurement:
    """Interference-free window of a profile.

    ``width`` is the smallest non-zero shift with a non-zero value, or the
    largest shift examined when the profile is zero away from the origin.
    The dynamic range compares the 2N main peak with the largest magnitude
    at shifts ``0 < |lag| < window`` (``window`` defaults to ``width``).
    """
    lags = np.abs(profile.lags)
    off = lags > 0
    if not off.any():
        return IfwMeasurement(0, math.inf)
    nonzero = off & (profile.values != 0)
    width = int(lags[nonzero].min()) if nonzero.any() else int(lags.max())
    if window is None:
        window = width
    inside = off & (lags < window)
    worst = int(np.abs(profile.values[inside]).max()) if inside.any() else 0
    peak = 2 * profile.part_length
    dr = math.inf if worst == 0 else 20 * math.log10(peak / worst)
    return IfwMeasurement(width, dr)


def _pair_report(profile: CorrelationProfile, nominal: int) -> PairReport:
    ifw = measure_ifw(profile, window=nominal + 1)
    lags = np.abs(profile.lags)
    mags = np.abs(profile.values)
    off = lags > 0
    inside = off & (lags < ifw.width)
    outside = off & (lags >= ifw.width)
    zero = profile.values[profile.lags == 0]
    return PairReport(
        profile.id_i, profile.id_j, profile.kind, ifw,
        int(zero[0]) if zero.size else 0,
        int(mags[inside].max()) if inside.any() else 0,
        int(mags[outside].max()) if outside.any() else 0,
    )


def correlation_report(codes: LsCodeSet, lag_range=None, mode: str = "aperiodic") -> CorrelationReport:
    """Correlate every unordered pair of a set, autocorrelations included.

    The default lag range is ``-gap..gap``, the shifts over which the part
    sum equals the correlation of the transmitted chips.
    """
    codes = list(codes)
    if not codes:
        raise ValueError("empty code set")
    if lag_range is None:
        gap = codes[0].gap
        lag_range = range(-gap, gap + 1)
    lag_range = list(lag_range)
    nominal = max((abs(t) for t in lag_range), default=0)
    report = CorrelationReport(mode, min(lag_range, default=0), max(lag_range, default=0))
    for i, code_i in enumerate(codes):
        for code_j in codes[i:]:
            prof = corr_profile(code_i, code_j, lag_range, mode)
            report.pairs.append(_pair_report(prof, nominal))
    return report

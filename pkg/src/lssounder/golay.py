"""Binary Golay complementary pairs.

Sequences are held as read-only ``int64`` numpy arrays so that every
correlation below is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_EXPONENT = 16


def as_sequence(values, *, ternary: bool = False) -> np.ndarray:
    """Return ``values`` as a frozen int64 array, checking the alphabet."""
    arr = np.array(values, dtype=np.int64).reshape(-1)
    allowed = (-1, 0, 1) if ternary else (-1, 1)
    if arr.size == 0:
        raise ValueError("sequence must not be empty")
    if not np.isin(arr, allowed).all():
        raise ValueError(f"sequence elements must be in {allowed}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GolayPair:
    c: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        c = as_sequence(self.c)
        s = as_sequence(self.s)
        if c.size != s.size:
            raise ValueError(f"pair halves differ in length: {c.size} != {s.size}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "s", s)

    def __len__(self) -> int:
        return int(self.c.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GolayPair):
            return NotImplemented
        return np.array_equal(self.c, other.c) and np.array_equal(self.s, other.s)

    def __neg__(self) -> "GolayPair":
        return GolayPair(-self.c, -self.s)


@dataclass(frozen=True)
class ComplementarityReport:
    is_complementary: bool
    worst_lag: int
    worst_value: int
    peak: int


def aperiodic_xcorr(a, b, lag: int) -> int:
    """Exact aperiodic cross-correlation ``sum_n a[n] * b[n + lag]``.

    Lags with no overlap give 0. This is the per-lag reference used to
    check every vectorised correlation in the package.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    lo = max(0, -lag)
    hi = min(a.size, b.size - lag)
    if hi <= lo:
        return 0
    return int(np.dot(a[lo:hi], b[lo + lag:hi + lag]))


def xcorr_full(a, b) -> np.ndarray:
    """All aperiodic cross-correlation lags of ``a`` against ``b``.

    Element ``i`` holds the value at lag ``i - (len(a) - 1)``, so lags run
    from ``-(len(a) - 1)`` to ``len(b) - 1``.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        return np.zeros(max(a.size + b.size - 1, 0), dtype=np.int64)
    return np.correlate(b, a, mode="full")


def generate_pair(k: int) -> GolayPair:
    """Golay pair of length ``2**k`` by repeated doubling from ``((1,), (1,))``.

    Each step maps ``(c, s)`` to ``(c + s, c + (-s))`` (concatenation).
    """
    if k < 0:
        raise ValueError(f"exponent must be non-negative, got {k}")
    if k > MAX_EXPONENT:
        raise ValueError(f"length 2**{k} exceeds the limit 2**{MAX_EXPONENT}")
    c = np.ones(1, dtype=np.int64)
    s = np.ones(1, dtype=np.int64)
    for _ in range(k):
        c, s = np.concatenate([c, s]), np.concatenate([c, -s])
    return GolayPair(c, s)


def mate(p: GolayPair) -> GolayPair:
    """Return ``(reverse(s), -reverse(c))``.

    The cross-correlations of a pair with its mate sum to zero at every lag.
    """
    return GolayPair(p.s[::-1], -p.c[::-1])


def acf_sum(p: GolayPair) -> np.ndarray:
    """Summed aperiodic autocorrelation of both halves for lags 0..N-1."""
    n = len(p)
    return (xcorr_full(p.c, p.c) + xcorr_full(p.s, p.s))[n - 1:]


def verify_complementary(p: GolayPair) -> ComplementarityReport:
    sums = acf_sum(p)
    peak = int(sums[0])
    side = sums[1:]
    if side.size == 0:
        return ComplementarityReport(True, 0, 0, peak)
    worst = int(np.argmax(np.abs(side)))
    value = int(side[worst])
    return ComplementarityReport(not np.any(side), worst + 1, value, peak)

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lssounder.channel import (
    MimoChannel, NoiseSpec, PathTap, add_awgn, apply_mimo, format_channel, parse_channel,
    random_channel, validate_delay_spread,
)
from lssounder.txchain import IqWaveform

FS = 30.72e6


def wave(x):
    return IqWaveform(np.asarray(x, dtype=float), FS, "if")


def pair(rng, n=200):
    return [wave(rng.normal(size=n)), wave(rng.normal(size=n))]


def test_identity_channel(rng):
    tx = pair(rng)
    rx = apply_mimo(MimoChannel.diagonal(), tx)
    for a, b in zip(rx, tx):
        np.testing.assert_array_equal(a.samples, b.samples)


def test_pure_delay(rng):
    tx = pair(rng)
    rx = apply_mimo(MimoChannel.diagonal(delay=7), tx)
    assert len(rx[0]) == len(tx[0]) + 7
    np.testing.assert_array_equal(rx[1].samples[7:], tx[1].samples)
    assert not rx[1].samples[:7].any()


def test_two_tap_superposition(rng):
    tx = pair(rng, 300)
    ch = MimoChannel.from_paths({(0, 0): [PathTap(0, 1.0), PathTap(100, 0.5)]})
    rx = apply_mimo(ch, tx)
    expect = np.zeros(400)
    expect[:300] += tx[0].samples
    expect[100:] += 0.5 * tx[0].samples
    np.testing.assert_allclose(rx[0].samples, expect)
    assert not rx[1].samples.any()


def test_sign_from_phase():
    assert PathTap(0, 0.5, math.pi).coefficient == -0.5
    assert PathTap(0, 0.5, 2 * math.pi).coefficient == 0.5
    with pytest.warns(UserWarning):
        PathTap(0, 0.5, 1.0).coefficient


def test_tap_validation():
    with pytest.raises(ValueError):
        PathTap(-1, 1.0)
    with pytest.raises(ValueError):
        PathTap(1.5, 1.0)
    with pytest.raises(ValueError):
        PathTap(0, 10.5)
    with pytest.raises(ValueError):
        MimoChannel(((),))


def test_input_checks(rng):
    tx = pair(rng)
    with pytest.raises(ValueError):
        apply_mimo(MimoChannel.diagonal(), tx[:1])
    with pytest.raises(ValueError):
        apply_mimo(MimoChannel.diagonal(), [tx[0], IqWaveform(tx[1].samples, 1.0)])
    with pytest.raises(ValueError):
        apply_mimo(MimoChannel.diagonal(), [tx[0], wave(np.zeros(5))])


@given(st.integers(0, 2**31 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    ch = random_channel(rng, 40, taps_per_path=3)
    x, y = pair(rng, 64), pair(rng, 64)
    mix = [wave(a * u.samples + b * v.samples) for u, v in zip(x, y)]
    lhs = apply_mimo(ch, mix)
    rx, ry = apply_mimo(ch, x), apply_mimo(ch, y)
    for l, p, q in zip(lhs, rx, ry):
        expect = a * p.samples + b * q.samples
        np.testing.assert_allclose(l.samples, expect, rtol=1e-12, atol=1e-12 * (1 + np.abs(expect).max()))


@given(st.integers(0, 2**31 - 1))
def test_superposition_across_transmitters(seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(rng, 30, taps_per_path=2)
    tx = pair(rng, 50)
    zero = wave(np.zeros(50))
    both = apply_mimo(ch, tx)
    only0 = apply_mimo(ch, [tx[0], zero])
    only1 = apply_mimo(ch, [zero, tx[1]])
    for b, p, q in zip(both, only0, only1):
        np.testing.assert_allclose(b.samples, p.samples + q.samples, atol=1e-12)


def test_noise_disabled(rng):
    w = pair(rng)[0]
    assert add_awgn(w, NoiseSpec(None)) is w
    assert add_awgn(w, NoiseSpec(math.inf)) is w


def test_noise_deterministic(rng):
    w = pair(rng)[0]
    a = add_awgn(w, NoiseSpec(10.0, seed=5)).samples
    b = add_awgn(w, NoiseSpec(10.0, seed=5)).samples
    assert a.tobytes() == b.tobytes()
    c = add_awgn(w, NoiseSpec(10.0, seed=6)).samples
    assert a.tobytes() != c.tobytes()


def test_noise_power():
    n = 1_000_000
    w = wave(np.tile([1.0, -1.0], n // 2))
    noisy = add_awgn(w, NoiseSpec(20.0, seed=1))
    power = np.mean((noisy.samples - w.samples) ** 2)
    assert power == pytest.approx(0.01, rel=0.02)


def test_noise_on_silence():
    with pytest.raises(ValueError):
        add_awgn(wave(np.zeros(10)), NoiseSpec(10.0))


def test_delay_spread_warning():
    assert validate_delay_spread(MimoChannel.diagonal(0), 4000, 4) == []
    assert validate_delay_spread(MimoChannel.diagonal(15999), 4000, 4) == []
    assert len(validate_delay_spread(MimoChannel.diagonal(16000), 4000, 4)) == 1


def test_channel_file_round_trip():
    text = """
    # rx tx delay gain [phase]
    0 0 0 1.0
    0 1 120 0.4 3.141592653589793
    1 1 4 0.8   # comment
    1 1 300 0.3
    """
    ch = parse_channel(text)
    assert ch.path(0, 1)[0].coefficient == pytest.approx(-0.4)
    assert ch.path(1, 0) == ()
    assert ch.max_delay == 300
    assert parse_channel(format_channel(ch)) == ch


@pytest.mark.parametrize("bad", ["0 0 1", "0 2 0 1.0", "0 0 x 1.0", "0 0 -3 1.0", "0 0 1 99"])
def test_channel_file_errors(bad):
    with pytest.raises(ValueError, match="line 2"):
        parse_channel("# header\n" + bad)


def test_random_channel_in_range():
    ch = random_channel(np.random.default_rng(0), 50, taps_per_path=4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for r in range(2):
            for t in range(2):
                path = ch.path(r, t)
                assert len(path) == 4
                assert all(0 <= tap.delay < 50 for tap in path)
                assert all(0.2 <= abs(tap.coefficient) <= 1.0 for tap in path)

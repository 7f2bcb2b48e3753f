import numpy as np
import pytest

from noisyvc.audio import Waveform
from noisyvc.errors import DataError
from noisyvc.mixing import fit_noise_to_length, measure_snr, mix_at_snr, snr_gain


def _unit_power(n, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    return x / np.sqrt(np.mean(x**2))


def test_equal_power_at_zero_db_gain_is_one():
    s = Waveform(0.1 * _unit_power(512, 0))
    n = Waveform(0.1 * _unit_power(512, 1))
    res = mix_at_snr(s, n, 0.0)
    assert res.gain == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(res.noisy.samples, s.samples + n.samples)


def test_gain_formula_hand_case():
    # P_s = 1, P_n = 0.25, snr = 10*log10(4): gain must be 1
    s = Waveform(np.clip(_unit_power(1024, 2), -5, 5))
    n = Waveform(np.clip(0.5 * _unit_power(1024, 3), -5, 5))
    res = mix_at_snr(s, n, 10 * np.log10(4.0))
    assert res.gain == pytest.approx(1.0, abs=1e-9)
    assert snr_gain(1.0, 0.25, 6.020599913279624) == pytest.approx(1.0, abs=1e-9)


def test_zero_noise_is_degenerate():
    s = Waveform(0.1 * _unit_power(64, 4))
    with pytest.raises(DataError, match="degenerate noise"):
        mix_at_snr(s, Waveform(np.zeros(64)), 5.0)


def test_zero_speech_is_degenerate():
    n = Waveform(0.1 * _unit_power(64, 5))
    with pytest.raises(DataError, match="degenerate speech"):
        mix_at_snr(Waveform(np.zeros(64)), n, 5.0)


def test_rate_mismatch_rejected():
    s = Waveform(0.1 * _unit_power(64, 6), 8000)
    n = Waveform(0.1 * _unit_power(64, 7), 16000)
    with pytest.raises(DataError):
        mix_at_snr(s, n, 0.0)


def test_measure_snr_identities():
    x = Waveform(0.2 * _unit_power(256, 8))
    assert measure_snr(x, x) == 0.0
    half = x.with_samples(0.5 * x.samples)
    assert measure_snr(x, half) == pytest.approx(6.0206, abs=1e-4)


def test_measure_snr_inverts_mix():
    rng = np.random.default_rng(9)
    for k in range(25):
        s = Waveform(0.2 * _unit_power(700 + k, 100 + k))
        n = Waveform(0.2 * _unit_power(900 + k, 200 + k))
        target = float(rng.uniform(-5, 30))
        res = mix_at_snr(s, n, target)
        assert abs(measure_snr(s, res.scaled_noise) - target) <= 1e-6


def test_noise_adapted_before_scaling():
    s = Waveform(0.2 * _unit_power(1000, 10))
    short = Waveform(0.2 * _unit_power(130, 11))
    res = mix_at_snr(s, short, 12.0)
    assert len(res.scaled_noise) == 1000
    assert measure_snr(s, res.scaled_noise) == pytest.approx(12.0, abs=1e-6)

    long = Waveform(0.2 * _unit_power(5000, 12))
    res = mix_at_snr(s, long, -3.0)
    assert len(res.scaled_noise) == 1000
    assert measure_snr(s, res.scaled_noise) == pytest.approx(-3.0, abs=1e-6)


def test_fit_noise_tiles_and_truncates():
    noise = np.arange(5, dtype=float)
    assert np.array_equal(fit_noise_to_length(noise, 3), [0, 1, 2])
    assert np.array_equal(fit_noise_to_length(noise, 8), [0, 1, 2, 3, 4, 0, 1, 2])


def test_clipping_flag_and_no_renormalization():
    s = Waveform(np.full(64, 0.9))
    n = Waveform(0.5 * _unit_power(64, 13))
    res = mix_at_snr(s, n, -5.0)
    assert res.clipped
    assert np.abs(res.noisy.samples).max() > 1.0  # mixture is left unnormalized


def test_separation_closure_is_bitwise_for_float64():
    rng = np.random.default_rng(14)
    for _ in range(20):
        y = rng.uniform(-1, 1, 333)
        d = rng.uniform(-1, 1, 333)
        n = y - d
        assert np.abs((d + n) - y).max() < 1e-7

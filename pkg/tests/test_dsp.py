import numpy as np
import pytest

from noisyvc import dsp
from noisyvc.audio import Waveform
from noisyvc.config import RunConfig
from noisyvc.errors import DataError

CFG = RunConfig()


# ---------------------------------------------------------------------------
# STFT / iSTFT

@pytest.mark.parametrize("length", [256, 512, 2048, 8000, 300, 999, 12345])
def test_stft_round_trip(length):
    rng = np.random.default_rng(length)
    x = Waveform(rng.uniform(-0.8, 0.8, length))
    rec = dsp.istft(dsp.stft(x, CFG))
    assert rec.shape == x.samples.shape
    assert np.abs(rec - x.samples).max() < 1e-6


def test_stft_shapes():
    x = Waveform(np.random.default_rng(0).uniform(-0.5, 0.5, 4000))
    spec = dsp.stft(x, CFG)
    assert spec.frames.shape[1] == CFG.fft_size // 2 + 1
    assert spec.frame_length == 256 and spec.hop_length == 64


# ---------------------------------------------------------------------------
# log-mel

def test_log_mel_frame_count_formula():
    for t in (256, 300, 1000, 8000):
        x = Waveform(np.random.default_rng(t).uniform(-0.5, 0.5, t))
        mel = dsp.log_mel(x, CFG)
        assert mel.frames.shape == ((t - 256) // 64 + 1, 40)


def test_log_mel_rejects_short_input():
    with pytest.raises(DataError, match="shorter than one frame"):
        dsp.log_mel(Waveform(np.zeros(100) + 0.1), CFG)


def test_log_mel_zeros_hit_floor():
    mel = dsp.log_mel(Waveform(np.zeros(1000)), CFG)
    assert np.all(mel.frames == np.log(CFG.mel_floor))


@pytest.mark.parametrize("band", [5, 10, 20, 30, 38])
def test_sine_at_band_center_peaks_in_that_band(band):
    # band centers recomputed here from the filterbank definition
    mel_points = np.linspace(0.0, dsp.hz_to_mel(CFG.sample_rate / 2), CFG.mel_bands + 2)
    center_hz = float(dsp.mel_to_hz(mel_points[band + 1]))
    t = np.arange(8000) / CFG.sample_rate
    x = Waveform(0.3 * np.sin(2 * np.pi * center_hz * t))
    mel = dsp.log_mel(x, CFG)
    assert np.all(np.argmax(mel.frames, axis=1) == band)


def test_doubling_amplitude_adds_log2_above_floor():
    rng = np.random.default_rng(3)
    x = rng.uniform(-0.4, 0.4, 2000)
    m1 = dsp.log_mel(Waveform(x), CFG).frames
    m2 = dsp.log_mel(Waveform(2 * x), CFG).frames
    above = m1 > np.log(CFG.mel_floor) + 1.0
    assert np.allclose(m2[above] - m1[above], np.log(2.0), atol=1e-9)


def test_filterbank_rows_cover_every_band():
    fb = dsp.mel_filterbank(CFG)
    assert fb.shape == (40, 129)
    assert np.all(fb.sum(axis=1) > 0)


# ---------------------------------------------------------------------------
# cepstra

def test_zero_input_gives_zero_cepstra():
    ceps = dsp.mel_cepstra(Waveform(np.zeros(1000)), CFG)
    assert ceps.frames.shape == (12, CFG.cepstral_order)
    assert not ceps.includes_c0
    assert np.allclose(ceps.frames, 0.0)


def test_amplitude_scaling_moves_only_c0():
    # scaling the waveform shifts every log-mel bin equally; the DCT of a
    # constant shift lands entirely in c0, which is dropped
    rng = np.random.default_rng(9)
    x = rng.uniform(-0.3, 0.3, 3000)
    a = dsp.mel_cepstra(Waveform(x), CFG).frames
    b = dsp.mel_cepstra(Waveform(1.7 * x), CFG).frames
    floor_free = np.all(dsp.log_mel(Waveform(x), CFG).frames > np.log(CFG.mel_floor), axis=1)
    assert np.abs(a[floor_free] - b[floor_free]).max() < 1e-9


def test_cepstra_match_direct_dct_on_seeded_frame():
    rng = np.random.default_rng(11)
    x = rng.uniform(-0.4, 0.4, 1000)
    mel = dsp.log_mel(Waveform(x), CFG).frames
    # independent DCT-II (orthonormal) evaluation
    m = mel.shape[1]
    k = np.arange(m)
    basis = np.cos(np.pi * (2 * k[None, :] + 1) * k[:, None] / (2 * m))
    scale = np.full(m, np.sqrt(2.0 / m))
    scale[0] = np.sqrt(1.0 / m)
    direct = (basis * scale[:, None]) @ mel[0]
    got = dsp.mel_cepstra(Waveform(x), CFG).frames[0]
    assert np.allclose(got, direct[1 : CFG.cepstral_order + 1], atol=1e-9)


def test_cepstral_sequence_validation():
    with pytest.raises(DataError):
        dsp.CepstralSequence(np.zeros((0, 3)), False)
    with pytest.raises(DataError):
        dsp.CepstralSequence(np.full((2, 3), np.nan), False)


# ---------------------------------------------------------------------------
# mu-law

def test_mu_law_fixed_points():
    classes = dsp.mu_law_encode(np.array([0.0, 1.0, -1.0]))
    assert classes.tolist() == [128, 255, 0]
    assert dsp.mu_law_decode(np.array([128]))[0] == 0.0


def test_mu_law_symmetry_about_center():
    up = dsp.mu_law_decode(np.array([129, 140, 200]))
    down = dsp.mu_law_decode(np.array([127, 116, 56]))
    assert np.allclose(up, -down)


def test_mu_law_round_trip_within_cell_width():
    # exhaustive sweep; per-cell widths computed from the companding law
    levels = 256
    mu = levels - 1
    edges_y = 2.0 * np.arange(levels + 1) / levels - 1.0
    edges_x = np.sign(edges_y) * (np.power(1.0 + mu, np.abs(edges_y)) - 1.0) / mu
    widths = np.diff(edges_x)

    x = np.linspace(-1.0, 1.0, 10_000)
    classes = dsp.mu_law_encode(x, levels)
    back = dsp.mu_law_decode(classes, levels)
    assert np.all(np.abs(back - x) <= widths[classes] + 1e-12)
    assert np.abs(back - x).max() <= widths.max() + 1e-12


def test_mu_law_clamps_out_of_range():
    classes = dsp.mu_law_encode(np.array([2.0, -3.0]))
    assert classes.tolist() == [255, 0]

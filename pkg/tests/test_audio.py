import wave

import numpy as np
import pytest

from noisyvc.audio import Waveform, read_wav, require_same_rate, write_wav
from noisyvc.errors import DataError


def test_waveform_rejects_empty_and_nonfinite():
    with pytest.raises(DataError):
        Waveform(np.array([]))
    with pytest.raises(DataError):
        Waveform(np.array([0.1, np.nan]))
    with pytest.raises(DataError):
        Waveform(np.array([0.1, np.inf]))
    with pytest.raises(DataError):
        Waveform(np.zeros((2, 3)))


def test_waveform_rejects_bad_rate():
    with pytest.raises(DataError):
        Waveform(np.zeros(4), sample_rate=0)


def test_power_is_mean_square():
    w = Waveform(np.array([0.5, -0.5, 0.5, -0.5]))
    assert w.power() == pytest.approx(0.25)


def test_require_same_rate():
    a = Waveform(np.zeros(4) + 0.1, 8000)
    b = Waveform(np.zeros(4) + 0.1, 16000)
    with pytest.raises(DataError, match="sample rates differ"):
        require_same_rate(a, b)


def test_wav_round_trip_is_byte_stable(tmp_path):
    rng = np.random.default_rng(0)
    w = Waveform(rng.uniform(-0.9, 0.9, 1234))
    p1, p2 = tmp_path / "a.wav", tmp_path / "b.wav"
    write_wav(p1, w)
    back = read_wav(p1)
    assert len(back) == len(w)
    assert np.abs(back.samples - w.samples).max() <= 1.0 / 32767 + 1e-12
    write_wav(p2, back)
    assert p1.read_bytes() == p2.read_bytes()


def test_reader_rejects_wrong_rate(tmp_path):
    w = Waveform(np.zeros(100) + 0.1, sample_rate=44100)
    path = tmp_path / "hi.wav"
    write_wav(path, w)
    with pytest.raises(DataError, match="8000"):
        read_wav(path, expected_rate=8000)


def test_reader_rejects_stereo_and_wrong_width(tmp_path):
    stereo = tmp_path / "stereo.wav"
    with wave.open(str(stereo), "wb") as fh:
        fh.setnchannels(2)
        fh.setsampwidth(2)
        fh.setframerate(8000)
        fh.writeframes(b"\x00\x00" * 64)
    with pytest.raises(DataError, match="mono"):
        read_wav(stereo)

    wide = tmp_path / "wide.wav"
    with wave.open(str(wide), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(4)
        fh.setframerate(8000)
        fh.writeframes(b"\x00\x00\x00\x00" * 32)
    with pytest.raises(DataError, match="16-bit"):
        read_wav(wide)


def test_reader_rejects_non_wav(tmp_path):
    junk = tmp_path / "junk.wav"
    junk.write_bytes(b"not a wav at all")
    with pytest.raises(DataError):
        read_wav(junk)


def test_write_clamps_out_of_range(tmp_path):
    w = Waveform(np.array([1.5, -1.5, 0.0]))
    path = tmp_path / "c.wav"
    write_wav(path, w)
    back = read_wav(path)
    assert back.samples.max() <= 1.0
    assert back.samples.min() >= -1.0001

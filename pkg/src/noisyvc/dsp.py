"""Deterministic signal primitives: STFT/iSTFT, log-mel analysis, mel
cepstra, and mu-law companding.

All functions are pure; there is no shared state. STFT analysis pads
internally so that inverse synthesis reconstructs the input exactly; mel
analysis uses no padding, so a length-T input yields
floor((T - frame_length) / hop_length) + 1 frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .audio import Waveform
from .config import RunConfig
from .errors import DataError


def hann_window(length: int) -> np.ndarray:
    """Periodic Hann window; sums of squares over hop = length/4 shifts are flat."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(length) / length)


@dataclass(frozen=True)
class ComplexSpectrogram:
    """Complex STFT frames (F x K) plus the analysis geometry."""

    frames: np.ndarray
    frame_length: int
    hop_length: int
    window: str = "hann"
    num_samples: int = 0  # original waveform length, for exact inversion


@dataclass(frozen=True)
class MelSpectrogram:
    """Natural-log mel magnitudes, F x M; entries floored at a fixed epsilon."""

    frames: np.ndarray
    mel_bands: int
    hop_length: int


@dataclass(frozen=True)
class CepstralSequence:
    """Mel-cepstral coefficient frames (F x D)."""

    frames: np.ndarray
    includes_c0: bool

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] < 1:
            raise DataError("cepstral sequence must be a non-empty F x D matrix")
        if not np.all(np.isfinite(frames)):
            raise DataError("cepstral sequence contains non-finite entries")
        object.__setattr__(self, "frames", frames)


def _stft_padding(num_samples: int, frame_length: int, hop_length: int) -> tuple[int, int]:
    # pad a full frame on each side so every input sample sees the complete
    # set of overlapping windows, then round up so frames tile the signal
    pad_left = frame_length
    pad_right = frame_length + (-num_samples) % hop_length
    return pad_left, pad_right


def stft(x: Waveform, config: RunConfig) -> ComplexSpectrogram:
    """Windowed STFT with internal padding chosen for exact inversion."""
    frame, hop, nfft = config.frame_length, config.hop_length, config.fft_size
    samples = x.samples
    pad_left, pad_right = _stft_padding(samples.size, frame, hop)
    padded = np.concatenate([np.zeros(pad_left), samples, np.zeros(pad_right)])
    n_frames = (padded.size - frame) // hop + 1
    idx = np.arange(frame)[None, :] + hop * np.arange(n_frames)[:, None]
    windowed = padded[idx] * hann_window(frame)[None, :]
    frames = np.fft.rfft(windowed, n=nfft, axis=1)
    return ComplexSpectrogram(frames, frame, hop, "hann", samples.size)


def istft(spec: ComplexSpectrogram, num_samples: int | None = None) -> np.ndarray:
    """Weighted overlap-add inverse of :func:`stft`."""
    frame, hop = spec.frame_length, spec.hop_length
    if num_samples is None:
        num_samples = spec.num_samples
    window = hann_window(frame)
    segments = np.fft.irfft(spec.frames, axis=1)[:, :frame] * window[None, :]
    n_frames = segments.shape[0]
    total = frame + hop * (n_frames - 1)
    out = np.zeros(total)
    norm = np.zeros(total)
    for i in range(n_frames):
        out[i * hop : i * hop + frame] += segments[i]
        norm[i * hop : i * hop + frame] += window**2
    out = out / np.maximum(norm, 1e-12)
    pad_left, _ = _stft_padding(num_samples, frame, hop)
    return out[pad_left : pad_left + num_samples]


def mel_filterbank(config: RunConfig) -> np.ndarray:
    """Triangular mel filterbank, HTK-style spacing, peak amplitude 1.

    Returns an (mel_bands, fft_size // 2 + 1) weight matrix.
    """
    n_bins = config.fft_size // 2 + 1
    f_max = config.sample_rate / 2.0
    mel_points = np.linspace(hz_to_mel(0.0), hz_to_mel(f_max), config.mel_bands + 2)
    hz_points = mel_to_hz(mel_points)
    bin_freqs = np.arange(n_bins) * config.sample_rate / config.fft_size
    weights = np.zeros((config.mel_bands, n_bins))
    for m in range(config.mel_bands):
        lower, center, upper = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        rising = (bin_freqs - lower) / (center - lower)
        falling = (upper - bin_freqs) / (upper - center)
        weights[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    return weights


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def frame_count(num_samples: int, config: RunConfig) -> int:
    """Frames produced by unpadded analysis of a length-T input."""
    return (num_samples - config.frame_length) // config.hop_length + 1


def log_mel(x: Waveform, config: RunConfig) -> MelSpectrogram:
    """Magnitude STFT -> triangular mel filterbank -> natural log with floor.

    Uses no padding or centering: frame i covers samples
    [i * hop_length, i * hop_length + frame_length).
    """
    frame, hop = config.frame_length, config.hop_length
    samples = x.samples
    if samples.size < frame:
        raise DataError(f"input of {samples.size} samples is shorter than one frame ({frame})")
    n_frames = frame_count(samples.size, config)
    idx = np.arange(frame)[None, :] + hop * np.arange(n_frames)[:, None]
    windowed = samples[idx] * hann_window(frame)[None, :]
    magnitude = np.abs(np.fft.rfft(windowed, n=config.fft_size, axis=1))
    mel = magnitude @ mel_filterbank(config).T
    return MelSpectrogram(np.log(np.maximum(mel, config.mel_floor)), config.mel_bands, hop)


def mel_cepstra(x: Waveform, config: RunConfig) -> CepstralSequence:
    """DCT-II of log-mel frames, keeping coefficients 1..cepstral_order (c0 dropped)."""
    mel = log_mel(x, config)
    order = config.cepstral_order
    if order < 1 or order >= config.mel_bands:
        raise DataError("cepstral_order must be in [1, mel_bands)")
    cepstra = scipy.fft.dct(mel.frames, type=2, norm="ortho", axis=1)
    return CepstralSequence(cepstra[:, 1 : order + 1], includes_c0=False)


def mu_law_encode(x: Waveform | np.ndarray, levels: int = 256) -> np.ndarray:
    """Mu-law compand samples (clamped to [-1, 1]) into integer classes.

    0.0 maps to the center class levels/2; -1.0 and 1.0 map to the end
    classes 0 and levels-1.
    """
    samples = x.samples if isinstance(x, Waveform) else np.asarray(x, dtype=np.float64)
    mu = levels - 1
    clamped = np.clip(samples, -1.0, 1.0)
    companded = np.sign(clamped) * np.log1p(mu * np.abs(clamped)) / np.log1p(mu)
    classes = np.floor((companded + 1.0) / 2.0 * levels).astype(np.int64)
    return np.minimum(classes, levels - 1)


def mu_law_decode(classes: np.ndarray, levels: int = 256) -> np.ndarray:
    """Inverse companding; decodes each class to the lower edge of its cell,
    so the center class levels/2 decodes to exactly 0.0."""
    mu = levels - 1
    companded = 2.0 * np.asarray(classes, dtype=np.float64) / levels - 1.0
    return np.sign(companded) * (np.power(1.0 + mu, np.abs(companded)) - 1.0) / mu

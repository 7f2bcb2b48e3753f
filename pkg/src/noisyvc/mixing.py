"""SNR-controlled mixing of speech and noise waveforms.

Power is mean squared amplitude over the full clip. Mixtures are never
renormalized; clipping beyond [-1, 1] is permitted and reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import Waveform, require_same_rate
from .errors import DataError


@dataclass(frozen=True)
class MixResult:
    noisy: Waveform
    scaled_noise: Waveform
    gain: float
    clipped: bool


def fit_noise_to_length(noise: np.ndarray, length: int) -> np.ndarray:
    """Deterministically tile or truncate a noise array to ``length`` samples."""
    if noise.size >= length:
        return noise[:length]
    reps = int(np.ceil(length / noise.size))
    return np.tile(noise, reps)[:length]


def snr_gain(speech_power: float, noise_power: float, snr_db: float) -> float:
    """Gain g with 10*log10(P_speech / (g^2 * P_noise)) = snr_db."""
    return float(np.sqrt(speech_power / (noise_power * 10.0 ** (snr_db / 10.0))))


def mix_at_snr(speech: Waveform, noise: Waveform, snr_db: float) -> MixResult:
    """Scale ``noise`` so the mixture sits at ``snr_db`` and add it to ``speech``.

    Noise is tiled or truncated to the speech length before its power is
    measured, so the requested SNR holds exactly over the returned clips.
    """
    require_same_rate(speech, noise)
    fitted = fit_noise_to_length(noise.samples, len(speech))
    speech_power = speech.power()
    noise_power = float(np.mean(fitted**2))
    if noise_power == 0.0:
        raise DataError("degenerate noise: zero power")
    if speech_power == 0.0:
        raise DataError("degenerate speech: zero power")
    gain = snr_gain(speech_power, noise_power, snr_db)
    scaled = gain * fitted
    noisy = speech.samples + scaled
    clipped = bool(np.any(np.abs(noisy) > 1.0))
    return MixResult(
        noisy=Waveform(noisy, speech.sample_rate),
        scaled_noise=Waveform(scaled, speech.sample_rate),
        gain=gain,
        clipped=clipped,
    )


def measure_snr(speech: Waveform, noise: Waveform) -> float:
    """Signal-to-noise ratio 10*log10(P_speech / P_noise) in dB."""
    require_same_rate(speech, noise)
    if len(speech) != len(noise):
        raise DataError("speech and noise lengths differ")
    ps, pn = speech.power(), noise.power()
    if ps == 0.0:
        raise DataError("degenerate speech: zero power")
    if pn == 0.0:
        raise DataError("degenerate noise: zero power")
    return float(10.0 * np.log10(ps / pn))

"""Waveform container and 16-bit PCM WAV I/O.

Waveforms are mono float64 arrays with nominal range [-1, 1]. The WAV
interchange format is fixed: 16-bit PCM, mono, little-endian; the reader
rejects anything else with a precise error.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

PCM_SCALE = 32767.0


@dataclass(frozen=True)
class Waveform:
    """Mono audio clip: samples in [-1, 1] (nominal) at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int = 8000

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise DataError("waveform must be a non-empty 1-D array")
        if not np.all(np.isfinite(samples)):
            raise DataError("waveform contains non-finite samples")
        if self.sample_rate <= 0:
            raise DataError("sample rate must be a positive integer")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def power(self) -> float:
        """Mean squared amplitude over the full clip."""
        return float(np.mean(self.samples**2))

    def with_samples(self, samples: np.ndarray) -> "Waveform":
        return Waveform(samples, self.sample_rate)


def require_same_rate(*waveforms: Waveform) -> int:
    rates = {w.sample_rate for w in waveforms}
    if len(rates) != 1:
        raise DataError(f"sample rates differ: {sorted(rates)}")
    return rates.pop()


def read_wav(path: str | Path, expected_rate: int | None = 8000) -> Waveform:
    """Read a 16-bit PCM mono WAV file.

    Rejects non-PCM encodings, multi-channel files, sample widths other
    than 16 bits, and (unless ``expected_rate`` is None) other sample rates.
    """
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wf:
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            comptype = wf.getcomptype()
            n = wf.getnframes()
            raw = wf.readframes(n)
    except wave.Error as exc:
        raise DataError(f"{path}: not a readable PCM WAV file ({exc})") from exc
    if comptype != "NONE":
        raise DataError(f"{path}: compressed WAV ({comptype}) not supported; need PCM")
    if channels != 1:
        raise DataError(f"{path}: {channels} channels; only mono is supported")
    if width != 2:
        raise DataError(f"{path}: {8 * width}-bit samples; only 16-bit PCM is supported")
    if expected_rate is not None and rate != expected_rate:
        raise DataError(f"{path}: sample rate {rate} Hz; pipeline requires {expected_rate} Hz")
    ints = np.frombuffer(raw, dtype="<i2")
    if ints.size < 1:
        raise DataError(f"{path}: empty WAV file")
    return Waveform(ints.astype(np.float64) / PCM_SCALE, rate)


def write_wav(path: str | Path, waveform: Waveform) -> None:
    """Write a waveform as 16-bit PCM mono, clamping to [-1, 1]."""
    clipped = np.clip(waveform.samples, -1.0, 1.0)
    ints = np.round(clipped * PCM_SCALE).astype("<i2")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(waveform.sample_rate)
        wf.writeframes(ints.tobytes())

"""Run configuration: one flat key-value schema shared by every module.

All analysis parameters default to values chosen for 8 kHz audio. A config
can be loaded from a flat ``key = value`` text file and is serialized
canonically so its SHA-256 hash identifies a run; the hash is embedded in
checkpoints and reports.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError


@dataclass
class RunConfig:
    # signal analysis (8 kHz defaults)
    sample_rate: int = 8000
    frame_length: int = 256
    hop_length: int = 64
    fft_size: int = 256
    mel_bands: int = 40
    cepstral_order: int = 24
    mel_floor: float = 1e-10
    eps_div: float = 1e-8
    metric_cap_db: float = 60.0
    mulaw_levels: int = 256

    # denoiser
    denoiser_channels: tuple[int, ...] = (16, 32, 32, 64)
    denoiser_rnn_width: int = 64
    denoiser_lr: float = 1e-3
    denoiser_batch: int = 4
    denoiser_crop_seconds: float = 1.0

    # VQ-VAE conversion model
    vq_codebook_size: int = 64
    vq_dim: int = 32
    vq_commitment: float = 0.25
    vq_ema_decay: float = 0.99
    encoder_channels: int = 64
    encoder_stride: int = 2
    speaker_dim: int = 16
    cond_channels: int = 48
    noise_cond_dim: int = 16
    sample_embed_dim: int = 32
    decoder_rnn_width: int = 128
    vc_lr: float = 1e-3
    vc_batch: int = 2
    vc_crop_frames: int = 8  # mel frames per training crop (x hop_length samples)

    # corpus construction
    train_snr_grid: tuple[float, ...] = (6, 8, 10, 12, 14, 16, 18, 20)
    eval_snr_grid: tuple[float, ...] = (-5, 0, 5, 10, 15, 20, 25, 30)
    seed: int = 1

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise DataError("sample_rate must be positive")
        if self.frame_length % self.hop_length != 0:
            raise DataError("frame_length must be a multiple of hop_length")
        if self.fft_size < self.frame_length:
            raise DataError("fft_size must be >= frame_length")
        if not self.train_snr_grid or not self.eval_snr_grid:
            raise DataError("SNR grids must be non-empty")

    def to_text(self) -> str:
        """Canonical flat key = value serialization (sorted keys)."""
        lines = []
        for f in sorted(dataclasses.fields(self), key=lambda f: f.name):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        overrides = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            overrides[key] = value
        return cls.from_overrides(overrides)

    @classmethod
    def from_overrides(cls, overrides: dict[str, str]) -> "RunConfig":
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in overrides.items():
            if key not in fields:
                raise DataError(f"unknown config key: {key!r}")
            kwargs[key] = _parse_value(value, fields[key].type)
        return cls(**kwargs)


def _format_value(value):
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(text: str, type_name: str):
    if type_name.startswith("tuple[int"):
        return tuple(int(v) for v in text.split(",") if v.strip())
    if type_name.startswith("tuple[float"):
        return tuple(float(v) for v in text.split(",") if v.strip())
    if type_name == "int":
        return int(text)
    if type_name == "float":
        return float(text)
    return text

"""Conversion modes over trained denoiser + VQ-VAE checkpoints.

direct    one-stage noisy output: decoder conditioned on the separated noise
clean     noise condition replaced by an all-floor zero sequence
indirect  clean output plus the separated noise, added sample-wise
baseline  baseline-variant model over the denoised speech, with optional
          noise superposition afterwards

Every mode is seeded and deterministic; each call owns its decoder state.
"""

from __future__ import annotations

from dataclasses import dataclass

from .audio import Waveform
from .denoiser import DenoiserModel, SeparationResult, separate
from .dsp import log_mel
from .errors import DataError
from .vqvae import (
    BASELINE,
    NOISE_CONDITIONED,
    NoiseCondition,
    VQVAEModel,
    generate_waveform,
)


@dataclass
class ConversionModels:
    vc: VQVAEModel
    denoiser: DenoiserModel | None = None

    def separation(self, y: Waveform, override: SeparationResult | None) -> SeparationResult:
        if override is not None:
            return override
        if self.denoiser is None:
            raise DataError("no denoiser available and no separation supplied")
        return separate(self.denoiser, y)


def _require_variant(model: VQVAEModel, variant: str, mode: str) -> None:
    if model.variant != variant:
        raise DataError(f"mode {mode!r} needs a {variant} model, got {model.variant}")


def convert_direct(models: ConversionModels, y: Waveform, target_speaker: str,
                   seed: int = 0, separation: SeparationResult | None = None) -> Waveform:
    """Generate noisy converted speech in one stage, conditioned on the
    separated noise."""
    _require_variant(models.vc, NOISE_CONDITIONED, "direct")
    sep = models.separation(y, separation)
    mel = log_mel(sep.d, models.vc.config).frames
    condition = NoiseCondition.from_noise(sep.n, models.vc.config)
    return generate_waveform(models.vc, mel, condition, target_speaker,
                             len(y), seed, y.sample_rate)


def convert_clean(models: ConversionModels, y: Waveform, target_speaker: str,
                  seed: int = 0, separation: SeparationResult | None = None) -> Waveform:
    """Generate clean converted speech: the noise condition is a zero sequence."""
    _require_variant(models.vc, NOISE_CONDITIONED, "clean")
    sep = models.separation(y, separation)
    mel = log_mel(sep.d, models.vc.config).frames
    condition = NoiseCondition.zeros(len(y), models.vc.config, y.sample_rate)
    return generate_waveform(models.vc, mel, condition, target_speaker,
                             len(y), seed, y.sample_rate)


def convert_indirect(models: ConversionModels, y: Waveform, target_speaker: str,
                     seed: int = 0, separation: SeparationResult | None = None) -> Waveform:
    """Clean conversion plus the separated noise, added sample-wise."""
    sep = models.separation(y, separation)
    clean = convert_clean(models, y, target_speaker, seed, sep)
    return Waveform(clean.samples + sep.n.samples, y.sample_rate)


def convert_baseline(models: ConversionModels, y: Waveform, target_speaker: str,
                     superimpose: bool = False, seed: int = 0,
                     separation: SeparationResult | None = None) -> Waveform:
    """Convert the denoised speech with the baseline model; optionally add
    the separated noise to the result."""
    _require_variant(models.vc, BASELINE, "baseline")
    sep = models.separation(y, separation)
    mel = log_mel(sep.d, models.vc.config).frames
    out = generate_waveform(models.vc, mel, None, target_speaker,
                            len(y), seed, y.sample_rate)
    if superimpose:
        out = Waveform(out.samples + sep.n.samples, y.sample_rate)
    return out


MODES = {
    "direct": convert_direct,
    "clean": convert_clean,
    "indirect": convert_indirect,
}


def convert(models: ConversionModels, y: Waveform, target_speaker: str, mode: str,
            superimpose: bool = False, seed: int = 0,
            separation: SeparationResult | None = None) -> Waveform:
    """Dispatch by mode name; see the module docstring for the modes."""
    if mode == "baseline":
        return convert_baseline(models, y, target_speaker, superimpose, seed, separation)
    if mode in MODES:
        return MODES[mode](models, y, target_speaker, seed, separation)
    raise DataError(f"unknown conversion mode {mode!r}")

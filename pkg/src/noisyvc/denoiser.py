"""Complex-spectrum masking denoiser and the time-domain separation step.

The model is a reduced complex convolutional recurrent network: a complex
conv encoder over STFT frames, one complex LSTM bottleneck, and a complex
deconv decoder with skip connections that emits a bounded complex ratio
mask. Separation is exact by construction: the noise estimate is the
time-domain residual y - d.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .audio import Waveform, read_wav
from .complex_nn import (
    ComplexBatchNorm2d,
    ComplexConv2d,
    ComplexConvTranspose2d,
    ComplexLinear,
    ComplexLSTM,
    ComplexPReLU,
)
from .config import RunConfig
from .dataset import MixManifestEntry, mixture_path
from .errors import DataError, NumericalAbort
from .metrics import sd_sdr_loss

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class SeparationResult:
    """Noisy input y, denoised speech d, and separated noise n = y - d."""

    y: Waveform
    d: Waveform
    n: Waveform

    def __post_init__(self):
        if not (len(self.y) == len(self.d) == len(self.n)):
            raise DataError("separation components must have equal lengths")
        residual = np.max(np.abs(self.y.samples - self.d.samples - self.n.samples))
        if residual > 1e-7:
            raise DataError(f"separation identity violated: max |y - d - n| = {residual:.3g}")


# ---------------------------------------------------------------------------
# differentiable STFT (mirrors the numpy analysis in dsp.py)

def torch_hann(frame_length: int, device=None) -> torch.Tensor:
    n = torch.arange(frame_length, dtype=torch.float32, device=device)
    return 0.5 - 0.5 * torch.cos(2.0 * torch.pi * n / frame_length)


def torch_stft(x: torch.Tensor, frame: int, hop: int, nfft: int) -> torch.Tensor:
    """(B, T) -> complex (B, F, K) with the same padding scheme as dsp.stft."""
    pad_left = frame
    pad_right = frame + (-x.shape[-1]) % hop
    padded = F.pad(x, (pad_left, pad_right))
    frames = padded.unfold(-1, frame, hop) * torch_hann(frame, x.device)
    return torch.fft.rfft(frames, n=nfft, dim=-1)


def torch_istft(spec: torch.Tensor, frame: int, hop: int, length: int) -> torch.Tensor:
    """Inverse of :func:`torch_stft`, trimmed back to ``length`` samples."""
    window = torch_hann(frame, spec.device)
    segments = torch.fft.irfft(spec, dim=-1)[..., :frame] * window
    b, n_frames, _ = segments.shape
    total = frame + hop * (n_frames - 1)
    cols = segments.permute(0, 2, 1)  # (B, frame, F)
    out = F.fold(cols, output_size=(1, total), kernel_size=(1, frame), stride=(1, hop))
    wsq = (window**2).expand(n_frames, frame).T.unsqueeze(0)
    norm = F.fold(wsq, output_size=(1, total), kernel_size=(1, frame), stride=(1, hop))
    out = out / torch.clamp(norm, min=1e-12)
    return out.reshape(b, total)[:, frame : frame + length]


class DenoiserModel(nn.Module):
    """Reduced complex conv-recurrent masking network over 128 STFT bins."""

    def __init__(self, config: RunConfig):
        super().__init__()
        self.config = config
        self.frame = config.frame_length
        self.hop = config.hop_length
        self.nfft = config.fft_size
        n_freq = self.nfft // 2  # DC bin is dropped before the conv stack

        widths = list(config.denoiser_channels)
        self.enc_convs = nn.ModuleList()
        self.enc_norms = nn.ModuleList()
        self.enc_acts = nn.ModuleList()
        in_ch = 1
        freq = n_freq
        for w in widths:
            self.enc_convs.append(ComplexConv2d(in_ch, w, (5, 1), (2, 1), (2, 0)))
            self.enc_norms.append(ComplexBatchNorm2d(w))
            self.enc_acts.append(ComplexPReLU())
            in_ch = w
            freq //= 2

        rnn_in = widths[-1] * freq
        self.rnn = ComplexLSTM(rnn_in, config.denoiser_rnn_width)
        self.rnn_proj = ComplexLinear(config.denoiser_rnn_width, rnn_in)
        self.bottleneck_freq = freq

        dec_widths = widths[-2::-1] + [1]
        self.dec_convs = nn.ModuleList()
        self.dec_norms = nn.ModuleList()
        self.dec_acts = nn.ModuleList()
        in_ch = widths[-1]
        for k, w in enumerate(dec_widths):
            self.dec_convs.append(
                ComplexConvTranspose2d(in_ch * 2, w, (5, 1), (2, 1), (2, 0), (1, 0))
            )
            last = k == len(dec_widths) - 1
            self.dec_norms.append(None if last else ComplexBatchNorm2d(w))
            self.dec_acts.append(None if last else ComplexPReLU())
            in_ch = w
        # zero-init the mask head: an untrained model outputs d = 0, n = y
        mask_head = self.dec_convs[-1]
        for conv in (mask_head.re, mask_head.im):
            nn.init.zeros_(conv.weight)
            nn.init.zeros_(conv.bias)

    def forward(self, wav: torch.Tensor) -> torch.Tensor:
        """Denoise a (B, T) batch; output has the same shape."""
        length = wav.shape[-1]
        spec = torch_stft(wav, self.frame, self.hop, self.nfft)  # (B, F, K)
        full_r, full_i = spec.real, spec.imag
        xr = full_r[:, :, 1:].permute(0, 2, 1).unsqueeze(1)  # (B, 1, freq, T)
        xi = full_i[:, :, 1:].permute(0, 2, 1).unsqueeze(1)

        skips = []
        for conv, norm, act in zip(self.enc_convs, self.enc_norms, self.enc_acts):
            xr, xi = conv(xr, xi)
            xr, xi = norm(xr, xi)
            xr, xi = act(xr, xi)
            skips.append((xr, xi))

        b, c, freq, t = xr.shape
        fr = xr.permute(0, 3, 1, 2).reshape(b, t, c * freq)
        fi = xi.permute(0, 3, 1, 2).reshape(b, t, c * freq)
        hr, hi = self.rnn(fr, fi)
        gr, gi = self.rnn_proj(hr, hi)
        xr = gr.reshape(b, t, c, freq).permute(0, 2, 3, 1)
        xi = gi.reshape(b, t, c, freq).permute(0, 2, 3, 1)

        for k, (conv, norm, act) in enumerate(zip(self.dec_convs, self.dec_norms, self.dec_acts)):
            sr, si = skips[-1 - k]
            xr = torch.cat([xr, sr], dim=1)
            xi = torch.cat([xi, si], dim=1)
            xr, xi = conv(xr, xi)
            if norm is not None:
                xr, xi = norm(xr, xi)
                xr, xi = act(xr, xi)

        mask_r = xr.squeeze(1).permute(0, 2, 1)  # (B, F, freq)
        mask_i = xi.squeeze(1).permute(0, 2, 1)
        mag = torch.sqrt(mask_r**2 + mask_i**2 + 1e-12)
        bounded = torch.tanh(mag) / mag
        mask = torch.complex(mask_r * bounded, mask_i * bounded)
        masked = spec[:, :, 1:] * mask
        # DC bin gets a zero mask
        dc = torch.zeros_like(spec[:, :, :1])
        enhanced = torch.cat([dc, masked], dim=2)
        return torch_istft(enhanced, self.frame, self.hop, length)


def denoise(model: DenoiserModel, y: Waveform) -> Waveform:
    """Run the model in inference mode on one waveform."""
    if len(y) < model.frame:
        raise DataError(f"input of {len(y)} samples is shorter than one frame ({model.frame})")
    model.eval()
    with torch.no_grad():
        wav = torch.from_numpy(y.samples).float().unsqueeze(0)
        out = model(wav)[0].double().numpy()
    return Waveform(out, y.sample_rate)


def separate(model: DenoiserModel, y: Waveform) -> SeparationResult:
    """Split y into denoised speech d and residual noise n = y - d."""
    d = denoise(model, y)
    n = y.samples - d.samples
    return SeparationResult(y=y, d=d, n=Waveform(n, y.sample_rate))


# ---------------------------------------------------------------------------
# training

@dataclass
class TrainResult:
    model: DenoiserModel
    curves: list[dict]
    best_valid_loss: float


def _load_pairs(entries: list[MixManifestEntry], corpus_dir: Path, config: RunConfig):
    pairs = []
    for entry in entries:
        subdir = entry.split if entry.split == "train" else f"eval_snr{entry.snr_db:+g}"
        mix = read_wav(mixture_path(corpus_dir, subdir, entry.utterance_id), config.sample_rate)
        speech = read_wav(entry.speech_path, config.sample_rate)
        pairs.append((
            torch.from_numpy(mix.samples).float(),
            torch.from_numpy(speech.samples).float(),
        ))
    return pairs


def _crop_batch(pairs, indices, offsets, crop):
    mixes, speeches = [], []
    for idx, off in zip(indices, offsets):
        mix, speech = pairs[idx]
        if mix.shape[0] <= crop:
            pad = crop - mix.shape[0]
            mixes.append(F.pad(mix, (0, pad)))
            speeches.append(F.pad(speech, (0, pad)))
        else:
            mixes.append(mix[off : off + crop])
            speeches.append(speech[off : off + crop])
    return torch.stack(mixes), torch.stack(speeches)


def train_denoiser(model: DenoiserModel, train_entries: list[MixManifestEntry],
                   valid_entries: list[MixManifestEntry], corpus_dir: str | Path,
                   steps: int = 500, seed: int = 0, lr: float | None = None,
                   valid_every: int = 50,
                   optimizer_state: dict | None = None) -> TrainResult:
    """Minimize the scale-dependent distortion loss over random 1 s crops.

    Keeps the parameters with the best validation loss; raises
    NumericalAbort if the loss or any parameter goes non-finite.
    """
    if not train_entries:
        raise DataError("empty training manifest")
    if not valid_entries:
        raise DataError("empty validation manifest")
    config = model.config
    corpus_dir = Path(corpus_dir)
    train_pairs = _load_pairs(train_entries, corpus_dir, config)
    valid_pairs = _load_pairs(valid_entries, corpus_dir, config)
    crop = int(config.denoiser_crop_seconds * config.sample_rate)
    batch = config.denoiser_batch

    opt = torch.optim.Adam(model.parameters(), lr=config.denoiser_lr if lr is None else lr)
    if optimizer_state is not None:
        opt.load_state_dict(optimizer_state)
    rng = np.random.default_rng(seed)
    curves = []
    best_loss = float("inf")
    best_state = copy.deepcopy(model.state_dict())

    # fixed center crops make validation deterministic
    valid_idx = np.arange(len(valid_pairs))
    valid_off = [max(0, (p[0].shape[0] - crop) // 2) for p in valid_pairs]
    vx, vy = _crop_batch(valid_pairs, valid_idx, valid_off, crop)

    model.train()
    for step in range(1, steps + 1):
        indices = rng.integers(0, len(train_pairs), size=batch)
        offsets = [
            int(rng.integers(0, max(1, train_pairs[i][0].shape[0] - crop))) for i in indices
        ]
        mix, speech = _crop_batch(train_pairs, indices, offsets, crop)
        est = model(mix)
        loss = sd_sdr_loss(est, speech).mean()
        opt.zero_grad()
        loss.backward()
        opt.step()
        train_loss = float(loss.detach())
        if not np.isfinite(train_loss):
            raise NumericalAbort(f"denoiser training loss is non-finite at step {step}")
        for p in model.parameters():
            if not torch.isfinite(p).all():
                raise NumericalAbort(f"denoiser parameter is non-finite at step {step}")

        record = {"step": step, "train_loss": train_loss}
        if step % valid_every == 0 or step == steps:
            model.eval()
            with torch.no_grad():
                valid_loss = float(sd_sdr_loss(model(vx), vy).mean())
            model.train()
            record["valid_loss"] = valid_loss
            if valid_loss < best_loss:
                best_loss = valid_loss
                best_state = copy.deepcopy(model.state_dict())
        curves.append(record)

    model.load_state_dict(best_state)
    model.eval()
    return TrainResult(model=model, curves=curves, best_valid_loss=best_loss)


# ---------------------------------------------------------------------------
# checkpoints

def save_denoiser(path: str | Path, model: DenoiserModel, curves: list[dict] | None = None,
                  optimizer_state: dict | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save({
        "format_version": CHECKPOINT_VERSION,
        "kind": "denoiser",
        "config_text": model.config.to_text(),
        "config_hash": model.config.config_hash(),
        "state_dict": model.state_dict(),
        "optimizer_state": optimizer_state,
    }, path)
    if curves is not None:
        write_curves(path.with_suffix(".curves.jsonl"), curves)


def load_denoiser(path: str | Path) -> tuple[DenoiserModel, dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if payload.get("kind") != "denoiser":
        raise DataError(f"{path}: not a denoiser checkpoint (kind={payload.get('kind')!r})")
    config = RunConfig.from_overrides(_config_overrides(payload["config_text"]))
    model = DenoiserModel(config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload


def _config_overrides(text: str) -> dict[str, str]:
    overrides = {}
    for line in text.splitlines():
        if line.strip():
            key, value = (part.strip() for part in line.split("=", 1))
            overrides[key] = value
    return overrides


def write_curves(path: str | Path, curves: list[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in curves:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

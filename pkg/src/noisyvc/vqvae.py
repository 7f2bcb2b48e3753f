"""VQ-VAE conversion model with two decoder variants.

The baseline variant models clean or denoised speech given speaker code
and quantized content codes. The noise-conditioned variant models the
noisy waveform directly: its autoregressive decoder additionally reads
frame-level log-mel features of the separated noise through a strictly
causal mapping (the noise frame used at sample t is the latest analysis
frame that ends at or before t), so perturbing future noise frames can
never change past logits.
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
from .config import RunConfig
from .dataset import MixManifestEntry, mixture_path
from .dsp import frame_count, log_mel, mu_law_decode, mu_law_encode
from .errors import DataError, NumericalAbort

BASELINE = "baseline"
NOISE_CONDITIONED = "noise_conditioned"
VARIANTS = (BASELINE, NOISE_CONDITIONED)

# fixed affine normalization of natural-log mel features before any network
MEL_SHIFT = 12.0
MEL_SCALE = 8.0

CHECKPOINT_VERSION = 1


def normalize_mel(frames):
    return (frames + MEL_SHIFT) / MEL_SCALE


def noise_frame_indices(length: int, n_noise_frames: int, config: RunConfig) -> np.ndarray:
    """Causal map sample -> noise frame: the frame whose span ends at or
    before the sample, -1 while no frame has completed yet."""
    t = np.arange(length)
    idx = np.floor_divide(t - (config.frame_length - 1), config.hop_length)
    return np.clip(idx, -1, n_noise_frames - 1)


def gather_noise_features(condition: NoiseCondition, length: int,
                          config: RunConfig) -> np.ndarray:
    """Per-sample noise log-mel rows (length, mel_bands), normalized; samples
    before the first completed frame read an all-floor row."""
    frames = normalize_mel(condition.frames)
    floor_row = normalize_mel(np.full((1, config.mel_bands), np.log(config.mel_floor)))
    table = np.concatenate([floor_row, frames], axis=0)
    idx = noise_frame_indices(length, frames.shape[0], config) + 1
    return table[idx].astype(np.float32)


@dataclass(frozen=True)
class NoiseCondition:
    """Frame-level log-mel of the separated noise, or an all-floor sequence."""

    frames: np.ndarray
    zero_sequence: bool

    @classmethod
    def from_noise(cls, noise: Waveform, config: RunConfig) -> "NoiseCondition":
        return cls(log_mel(noise, config).frames, zero_sequence=False)

    @classmethod
    def zeros(cls, length: int, config: RunConfig, sample_rate: int) -> "NoiseCondition":
        silent = Waveform(np.zeros(length), sample_rate)
        return cls(log_mel(silent, config).frames, zero_sequence=True)


class VectorQuantizer(nn.Module):
    """Nearest-neighbor codebook with straight-through gradients.

    The codebook is a buffer updated by exponential moving averages from
    :meth:`ema_update`; forward passes never mutate state.
    """

    DEAD_CLUSTER = 0.05

    def __init__(self, num_codes: int, dim: int, commitment: float = 0.25,
                 decay: float = 0.99):
        super().__init__()
        self.num_codes = num_codes
        self.dim = dim
        self.commitment = commitment
        self.decay = decay
        init = torch.randn(num_codes, dim) * 0.3
        self.register_buffer("codebook", init)
        self.register_buffer("ema_cluster", torch.ones(num_codes))
        self.register_buffer("ema_sum", init.clone())
        self.register_buffer("usage", torch.zeros(num_codes, dtype=torch.long))
        self.register_buffer("initialized", torch.zeros(1, dtype=torch.bool))
        # fixed jitter used to spread data-seeded codes; constant across runs
        gen = torch.Generator().manual_seed(0)
        self.register_buffer("_jitter", torch.randn(num_codes, dim, generator=gen) * 0.02)

    def nearest(self, latents: torch.Tensor) -> torch.Tensor:
        if latents.shape[-1] != self.dim:
            raise DataError(f"latent dim {latents.shape[-1]} != codebook dim {self.dim}")
        flat = latents.reshape(-1, self.dim)
        dist = (
            flat.pow(2).sum(1, keepdim=True)
            - 2.0 * flat @ self.codebook.t()
            + self.codebook.pow(2).sum(1)
        )
        return dist.argmin(1).reshape(latents.shape[:-1])

    def forward(self, latents: torch.Tensor):
        """Quantize (..., dim) latents.

        Returns (indices, z, codebook_loss, commitment_loss); z carries the
        straight-through gradient, so dL/d(latents) equals dL/dz exactly.
        """
        indices = self.nearest(latents)
        quantized = self.codebook[indices]
        codebook_loss = F.mse_loss(quantized, latents.detach())
        commitment_loss = self.commitment * F.mse_loss(latents, quantized.detach())
        # forward value is exactly the codebook row; gradient passes straight
        # through to the latents
        z = quantized + (latents - latents.detach())
        return indices, z, codebook_loss, commitment_loss

    @torch.no_grad()
    def ema_update(self, latents: torch.Tensor, indices: torch.Tensor) -> None:
        """One EMA step toward the batch statistics; also tallies usage.

        The first call seeds the codebook from the batch itself, and codes
        whose running cluster size decays to ~zero are restarted on batch
        latents; both are deterministic given the training seed.
        """
        flat = latents.reshape(-1, self.dim)
        if not bool(self.initialized):
            seeds = flat[torch.arange(self.num_codes) % flat.shape[0]] + self._jitter
            self.codebook.copy_(seeds)
            self.ema_sum.copy_(seeds)
            self.ema_cluster.fill_(1.0)
            self.initialized.fill_(True)
            indices = self.nearest(latents)
        idx = indices.reshape(-1)
        onehot = F.one_hot(idx, self.num_codes).to(flat.dtype)
        counts = onehot.sum(0)
        sums = onehot.t() @ flat
        self.ema_cluster.mul_(self.decay).add_(counts, alpha=1.0 - self.decay)
        self.ema_sum.mul_(self.decay).add_(sums, alpha=1.0 - self.decay)
        # Laplace smoothing keeps dead codes finite
        n = self.ema_cluster.sum()
        cluster = (self.ema_cluster + 1e-5) / (n + self.num_codes * 1e-5) * n
        self.codebook.copy_(self.ema_sum / cluster.unsqueeze(1))
        self.usage.add_(counts.long())

        dead = torch.nonzero(self.ema_cluster < self.DEAD_CLUSTER).reshape(-1)
        if dead.numel():
            restarts = flat[dead % flat.shape[0]] + self._jitter[dead]
            self.codebook[dead] = restarts
            self.ema_sum[dead] = restarts
            self.ema_cluster[dead] = 1.0

    def used_fraction(self) -> float:
        return float((self.usage > 0).float().mean())


class SpeakerTable(nn.Module):
    """Ordered speaker ids with learned embeddings."""

    def __init__(self, speaker_ids: tuple[str, ...], dim: int):
        super().__init__()
        if not speaker_ids:
            raise DataError("speaker table needs at least one speaker")
        self.speaker_ids = tuple(speaker_ids)
        self.embed = nn.Embedding(len(speaker_ids), dim)

    def index(self, speaker_id: str) -> int:
        try:
            return self.speaker_ids.index(speaker_id)
        except ValueError:
            raise DataError(
                f"unknown speaker {speaker_id!r}; known: {list(self.speaker_ids)}"
            ) from None


class VQVAEModel(nn.Module):
    """Mel encoder -> VQ bottleneck -> conditioned autoregressive decoder."""

    def __init__(self, config: RunConfig, speaker_ids: tuple[str, ...],
                 variant: str = BASELINE):
        super().__init__()
        if variant not in VARIANTS:
            raise DataError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
        self.config = config
        self.variant = variant
        self.hop = config.hop_length
        self.frame = config.frame_length
        self.stride = config.encoder_stride
        self.upsample = self.stride * self.hop  # samples per latent frame

        ch = config.encoder_channels
        self.encoder = nn.Sequential(
            nn.Conv1d(config.mel_bands, ch, 5, padding=2),
            nn.ReLU(),
            nn.Conv1d(ch, ch, 3, stride=self.stride, padding=1),
            nn.ReLU(),
            nn.Conv1d(ch, config.vq_dim, 3, padding=1),
        )
        self.quantizer = VectorQuantizer(
            config.vq_codebook_size, config.vq_dim, config.vq_commitment, config.vq_ema_decay
        )
        self.speakers = SpeakerTable(speaker_ids, config.speaker_dim)
        cond_in = config.vq_dim + config.speaker_dim
        self.cond_net = nn.Sequential(
            nn.Conv1d(cond_in, config.cond_channels, 3, padding=1),
            nn.ReLU(),
            nn.Conv1d(config.cond_channels, config.cond_channels, 3, padding=1),
        )
        # per-frame projection only: no cross-frame mixing, so the causal
        # frame selection fully determines what each sample can see
        self.noise_proj = (
            nn.Linear(config.mel_bands, config.noise_cond_dim)
            if variant == NOISE_CONDITIONED else None
        )
        self.sample_embed = nn.Embedding(config.mulaw_levels, config.sample_embed_dim)
        gru_in = config.sample_embed_dim + config.cond_channels
        if variant == NOISE_CONDITIONED:
            gru_in += config.noise_cond_dim
        self.gru = nn.GRU(gru_in, config.decoder_rnn_width, batch_first=True)
        self.fc1 = nn.Linear(config.decoder_rnn_width, config.decoder_rnn_width)
        self.fc2 = nn.Linear(config.decoder_rnn_width, config.mulaw_levels)

    # -- encoder / conditioning ---------------------------------------------

    def encode(self, mel_frames: np.ndarray | torch.Tensor) -> torch.Tensor:
        """Raw log-mel frames (F, M) or (B, F, M) -> pre-quantization latents
        (..., ceil(F/stride), vq_dim). Normalization happens here."""
        if isinstance(mel_frames, np.ndarray):
            mel_frames = torch.from_numpy(mel_frames).float()
        single = mel_frames.dim() == 2
        if single:
            mel_frames = mel_frames.unsqueeze(0)
        if mel_frames.shape[-1] != self.config.mel_bands:
            raise DataError(
                f"mel has {mel_frames.shape[-1]} bands; model expects {self.config.mel_bands}"
            )
        x = normalize_mel(mel_frames)
        latents = self.encoder(x.transpose(1, 2)).transpose(1, 2)
        return latents.squeeze(0) if single else latents

    def condition_frames(self, z: torch.Tensor, speaker_idx) -> torch.Tensor:
        """Latent-rate conditioning from codes plus a speaker embedding."""
        single = z.dim() == 2
        if single:
            z = z.unsqueeze(0)
        idx = torch.as_tensor(speaker_idx, dtype=torch.long).reshape(-1)
        emb = self.speakers.embed(idx)[:, None, :].expand(z.shape[0], z.shape[1], -1)
        cond = self.cond_net(torch.cat([z, emb], dim=-1).transpose(1, 2)).transpose(1, 2)
        return cond.squeeze(0) if single else cond

    def upsample_condition(self, cond: torch.Tensor, length: int) -> torch.Tensor:
        """Repeat latent-rate conditioning to sample rate, edge-extended."""
        per_sample = cond.repeat_interleave(self.upsample, dim=-2)
        t = per_sample.shape[-2]
        if t < length:
            pad = per_sample[..., -1:, :].expand(*per_sample.shape[:-2], length - t, cond.shape[-1])
            per_sample = torch.cat([per_sample, pad], dim=-2)
        return per_sample[..., :length, :]

    # -- decoder --------------------------------------------------------------

    def _decoder_input(self, prev_classes: torch.Tensor, cond: torch.Tensor,
                       noise_features: torch.Tensor | None) -> torch.Tensor:
        parts = [self.sample_embed(prev_classes), cond]
        if self.variant == NOISE_CONDITIONED:
            if noise_features is None:
                raise DataError("noise-conditioned variant requires noise features")
            parts.append(self.noise_proj(noise_features))
        elif noise_features is not None:
            raise DataError("baseline variant accepts no noise features")
        return torch.cat(parts, dim=-1)

    def teacher_forced_logits(self, prev_classes: torch.Tensor, cond: torch.Tensor,
                              noise_features: torch.Tensor | None = None) -> torch.Tensor:
        """(B, T) previous classes + per-sample conditioning -> (B, T, levels)."""
        x = self._decoder_input(prev_classes, cond, noise_features)
        out, _ = self.gru(x)
        return self.fc2(F.relu(self.fc1(out)))

    def init_state(self, batch: int = 1) -> torch.Tensor:
        return torch.zeros(1, batch, self.config.decoder_rnn_width)

    def decoder_step(self, prev_class: torch.Tensor, cond_frame: torch.Tensor,
                     noise_frame: torch.Tensor | None, state: torch.Tensor):
        """Advance the decoder one sample.

        ``noise_frame`` is a raw (normalized) noise log-mel row and must be
        present iff the variant is noise-conditioned. Returns (logits, state).
        """
        prev = prev_class.reshape(-1)
        cond = cond_frame.reshape(prev.shape[0], -1)
        noise = None if noise_frame is None else noise_frame.reshape(prev.shape[0], -1)
        x = self._decoder_input(prev, cond, noise).unsqueeze(1)
        out, new_state = self.gru(x, state)
        logits = self.fc2(F.relu(self.fc1(out[:, 0])))
        return logits, new_state


# ---------------------------------------------------------------------------
# fast generation (numpy mirror of the torch decoder)

class _NumpyDecoder:
    """Single-step decoder math on extracted float32 weights; ~10x faster
    than stepping the torch modules sample by sample."""

    def __init__(self, model: VQVAEModel):
        def arr(t):
            return t.detach().numpy().astype(np.float32)

        self.w_ih = arr(model.gru.weight_ih_l0)
        self.w_hh = arr(model.gru.weight_hh_l0)
        self.b_ih = arr(model.gru.bias_ih_l0)
        self.b_hh = arr(model.gru.bias_hh_l0)
        self.embed = arr(model.sample_embed.weight)
        self.w1, self.b1 = arr(model.fc1.weight), arr(model.fc1.bias)
        self.w2, self.b2 = arr(model.fc2.weight), arr(model.fc2.bias)
        self.hidden = model.config.decoder_rnn_width

    def run(self, cond: np.ndarray, seed: int, initial_class: int) -> np.ndarray:
        """Sample cond.shape[0] mu-law classes (temperature 1.0)."""
        rng = np.random.default_rng(seed)
        h = np.zeros(self.hidden, dtype=np.float32)
        n = self.hidden
        prev = initial_class
        out = np.empty(cond.shape[0], dtype=np.int64)
        for t in range(cond.shape[0]):
            x = np.concatenate([self.embed[prev], cond[t]])
            gi = self.w_ih @ x + self.b_ih
            gh = self.w_hh @ h + self.b_hh
            r = _sigmoid(gi[:n] + gh[:n])
            z = _sigmoid(gi[n : 2 * n] + gh[n : 2 * n])
            cand = np.tanh(gi[2 * n :] + r * gh[2 * n :])
            h = (1.0 - z) * cand + z * h
            hid = np.maximum(self.w1 @ h + self.b1, 0.0)
            logits = (self.w2 @ hid + self.b2).astype(np.float64)
            p = np.exp(logits - logits.max())
            p /= p.sum()
            prev = int(np.searchsorted(np.cumsum(p), rng.random()))
            prev = min(prev, p.size - 1)
            out[t] = prev
        return out


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def build_sample_conditioning(model: VQVAEModel, mel_frames: np.ndarray,
                              noise_condition: NoiseCondition | None,
                              speaker_id: str, length: int) -> np.ndarray:
    """Full conditioning table (length, C) for generation: quantized-code
    conditioning upsampled to sample rate, plus causal noise features for
    the noise-conditioned variant."""
    model.eval()
    with torch.no_grad():
        latents = model.encode(mel_frames)
        _, z, _, _ = model.quantizer(latents)
        cond = model.condition_frames(z, model.speakers.index(speaker_id))
        cond = model.upsample_condition(cond, length)
        if model.variant == NOISE_CONDITIONED:
            if noise_condition is None:
                raise DataError("noise-conditioned variant requires a noise condition")
            rows = gather_noise_features(noise_condition, length, model.config)
            noise = model.noise_proj(torch.from_numpy(rows))
            cond = torch.cat([cond, noise], dim=-1)
        elif noise_condition is not None:
            raise DataError("baseline variant accepts no noise condition")
    return cond.numpy().astype(np.float32)


def generate_waveform(model: VQVAEModel, mel_frames: np.ndarray,
                      noise_condition: NoiseCondition | None, speaker_id: str,
                      length: int, seed: int, sample_rate: int) -> Waveform:
    """Autoregressive sampling of ``length`` samples from the decoder."""
    cond = build_sample_conditioning(model, mel_frames, noise_condition, speaker_id, length)
    decoder = _NumpyDecoder(model)
    start = model.config.mulaw_levels // 2  # mu-law code of silence
    classes = decoder.run(cond, seed, start)
    return Waveform(mu_law_decode(classes, model.config.mulaw_levels), sample_rate)


# ---------------------------------------------------------------------------
# training

@dataclass
class VCExample:
    """Per-utterance tensors prepared once before training."""

    utterance_id: str
    speaker_idx: int
    target_classes: np.ndarray          # mu-law classes of the modeled waveform
    mel: np.ndarray                     # encoder input log-mel (F, M)
    noise_rows: np.ndarray | None       # per-sample noise log-mel rows, normalized


def prepare_vc_examples(entries: list[MixManifestEntry], corpus_dir: str | Path,
                        separations: dict[str, "SeparationTriple"],
                        speaker_ids: tuple[str, ...], config: RunConfig,
                        variant: str) -> list[VCExample]:
    """Assemble training examples from per-utterance separation results.

    The baseline variant models the denoised speech d; the noise-conditioned
    variant models the noisy waveform y with noise features from n.
    """
    examples = []
    order = {s: i for i, s in enumerate(speaker_ids)}
    for entry in entries:
        if entry.speaker_id not in order:
            raise DataError(f"manifest speaker {entry.speaker_id!r} missing from table")
        sep = separations[entry.utterance_id]
        target = sep.y if variant == NOISE_CONDITIONED else sep.d
        mel = log_mel(sep.d, config).frames
        noise_rows = None
        if variant == NOISE_CONDITIONED:
            cond = NoiseCondition.from_noise(sep.n, config)
            noise_rows = gather_noise_features(cond, len(target), config)
        examples.append(VCExample(
            utterance_id=entry.utterance_id,
            speaker_idx=order[entry.speaker_id],
            target_classes=mu_law_encode(target, config.mulaw_levels),
            mel=mel,
            noise_rows=noise_rows,
        ))
    return examples


@dataclass
class VCTrainResult:
    model: VQVAEModel
    curves: list[dict]


def train_vc(model: VQVAEModel, examples: list[VCExample], steps: int = 2000,
             seed: int = 0, lr: float | None = None,
             optimizer_state: dict | None = None) -> VCTrainResult:
    """Teacher-forced training: mu-law cross-entropy plus VQ loss terms.

    Crops are aligned to latent-frame boundaries. With lr=0 the step is a
    true no-op: no gradient update and no codebook EMA movement.
    """
    if not examples:
        raise DataError("no training examples")
    config = model.config
    lr = config.vc_lr if lr is None else lr
    crop_frames = config.vc_crop_frames
    crop = crop_frames * config.hop_length
    batch = config.vc_batch

    usable = [ex for ex in examples if ex.mel.shape[0] >= crop_frames + 4]
    if not usable:
        raise DataError(f"all utterances shorter than one crop ({crop_frames} mel frames)")

    opt = torch.optim.Adam(model.parameters(), lr=lr)
    if optimizer_state is not None:
        opt.load_state_dict(optimizer_state)
    rng = np.random.default_rng(seed)
    curves = []
    model.train()

    for step in range(1, steps + 1):
        picks = rng.integers(0, len(usable), size=batch)
        mels, prevs, targets, spk, noise_rows = [], [], [], [], []
        for i in picks:
            ex = usable[i]
            max_start = (ex.mel.shape[0] - crop_frames) // model.stride
            f0 = int(rng.integers(1, max_start + 1)) * model.stride
            a = f0 * config.hop_length
            mels.append(ex.mel[f0 : f0 + crop_frames])
            prevs.append(ex.target_classes[a - 1 : a + crop - 1])
            targets.append(ex.target_classes[a : a + crop])
            spk.append(ex.speaker_idx)
            if model.variant == NOISE_CONDITIONED:
                noise_rows.append(ex.noise_rows[a : a + crop])
        mel_b = torch.from_numpy(np.stack(mels)).float()
        prev_b = torch.from_numpy(np.stack(prevs))
        target_b = torch.from_numpy(np.stack(targets))
        noise_b = (
            torch.from_numpy(np.stack(noise_rows)) if model.variant == NOISE_CONDITIONED else None
        )

        latents = model.encode(mel_b)
        indices, z, codebook_loss, commitment_loss = model.quantizer(latents)
        cond = model.condition_frames(z, spk)
        cond = model.upsample_condition(cond, crop)
        logits = model.teacher_forced_logits(prev_b, cond, noise_b)
        ce = F.cross_entropy(logits.reshape(-1, config.mulaw_levels), target_b.reshape(-1))
        loss = ce + codebook_loss + commitment_loss

        opt.zero_grad()
        loss.backward()
        if lr != 0.0:
            opt.step()
            model.quantizer.ema_update(latents.detach(), indices)

        ce_val = float(ce.detach())
        if not np.isfinite(ce_val):
            raise NumericalAbort(f"VC training loss is non-finite at step {step}")
        record = {
            "step": step,
            "ce_loss": ce_val,
            "vq_loss": float((codebook_loss + commitment_loss).detach()),
        }
        if step % 100 == 0 or step == steps:
            record["codebook_used"] = model.quantizer.used_fraction()
            for p in model.parameters():
                if not torch.isfinite(p).all():
                    raise NumericalAbort(f"VC parameter is non-finite at step {step}")
        curves.append(record)

    model.eval()
    return VCTrainResult(model=model, curves=curves)


# ---------------------------------------------------------------------------
# separation inputs and checkpoints

@dataclass(frozen=True)
class SeparationTriple:
    """Waveform triple for VC training; mirrors the denoiser's output."""

    y: Waveform
    d: Waveform
    n: Waveform


def separations_from_denoiser(entries: list[MixManifestEntry], corpus_dir: str | Path,
                              denoiser_model, config: RunConfig) -> dict[str, SeparationTriple]:
    """Run the frozen denoiser over the corpus mixtures."""
    from .denoiser import separate

    out = {}
    for entry in entries:
        subdir = entry.split if entry.split == "train" else f"eval_snr{entry.snr_db:+g}"
        y = read_wav(mixture_path(corpus_dir, subdir, entry.utterance_id), config.sample_rate)
        sep = separate(denoiser_model, y)
        out[entry.utterance_id] = SeparationTriple(sep.y, sep.d, sep.n)
    return out


def separations_from_clean(entries: list[MixManifestEntry],
                           config: RunConfig) -> dict[str, SeparationTriple]:
    """Ideal separations for the clean-trained upper bound: d = speech, n = 0."""
    out = {}
    for entry in entries:
        speech = read_wav(entry.speech_path, config.sample_rate)
        zeros = Waveform(np.zeros(len(speech)), config.sample_rate)
        out[entry.utterance_id] = SeparationTriple(speech, speech, zeros)
    return out


def save_vc(path: str | Path, model: VQVAEModel, curves: list[dict] | None = None,
            train_data: str = "separated", optimizer_state: dict | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save({
        "format_version": CHECKPOINT_VERSION,
        "kind": "vqvae",
        "variant": model.variant,
        "speaker_ids": model.speakers.speaker_ids,
        "train_data": train_data,
        "config_text": model.config.to_text(),
        "config_hash": model.config.config_hash(),
        "state_dict": model.state_dict(),
        "optimizer_state": optimizer_state,
    }, path)
    if curves is not None:
        from .denoiser import write_curves

        write_curves(path.with_suffix(".curves.jsonl"), curves)


def load_vc(path: str | Path) -> tuple[VQVAEModel, dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if payload.get("kind") != "vqvae":
        raise DataError(f"{path}: not a VQ-VAE checkpoint (kind={payload.get('kind')!r})")
    from .denoiser import _config_overrides

    config = RunConfig.from_overrides(_config_overrides(payload["config_text"]))
    model = VQVAEModel(config, tuple(payload["speaker_ids"]), payload["variant"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload

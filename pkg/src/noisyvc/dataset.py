"""Deterministic corpus construction.

Builds noisy train/eval corpora from speech and noise pools, and can
synthesize a fully self-contained toy corpus (harmonic "speakers" plus
category-tagged noise) so the whole pipeline runs with no external data.

Everything derives from explicit seeds: re-running with the same inputs
reproduces manifests and rendered WAV files byte for byte. Per-entry
randomness (noise choice, SNR draw, crop offset) comes solely from the
entry's clip_seed, so rendering order never matters.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.signal

from .audio import Waveform, read_wav, write_wav
from .errors import DataError
from .mixing import mix_at_snr

CROSSFADE_SECONDS = 0.010

TOY_NOISE_CATEGORIES = (
    "white", "pink", "brown", "hum", "tone", "chirp", "babble", "machine",
)


def stable_seed(*parts) -> int:
    """Platform-independent 63-bit seed derived from the given parts."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


@dataclass(frozen=True)
class SpeechClip:
    utterance_id: str
    speaker_id: str
    path: str

    @property
    def content_id(self) -> str:
        return self.utterance_id.split("_", 1)[1] if "_" in self.utterance_id else self.utterance_id


@dataclass(frozen=True)
class NoiseClip:
    clip_id: str
    category: str
    path: str


@dataclass(frozen=True)
class MixManifestEntry:
    utterance_id: str
    speaker_id: str
    speech_path: str
    noise_path: str
    noise_category: str
    snr_db: float
    split: str
    clip_seed: int
    clipped: bool = False


@dataclass
class CorpusSpec:
    train_snr_grid: tuple[float, ...] = (6, 8, 10, 12, 14, 16, 18, 20)
    eval_snr_grid: tuple[float, ...] = (-5, 0, 5, 10, 15, 20, 25, 30)
    noise_split: str = "disjoint"
    speakers: tuple[str, ...] = ()
    seed: int = 1

    def __post_init__(self):
        if not self.train_snr_grid or not self.eval_snr_grid:
            raise DataError("SNR grids must be non-empty")
        if self.noise_split not in ("disjoint", "shared"):
            raise DataError(f"unknown noise_split rule: {self.noise_split!r}")


# ---------------------------------------------------------------------------
# manifests

def write_manifest(entries: list[MixManifestEntry], path: str | Path) -> None:
    """One JSON record per line, UTF-8, sorted by utterance_id."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ordered = sorted(entries, key=lambda e: e.utterance_id)
    with open(path, "w", encoding="utf-8") as fh:
        for entry in ordered:
            fh.write(json.dumps(asdict(entry), sort_keys=True) + "\n")


def read_manifest(path: str | Path) -> list[MixManifestEntry]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    entries = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            entries.append(MixManifestEntry(**json.loads(line)))
        except (json.JSONDecodeError, TypeError) as exc:
            raise DataError(f"{path}:{lineno}: malformed manifest record ({exc})") from exc
    if not entries:
        raise DataError(f"empty manifest: {path}")
    return entries


def manifest_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def mixture_path(corpus_dir: str | Path, subdir: str, utterance_id: str) -> Path:
    return Path(corpus_dir) / subdir / f"{utterance_id}.wav"


def noise_ref_path(corpus_dir: str | Path, subdir: str, utterance_id: str) -> Path:
    return Path(corpus_dir) / subdir / f"{utterance_id}.noise.wav"


def eval_subdir(snr_db: float) -> str:
    return f"eval_snr{snr_db:+g}"


# ---------------------------------------------------------------------------
# pools

def load_speech_pool(pool_dir: str | Path) -> list[SpeechClip]:
    """Speech pool directory: WAV files named ``{speaker}_{content}.wav``."""
    pool_dir = Path(pool_dir)
    clips = []
    for path in sorted(pool_dir.glob("*.wav")):
        stem = path.stem
        if "_" not in stem:
            raise DataError(f"speech pool file {path.name}: expected '{{speaker}}_{{content}}.wav'")
        speaker = stem.split("_", 1)[0]
        clips.append(SpeechClip(utterance_id=stem, speaker_id=speaker, path=str(path)))
    if not clips:
        raise DataError(f"no WAV files in speech pool {pool_dir}")
    return clips


def load_noise_pool(pool_dir: str | Path) -> list[NoiseClip]:
    """Noise pool directory: WAV files named ``{category}_{index}.wav``."""
    pool_dir = Path(pool_dir)
    clips = []
    for path in sorted(pool_dir.glob("*.wav")):
        stem = path.stem
        if "_" not in stem:
            raise DataError(f"noise pool file {path.name}: expected '{{category}}_{{index}}.wav'")
        category = stem.rsplit("_", 1)[0]
        clips.append(NoiseClip(clip_id=stem, category=category, path=str(path)))
    if not clips:
        raise DataError(f"no WAV files in noise pool {pool_dir}")
    return clips


def split_noise_categories(categories: list[str], rule: str) -> tuple[list[str], list[str]]:
    """Partition noise categories between train and eval according to the rule."""
    present = sorted(set(categories))
    if rule == "shared":
        return present, present
    if len(present) < 2:
        raise DataError("disjoint noise split needs at least 2 noise categories")
    n_eval = max(1, len(present) // 3)
    return present[:-n_eval], present[-n_eval:]


# ---------------------------------------------------------------------------
# rendering

def fit_noise_seeded(noise: np.ndarray, length: int, rng: np.random.Generator,
                     sample_rate: int = 8000) -> np.ndarray:
    """Adapt noise to ``length``: crop from a seeded offset, or loop with a
    short crossfade when the clip is too short."""
    if noise.size >= length:
        offset = int(rng.integers(0, noise.size - length + 1))
        return noise[offset : offset + length].copy()
    xf = min(int(CROSSFADE_SECONDS * sample_rate), noise.size // 2)
    ramp = np.linspace(0.0, 1.0, xf, endpoint=False) if xf else np.empty(0)
    out = noise.copy()
    while out.size < length:
        if xf:
            out[-xf:] = out[-xf:] * (1.0 - ramp) + noise[:xf] * ramp
            out = np.concatenate([out, noise[xf:]])
        else:
            out = np.concatenate([out, noise])
    return out[:length]


def render_entry(entry: MixManifestEntry, sample_rate: int = 8000):
    """Load the entry's pool clips and mix them at the manifest SNR.

    Returns ``(speech, mix_result)``; all per-entry randomness (the noise
    crop offset) derives from entry.clip_seed.
    """
    speech = read_wav(entry.speech_path, sample_rate)
    noise = read_wav(entry.noise_path, sample_rate)
    rng = np.random.default_rng(entry.clip_seed)
    fitted = fit_noise_seeded(noise.samples, len(speech), rng, sample_rate)
    result = mix_at_snr(speech, Waveform(fitted, sample_rate), entry.snr_db)
    return speech, result


def _render_split(entries: list[MixManifestEntry], corpus_dir: Path, subdir: str,
                  sample_rate: int) -> list[MixManifestEntry]:
    rendered = []
    for entry in entries:
        _, result = render_entry(entry, sample_rate)
        write_wav(mixture_path(corpus_dir, subdir, entry.utterance_id), result.noisy)
        write_wav(noise_ref_path(corpus_dir, subdir, entry.utterance_id), result.scaled_noise)
        rendered.append(MixManifestEntry(**{**asdict(entry), "clipped": result.clipped}))
    return rendered


def _select_speech(speech_pool: list[SpeechClip], spec: CorpusSpec) -> list[SpeechClip]:
    if spec.speakers:
        pool = [c for c in speech_pool if c.speaker_id in spec.speakers]
    else:
        pool = list(speech_pool)
    if not pool:
        raise DataError("speech pool is empty after speaker selection")
    return sorted(pool, key=lambda c: c.utterance_id)


def build_noisy_corpus(speech_pool: list[SpeechClip], noise_pool: list[NoiseClip],
                       spec: CorpusSpec, corpus_dir: str | Path,
                       split: str = "train", sample_rate: int = 8000) -> list[MixManifestEntry]:
    """Pair every speech clip with a seeded noise clip and SNR from the grid,
    render the mixtures, and write the split's manifest."""
    if not noise_pool:
        raise DataError("noise pool is empty")
    corpus_dir = Path(corpus_dir)
    speech = _select_speech(speech_pool, spec)
    train_cats, eval_cats = split_noise_categories([c.category for c in noise_pool], spec.noise_split)
    categories = train_cats if split == "train" else eval_cats
    usable = [c for c in noise_pool if c.category in categories]
    if not usable:
        raise DataError(f"no noise clips available for split {split!r}")
    grid = spec.train_snr_grid if split == "train" else spec.eval_snr_grid

    entries = []
    for clip in speech:
        clip_seed = stable_seed(spec.seed, split, clip.utterance_id)
        rng = np.random.default_rng(stable_seed(spec.seed, split, "pairing", clip.utterance_id))
        noise = usable[int(rng.integers(0, len(usable)))]
        snr_db = float(grid[int(rng.integers(0, len(grid)))])
        entries.append(MixManifestEntry(
            utterance_id=clip.utterance_id,
            speaker_id=clip.speaker_id,
            speech_path=clip.path,
            noise_path=noise.path,
            noise_category=noise.category,
            snr_db=snr_db,
            split=split,
            clip_seed=clip_seed,
        ))
    rendered = _render_split(entries, corpus_dir, split, sample_rate)
    write_manifest(rendered, Path(corpus_dir) / f"manifest_{split}.jsonl")
    return rendered


def build_parallel_eval_sets(speech_pool: list[SpeechClip], noise_pool: list[NoiseClip],
                             snr_levels: tuple[float, ...], spec: CorpusSpec,
                             corpus_dir: str | Path,
                             sample_rate: int = 8000) -> list[list[MixManifestEntry]]:
    """One eval set per SNR level with identical (speech, noise) pairings.

    The noise clip and crop are keyed by the utterance's content, so the
    same content from different speakers gets the same noise category and
    only the mixing gain differs across levels.
    """
    if not snr_levels:
        raise DataError("snr_levels must be non-empty")
    if not noise_pool:
        raise DataError("noise pool is empty")
    corpus_dir = Path(corpus_dir)
    speech = _select_speech(speech_pool, spec)
    _, eval_cats = split_noise_categories([c.category for c in noise_pool], spec.noise_split)
    usable = [c for c in noise_pool if c.category in eval_cats]
    if not usable:
        raise DataError("no noise clips available for the eval split")

    pairing = {}
    for clip in speech:
        rng = np.random.default_rng(stable_seed(spec.seed, "eval", "pairing", clip.content_id))
        pairing[clip.utterance_id] = usable[int(rng.integers(0, len(usable)))]

    manifests = []
    for level in snr_levels:
        entries = []
        for clip in speech:
            noise = pairing[clip.utterance_id]
            entries.append(MixManifestEntry(
                utterance_id=clip.utterance_id,
                speaker_id=clip.speaker_id,
                speech_path=clip.path,
                noise_path=noise.path,
                noise_category=noise.category,
                snr_db=float(level),
                split="eval",
                clip_seed=stable_seed(spec.seed, "eval", clip.content_id),
            ))
        subdir = eval_subdir(float(level))
        rendered = _render_split(entries, corpus_dir, subdir, sample_rate)
        write_manifest(rendered, corpus_dir / f"manifest_{subdir}.jsonl")
        manifests.append(rendered)
    return manifests


# ---------------------------------------------------------------------------
# toy corpus synthesis

def _resonator(x: np.ndarray, freq: float, bandwidth: float, sample_rate: int) -> np.ndarray:
    r = np.exp(-np.pi * bandwidth / sample_rate)
    a = [1.0, -2.0 * r * np.cos(2.0 * np.pi * freq / sample_rate), r * r]
    return scipy.signal.lfilter([1.0 - r], a, x)


def speaker_f0_base(speaker_idx: int) -> float:
    return 95.0 + 45.0 * speaker_idx


def synth_toy_speech(speaker_idx: int, content_seed: int, sample_rate: int = 8000) -> np.ndarray:
    """Harmonic 'speech': speaker-specific pitch base and formant-like
    resonances, content-specific pitch contour and syllable envelope.

    The same content_seed produces parallel utterances across speakers.
    Clips start and end with true silence so mixtures have noise-dominant
    regions.
    """
    rng = np.random.default_rng(content_seed)
    duration = float(rng.uniform(1.0, 1.8))
    n = int(duration * sample_rate)
    t = np.arange(n) / sample_rate

    base = speaker_f0_base(speaker_idx)
    vib_rate = rng.uniform(0.8, 2.5)
    vib_phase = rng.uniform(0, 2 * np.pi)
    declination = rng.uniform(-0.08, 0.02)
    f0 = base * (1.0 + 0.06 * np.sin(2 * np.pi * vib_rate * t + vib_phase) + declination * t / duration)
    phase = 2.0 * np.pi * np.cumsum(f0) / sample_rate

    n_harm = min(12, int(3600.0 / f0.max()))
    source = np.zeros(n)
    for h in range(1, n_harm + 1):
        source += np.sin(h * phase) / h**0.8

    formant1 = 420.0 + 130.0 * speaker_idx
    formant2 = 1350.0 + 320.0 * speaker_idx
    voiced = _resonator(source, formant1, 120.0, sample_rate)
    voiced += 0.6 * _resonator(source, formant2, 180.0, sample_rate)

    # syllable-style envelope with exactly-zero leading/trailing edges
    edge = int(0.12 * sample_rate)
    active = n - 2 * edge
    n_syll = int(rng.integers(2, 5))
    env = np.zeros(n)
    bounds = np.linspace(0, active, n_syll + 1).astype(int)
    for k in range(n_syll):
        span = bounds[k + 1] - bounds[k]
        amp = rng.uniform(0.6, 1.0)
        env[edge + bounds[k] : edge + bounds[k + 1]] = amp * np.sin(np.linspace(0, np.pi, span)) ** 0.7
    voiced = voiced * env
    return 0.3 * voiced / max(np.abs(voiced).max(), 1e-9)


def _shaped_noise(rng: np.random.Generator, n: int, exponent: float) -> np.ndarray:
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.maximum(np.fft.rfftfreq(n), 1.0 / n)
    return np.fft.irfft(spectrum / freqs**exponent, n=n)


def synth_toy_noise(category: str, clip_seed: int, sample_rate: int = 8000) -> np.ndarray:
    """Category-tagged background noise: colored noise and modulated tones."""
    rng = np.random.default_rng(clip_seed)
    duration = float(rng.uniform(1.5, 3.0))
    n = int(duration * sample_rate)
    t = np.arange(n) / sample_rate

    if category == "white":
        x = rng.standard_normal(n)
    elif category == "pink":
        x = _shaped_noise(rng, n, 0.5)
    elif category == "brown":
        x = _shaped_noise(rng, n, 1.0)
    elif category == "hum":
        f = rng.uniform(55.0, 120.0)
        x = sum(np.sin(2 * np.pi * f * k * t + rng.uniform(0, 2 * np.pi)) / k for k in (1, 2, 3))
        x = x * (1.0 + 0.3 * np.sin(2 * np.pi * rng.uniform(0.3, 1.5) * t))
    elif category == "tone":
        f = rng.uniform(400.0, 2000.0)
        am = 0.5 * (1.0 + np.sin(2 * np.pi * rng.uniform(2.0, 8.0) * t))
        x = am * np.sin(2 * np.pi * f * t)
    elif category == "chirp":
        f0, f1 = sorted(rng.uniform(300.0, 2500.0, size=2))
        x = scipy.signal.chirp(t, f0=f0, f1=f1, t1=duration, method="logarithmic")
    elif category == "babble":
        x = np.zeros(n)
        for _ in range(4):
            band = np.sort(rng.uniform(250.0, 2600.0, size=2))
            sos = scipy.signal.butter(2, band, btype="bandpass", fs=sample_rate, output="sos")
            gate = 0.5 * (1.0 + np.sin(2 * np.pi * rng.uniform(1.0, 4.0) * t + rng.uniform(0, 2 * np.pi)))
            x += scipy.signal.sosfilt(sos, rng.standard_normal(n)) * gate
    elif category == "machine":
        rate = rng.uniform(8.0, 25.0)
        pulses = (np.sin(2 * np.pi * rate * t) > 0.9).astype(float)
        x = _resonator(pulses, rng.uniform(600.0, 1800.0), 250.0, sample_rate)
        x += 0.2 * _shaped_noise(rng, n, 0.5)
    else:
        raise DataError(f"unknown toy noise category: {category!r}")
    return 0.3 * x / max(np.abs(x).max(), 1e-9)


def gen_toy_corpus(seed: int, n_speakers: int, n_utterances: int, n_noise_clips: int,
                   pool_dir: str | Path,
                   sample_rate: int = 8000) -> tuple[list[SpeechClip], list[NoiseClip]]:
    """Write a synthetic speech pool and noise pool under ``pool_dir``.

    n_utterances counts total speech clips; contents are shared round-robin
    across speakers so parallel utterances exist for conversion evaluation.
    """
    if n_speakers < 1 or n_utterances < 1 or n_noise_clips < 1:
        raise DataError("toy corpus counts must be >= 1")
    pool_dir = Path(pool_dir)
    speech_dir = pool_dir / "speech"
    noise_dir = pool_dir / "noise"

    speech = []
    n_contents = int(np.ceil(n_utterances / n_speakers))
    count = 0
    for content in range(n_contents):
        content_seed = stable_seed(seed, "content", content)
        for spk in range(n_speakers):
            if count >= n_utterances:
                break
            speaker_id = f"spk{spk}"
            utterance_id = f"{speaker_id}_u{content:02d}"
            samples = synth_toy_speech(spk, content_seed, sample_rate)
            path = speech_dir / f"{utterance_id}.wav"
            write_wav(path, Waveform(samples, sample_rate))
            speech.append(SpeechClip(utterance_id, speaker_id, str(path)))
            count += 1

    noise = []
    for k in range(n_noise_clips):
        category = TOY_NOISE_CATEGORIES[k % len(TOY_NOISE_CATEGORIES)]
        clip_id = f"{category}_{k:02d}"
        samples = synth_toy_noise(category, stable_seed(seed, "noise", clip_id), sample_rate)
        path = noise_dir / f"{clip_id}.wav"
        write_wav(path, Waveform(samples, sample_rate))
        noise.append(NoiseClip(clip_id, category, str(path)))
    return speech, noise

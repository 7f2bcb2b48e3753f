"""Objective evaluation harness: MCD as a function of input SNR.

Converted utterances are compared against the target speaker's clean
rendition of the same content (parallel-corpus pairing), with mel-cepstral
distortion after DTW alignment. The noisy methods consume the per-level
mixtures; the clean-trained upper bound consumes the same clean input at
every level, so its row is constant by construction.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .audio import Waveform, read_wav
from .config import RunConfig
from .convert import ConversionModels, convert_baseline, convert_clean
from .dataset import (
    MixManifestEntry,
    eval_subdir,
    manifest_hash,
    mixture_path,
    stable_seed,
)
from .denoiser import DenoiserModel, SeparationResult, separate
from .dsp import mel_cepstra
from .errors import DataError
from .metrics import mcd, sd_sdr, si_snr
from .vqvae import BASELINE, NOISE_CONDITIONED, VQVAEModel

CLEAN_VC = "clean_vc"
METHOD_KINDS = (CLEAN_VC, "baseline", "proposed")


@dataclass(frozen=True)
class Method:
    """A labeled conversion system under evaluation."""

    label: str
    kind: str  # clean_vc | baseline | proposed
    vc: VQVAEModel
    denoiser: DenoiserModel | None = None

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise DataError(f"unknown method kind {self.kind!r}")
        if self.kind == "proposed" and self.vc.variant != NOISE_CONDITIONED:
            raise DataError("proposed method needs a noise-conditioned model")
        if self.kind in (CLEAN_VC, "baseline") and self.vc.variant != BASELINE:
            raise DataError(f"{self.kind} method needs a baseline-variant model")
        if self.kind in ("baseline", "proposed") and self.denoiser is None:
            raise DataError(f"{self.kind} method needs a denoiser")


def method_kind_from_checkpoint(variant: str, train_data: str) -> str:
    if variant == NOISE_CONDITIONED:
        return "proposed"
    return CLEAN_VC if train_data == "clean" else "baseline"


@dataclass(frozen=True)
class McdCell:
    method: str
    snr_db: float
    mean_mcd: float
    std_mcd: float
    count: int


@dataclass(frozen=True)
class DenoiserRow:
    utterance_id: str
    snr_db: float
    si_snr_in: float
    si_snr_out: float
    sd_sdr_in: float
    sd_sdr_out: float

    @property
    def si_snr_gain(self) -> float:
        return self.si_snr_out - self.si_snr_in


@dataclass
class EvalReport:
    cells: list[McdCell]
    denoiser_rows: list[DenoiserRow] = field(default_factory=list)
    config_hash: str = ""
    corpus_hash: str = ""
    notes: str = ""

    def cell(self, method: str, snr_db: float) -> McdCell:
        for c in self.cells:
            if c.method == method and c.snr_db == snr_db:
                return c
        raise KeyError((method, snr_db))

    def methods(self) -> list[str]:
        seen = []
        for c in self.cells:
            if c.method not in seen:
                seen.append(c.method)
        return seen

    def levels(self) -> list[float]:
        return sorted({c.snr_db for c in self.cells})


def target_pairing(entries: list[MixManifestEntry]) -> dict[str, tuple[str, str]]:
    """Map each source utterance to (target_speaker, clean reference path).

    The target is the next speaker (cyclically, in sorted order) that has a
    clean utterance with the same content.
    """
    speakers = sorted({e.speaker_id for e in entries})
    if len(speakers) < 2:
        raise DataError("conversion evaluation needs at least 2 speakers")
    by_content: dict[str, dict[str, str]] = {}
    for e in entries:
        content = e.utterance_id.split("_", 1)[1] if "_" in e.utterance_id else e.utterance_id
        by_content.setdefault(content, {})[e.speaker_id] = e.speech_path
    pairing = {}
    for e in entries:
        content = e.utterance_id.split("_", 1)[1] if "_" in e.utterance_id else e.utterance_id
        pool = by_content[content]
        order = speakers.index(e.speaker_id)
        for shift in range(1, len(speakers)):
            candidate = speakers[(order + shift) % len(speakers)]
            if candidate in pool:
                pairing[e.utterance_id] = (candidate, pool[candidate])
                break
        else:
            raise DataError(f"no parallel target utterance for {e.utterance_id}")
    return pairing


def check_parallel_integrity(manifests: list[list[MixManifestEntry]]) -> None:
    """Across levels, utterance ids and noise assignments must match."""
    reference = [(e.utterance_id, e.noise_category, e.noise_path) for e in manifests[0]]
    for level in manifests[1:]:
        got = [(e.utterance_id, e.noise_category, e.noise_path) for e in level]
        if got != reference:
            raise DataError("parallel eval sets disagree on utterances or noise pairing")


def _convert_for_method(method: Method, mixture: Waveform, clean: Waveform,
                        target_speaker: str, seed: int) -> Waveform:
    models = ConversionModels(vc=method.vc, denoiser=method.denoiser)
    if method.kind == CLEAN_VC:
        ideal = SeparationResult(
            y=clean, d=clean, n=Waveform(np.zeros(len(clean)), clean.sample_rate)
        )
        return convert_baseline(models, clean, target_speaker, False, seed, ideal)
    if method.kind == "baseline":
        return convert_baseline(models, mixture, target_speaker, False, seed)
    return convert_clean(models, mixture, target_speaker, seed)


def eval_mcd_vs_snr(methods: list[Method], manifests: list[list[MixManifestEntry]],
                    corpus_dir: str | Path, config: RunConfig,
                    seed: int = 0) -> EvalReport:
    """Mean MCD per (method, SNR level) over the parallel eval sets.

    Conversion sampling seeds depend on (method, utterance) but never on
    the level, so the clean upper bound is constant across levels and the
    noisy methods vary only through the separation of the mixture.
    """
    if not methods:
        raise DataError("no methods to evaluate")
    if not manifests:
        raise DataError("no eval manifests")
    check_parallel_integrity(manifests)
    corpus_dir = Path(corpus_dir)
    pairing = target_pairing(manifests[0])

    ref_cepstra = {}
    for utt, (_, ref_path) in pairing.items():
        ref_cepstra[utt] = mel_cepstra(read_wav(ref_path, config.sample_rate), config)

    cells = []
    clean_cache: dict[tuple[str, str], float] = {}
    for entries in manifests:
        level = entries[0].snr_db
        subdir = eval_subdir(level)
        for method in methods:
            values = []
            for entry in entries:
                target_speaker, _ = pairing[entry.utterance_id]
                conv_seed = stable_seed(seed, method.label, entry.utterance_id)
                if method.kind == CLEAN_VC:
                    key = (method.label, entry.utterance_id)
                    if key not in clean_cache:
                        clean = read_wav(entry.speech_path, config.sample_rate)
                        converted = _convert_for_method(
                            method, clean, clean, target_speaker, conv_seed
                        )
                        clean_cache[key] = mcd(
                            ref_cepstra[entry.utterance_id], mel_cepstra(converted, config)
                        )
                    values.append(clean_cache[key])
                    continue
                mixture = read_wav(
                    mixture_path(corpus_dir, subdir, entry.utterance_id), config.sample_rate
                )
                clean = read_wav(entry.speech_path, config.sample_rate)
                converted = _convert_for_method(method, mixture, clean, target_speaker, conv_seed)
                values.append(mcd(ref_cepstra[entry.utterance_id], mel_cepstra(converted, config)))
            cells.append(McdCell(
                method=method.label,
                snr_db=float(level),
                mean_mcd=float(np.mean(values)),
                std_mcd=float(np.std(values)),
                count=len(values),
            ))
    return EvalReport(cells=cells, config_hash=config.config_hash())


def eval_denoiser(model: DenoiserModel, entries: list[MixManifestEntry],
                  corpus_dir: str | Path, config: RunConfig) -> list[DenoiserRow]:
    """Per-utterance SI-SNR / SD-SDR of the denoised output against clean
    speech, next to the unprocessed mixture's scores."""
    corpus_dir = Path(corpus_dir)
    rows = []
    for entry in entries:
        subdir = entry.split if entry.split == "train" else eval_subdir(entry.snr_db)
        path = mixture_path(corpus_dir, subdir, entry.utterance_id)
        if not Path(entry.speech_path).exists():
            raise DataError(f"missing clean reference: {entry.speech_path}")
        mixture = read_wav(path, config.sample_rate)
        clean = read_wav(entry.speech_path, config.sample_rate)
        d = separate(model, mixture).d
        rows.append(DenoiserRow(
            utterance_id=entry.utterance_id,
            snr_db=entry.snr_db,
            si_snr_in=si_snr(mixture, clean, config.eps_div, config.metric_cap_db),
            si_snr_out=si_snr(d, clean, config.eps_div, config.metric_cap_db),
            sd_sdr_in=sd_sdr(mixture, clean, config.eps_div, config.metric_cap_db),
            sd_sdr_out=sd_sdr(d, clean, config.eps_div, config.metric_cap_db),
        ))
    return rows


# ---------------------------------------------------------------------------
# report emission

def emit_report(report: EvalReport, out_dir: str | Path) -> dict[str, Path]:
    """Write the human table, the machine-readable records, and plot data.

    Returns the paths written. The text table uses fixed 2-decimal
    formatting; the record file keeps full precision so parsing it
    round-trips the report exactly.
    """
    if not report.cells:
        raise DataError("no cells")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    records_path = out_dir / "report.jsonl"
    with open(records_path, "w", encoding="utf-8") as fh:
        meta = {
            "type": "meta",
            "config_hash": report.config_hash,
            "corpus_hash": report.corpus_hash,
            "notes": report.notes,
        }
        fh.write(json.dumps(meta, sort_keys=True) + "\n")
        for cell in report.cells:
            fh.write(json.dumps({"type": "mcd_cell", **asdict(cell)}, sort_keys=True) + "\n")
        for row in report.denoiser_rows:
            fh.write(json.dumps({"type": "denoiser_row", **asdict(row)}, sort_keys=True) + "\n")

    table_path = out_dir / "report.txt"
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write(format_table(report))

    plot_path = out_dir / "mcd_vs_snr.csv"
    with open(plot_path, "w", encoding="utf-8") as fh:
        fh.write("method,snr_db,mean_mcd\n")
        for cell in report.cells:
            fh.write(f"{cell.method},{cell.snr_db:g},{cell.mean_mcd:.2f}\n")

    return {"records": records_path, "table": table_path, "plot": plot_path}


def format_table(report: EvalReport) -> str:
    """MCD-vs-SNR table, one method per row, 2-decimal cells."""
    levels = report.levels()
    methods = report.methods()
    width = max(len(m) for m in methods) + 2
    lines = [
        f"config {report.config_hash}  corpus {report.corpus_hash}",
        "mean MCD (dB) by input SNR",
        " " * width + "".join(f"{lv:>9g}" for lv in levels),
    ]
    for m in methods:
        row = f"{m:<{width}}"
        for lv in levels:
            row += f"{report.cell(m, lv).mean_mcd:>9.2f}"
        lines.append(row)
    if report.denoiser_rows:
        gains = [r.si_snr_gain for r in report.denoiser_rows]
        lines.append("")
        lines.append(
            f"denoiser: mean SI-SNR gain {np.mean(gains):.2f} dB over {len(gains)} utterances"
        )
    if report.notes:
        lines.append("")
        lines.append(report.notes)
    return "\n".join(lines) + "\n"


def parse_report(records_path: str | Path) -> EvalReport:
    """Inverse of emit_report over the record file."""
    cells, rows = [], []
    config_hash = corpus_hash = notes = ""
    for line in Path(records_path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        kind = record.pop("type")
        if kind == "meta":
            config_hash = record["config_hash"]
            corpus_hash = record["corpus_hash"]
            notes = record["notes"]
        elif kind == "mcd_cell":
            cells.append(McdCell(**record))
        elif kind == "denoiser_row":
            rows.append(DenoiserRow(**record))
        else:
            raise DataError(f"unknown record type {kind!r}")
    return EvalReport(cells=cells, denoiser_rows=rows, config_hash=config_hash,
                      corpus_hash=corpus_hash, notes=notes)

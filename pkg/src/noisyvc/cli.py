"""Command-line entry point wiring the modules into reproducible runs.

Subcommands: mix, train-denoiser, train-vc, convert, evaluate.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import torch

from . import convert as conv
from . import dataset, denoiser, evaluate, vqvae
from .audio import read_wav, write_wav
from .config import RunConfig
from .errors import DataError, NumericalAbort


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1 (argparse default would be 2, which we reserve
    # for data errors)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _snr_grid(text: str) -> tuple[float, ...]:
    values = tuple(float(v) for v in text.split(",") if v.strip())
    if not values:
        raise argparse.ArgumentTypeError("SNR grid must list at least one dB value")
    return values


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        config = RunConfig.from_file(args.config)
    else:
        config = RunConfig()
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noisyvc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mix", help="build a noisy corpus (toy or from pools)")
    p.add_argument("--out", required=True, help="corpus output directory")
    p.add_argument("--toy", action="store_true", help="generate a synthetic toy corpus")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--speakers", type=int, default=2, help="toy: number of speakers")
    p.add_argument("--utterances", type=int, default=8, help="toy: total speech clips")
    p.add_argument("--noise-clips", type=int, default=10, help="toy: number of noise clips")
    p.add_argument("--speech-pool", help="directory of {speaker}_{content}.wav files")
    p.add_argument("--noise-pool", help="directory of {category}_{index}.wav files")
    p.add_argument("--snr-grid", type=_snr_grid, default=None, help="training SNR grid (dB)")
    p.add_argument("--eval-snr-grid", type=_snr_grid, default=None, help="parallel eval levels (dB)")
    p.add_argument("--noise-split", choices=("disjoint", "shared"), default="disjoint")
    p.add_argument("--config", help="flat key=value config file")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("train-denoiser", help="train the complex-mask denoiser")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--valid-manifest", help="manifest for validation (default: an eval set)")
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--config", help="flat key=value config file")
    p.set_defaults(func=cmd_train_denoiser)

    p = sub.add_parser("train-vc", help="train a VQ-VAE conversion model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--variant", choices=("baseline", "proposed"), required=True)
    p.add_argument("--denoiser", help="denoiser checkpoint (required unless --train-data clean)")
    p.add_argument("--train-data", choices=("separated", "clean"), default="separated",
                   help="separated: train on denoiser outputs; clean: on pool speech")
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--config", help="flat key=value config file")
    p.set_defaults(func=cmd_train_vc)

    p = sub.add_parser("convert", help="convert one WAV file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--target-speaker", required=True)
    p.add_argument("--mode", choices=("direct", "indirect", "clean", "baseline"), required=True)
    p.add_argument("--superimpose", action="store_true",
                   help="baseline mode: add the separated noise to the output")
    p.add_argument("--vc", required=True, help="VQ-VAE checkpoint")
    p.add_argument("--denoiser", help="denoiser checkpoint")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("evaluate", help="MCD-vs-SNR report over parallel eval sets")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--method", action="append", default=[], metavar="LABEL=CKPT",
                   help="labeled VQ-VAE checkpoint (repeatable)")
    p.add_argument("--denoiser", help="denoiser checkpoint for the noisy methods")
    p.add_argument("--levels", type=_snr_grid, default=None,
                   help="SNR levels to include (default: all eval sets present)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)
    return parser


# ---------------------------------------------------------------------------

def cmd_mix(args) -> int:
    config = _load_config(args)
    out = Path(args.out)
    if args.toy:
        speech, noise = dataset.gen_toy_corpus(
            args.seed, args.speakers, args.utterances, args.noise_clips,
            out / "pools", config.sample_rate,
        )
    else:
        if not args.speech_pool or not args.noise_pool:
            raise DataError("either --toy or both --speech-pool and --noise-pool are required")
        speech = dataset.load_speech_pool(args.speech_pool)
        noise = dataset.load_noise_pool(args.noise_pool)
    spec = dataset.CorpusSpec(
        train_snr_grid=args.snr_grid or config.train_snr_grid,
        eval_snr_grid=args.eval_snr_grid or config.eval_snr_grid,
        noise_split=args.noise_split,
        seed=args.seed,
    )
    dataset.build_noisy_corpus(speech, noise, spec, out, split="train",
                               sample_rate=config.sample_rate)
    dataset.build_parallel_eval_sets(speech, noise, spec.eval_snr_grid, spec, out,
                                     sample_rate=config.sample_rate)
    print(out / "manifest_train.jsonl")
    for level in spec.eval_snr_grid:
        print(out / f"manifest_{dataset.eval_subdir(level)}.jsonl")
    return 0


def _find_valid_manifest(corpus: Path) -> Path:
    candidates = sorted(corpus.glob("manifest_eval_snr*.jsonl"))
    if candidates:
        # prefer a mid-grid level for validation
        return candidates[len(candidates) // 2]
    return corpus / "manifest_train.jsonl"


def cmd_train_denoiser(args) -> int:
    config = _load_config(args)
    corpus = Path(args.corpus)
    train_entries = dataset.read_manifest(corpus / "manifest_train.jsonl")
    valid_path = Path(args.valid_manifest) if args.valid_manifest else _find_valid_manifest(corpus)
    valid_entries = dataset.read_manifest(valid_path)

    torch.manual_seed(args.seed)
    optimizer_state = None
    if args.resume:
        model, payload = denoiser.load_denoiser(args.resume)
        optimizer_state = payload.get("optimizer_state")
    else:
        model = denoiser.DenoiserModel(config)
    result = denoiser.train_denoiser(
        model, train_entries, valid_entries, corpus,
        steps=args.steps, seed=args.seed, lr=args.lr,
    )
    denoiser.save_denoiser(args.out, result.model, result.curves)
    print(args.out)
    return 0


def cmd_train_vc(args) -> int:
    config = _load_config(args)
    corpus = Path(args.corpus)
    entries = dataset.read_manifest(corpus / "manifest_train.jsonl")
    speakers = tuple(sorted({e.speaker_id for e in entries}))
    variant = vqvae.NOISE_CONDITIONED if args.variant == "proposed" else vqvae.BASELINE

    if args.train_data == "clean":
        if variant != vqvae.BASELINE:
            raise DataError("--train-data clean is only meaningful for the baseline variant")
        separations = vqvae.separations_from_clean(entries, config)
    else:
        if not args.denoiser:
            raise DataError("--denoiser is required when training on separated data")
        dn_model, _ = denoiser.load_denoiser(args.denoiser)
        separations = vqvae.separations_from_denoiser(entries, corpus, dn_model, config)

    torch.manual_seed(args.seed)
    optimizer_state = None
    if args.resume:
        model, payload = vqvae.load_vc(args.resume)
        if model.variant != variant:
            raise DataError(
                f"cannot resume: checkpoint variant {model.variant!r} != requested {variant!r}"
            )
        optimizer_state = payload.get("optimizer_state")
    else:
        model = vqvae.VQVAEModel(config, speakers, variant)
    examples = vqvae.prepare_vc_examples(entries, corpus, separations, speakers, config, variant)
    result = vqvae.train_vc(model, examples, steps=args.steps, seed=args.seed, lr=args.lr,
                            optimizer_state=optimizer_state)
    vqvae.save_vc(args.out, result.model, result.curves, train_data=args.train_data)
    print(args.out)
    return 0


def cmd_convert(args) -> int:
    vc_model, _ = vqvae.load_vc(args.vc)
    dn_model = None
    if args.denoiser:
        dn_model, _ = denoiser.load_denoiser(args.denoiser)
    if args.superimpose and args.mode != "baseline":
        raise DataError("--superimpose only applies to baseline mode")
    y = read_wav(args.input, vc_model.config.sample_rate)
    models = conv.ConversionModels(vc=vc_model, denoiser=dn_model)
    out = conv.convert(models, y, args.target_speaker, args.mode,
                       superimpose=args.superimpose, seed=args.seed)
    write_wav(args.output, out)
    print(args.output)
    return 0


def cmd_evaluate(args) -> int:
    if not args.method:
        raise _usage_error("at least one --method LABEL=CKPT is required")
    config = None
    methods = []
    dn_model = None
    if args.denoiser:
        dn_model, _ = denoiser.load_denoiser(args.denoiser)
    for spec_text in args.method:
        if "=" not in spec_text:
            raise _usage_error(f"--method expects LABEL=CKPT, got {spec_text!r}")
        label, ckpt = spec_text.split("=", 1)
        model, payload = vqvae.load_vc(ckpt)
        config = config or model.config
        kind = evaluate.method_kind_from_checkpoint(model.variant, payload.get("train_data", ""))
        methods.append(evaluate.Method(label=label, kind=kind, vc=model, denoiser=dn_model))
    corpus = Path(args.corpus)
    manifest_paths = sorted(
        corpus.glob("manifest_eval_snr*.jsonl"),
        key=lambda p: float(p.stem.replace("manifest_eval_snr", "")),
    )
    if not manifest_paths:
        raise DataError(f"no eval manifests under {corpus}")
    manifests, used_paths = [], []
    for path in manifest_paths:
        entries = dataset.read_manifest(path)
        if args.levels is None or entries[0].snr_db in args.levels:
            manifests.append(entries)
            used_paths.append(path)
    if not manifests:
        raise DataError("requested levels not present in the corpus")

    report = evaluate.eval_mcd_vs_snr(methods, manifests, corpus, config, seed=args.seed)
    if dn_model is not None:
        mid = manifests[len(manifests) // 2]
        report.denoiser_rows = evaluate.eval_denoiser(dn_model, mid, corpus, config)
    report.corpus_hash = "+".join(dataset.manifest_hash(p) for p in used_paths)[:32]
    report.notes = (
        "pairing: converted source vs target speaker's clean parallel utterance; "
        "MCD after DTW, c0 excluded"
    )
    paths = evaluate.emit_report(report, args.out)
    print(paths["table"])
    return 0


class _UsageExit(Exception):
    pass


def _usage_error(message: str) -> SystemExit:
    print(f"noisyvc: error: {message}", file=sys.stderr)
    return SystemExit(1)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except DataError as exc:
        print(f"noisyvc: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalAbort as exc:
        print(f"noisyvc: numerical abort: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Shared fixtures.

The toy corpus is cheap and built once per session. The trained-model
fixture runs the full desk-scale training recipe (denoiser plus three
conversion models) and is shared by the conversion, evaluation, and
acceptance tests; it is the expensive part of the suite.
"""

from __future__ import annotations

import time
from types import SimpleNamespace

import pytest
import torch

from noisyvc import dataset, denoiser, vqvae
from noisyvc.config import RunConfig

TOY_SEED = 1
DENOISER_STEPS = 500
VC_STEPS = 2000


@pytest.fixture(scope="session")
def config():
    return RunConfig()


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory, config):
    root = tmp_path_factory.mktemp("toy")
    speech, noise = dataset.gen_toy_corpus(
        TOY_SEED, n_speakers=2, n_utterances=8, n_noise_clips=10, pool_dir=root / "pools"
    )
    spec = dataset.CorpusSpec(seed=TOY_SEED)
    train = dataset.build_noisy_corpus(speech, noise, spec, root / "corpus", split="train")
    evals = dataset.build_parallel_eval_sets(
        speech, noise, spec.eval_snr_grid, spec, root / "corpus"
    )
    return SimpleNamespace(
        root=root,
        corpus_dir=root / "corpus",
        pool_dir=root / "pools",
        speech=speech,
        noise=noise,
        spec=spec,
        train=train,
        evals=evals,
    )


@pytest.fixture(scope="session")
def trained(toy_corpus, config):
    """Denoiser + proposed/baseline/clean-trained conversion models."""
    t0 = time.time()
    valid = toy_corpus.evals[config.eval_snr_grid.index(10)]

    torch.manual_seed(7)
    den = denoiser.DenoiserModel(config)
    den_result = denoiser.train_denoiser(
        den, toy_corpus.train, valid, toy_corpus.corpus_dir, steps=DENOISER_STEPS, seed=3
    )
    denoiser_seconds = time.time() - t0

    speakers = tuple(sorted({e.speaker_id for e in toy_corpus.train}))
    separated = vqvae.separations_from_denoiser(
        toy_corpus.train, toy_corpus.corpus_dir, den_result.model, config
    )
    clean = vqvae.separations_from_clean(toy_corpus.train, config)

    results = {}
    for name, variant, seps, seed in (
        ("proposed", vqvae.NOISE_CONDITIONED, separated, 11),
        ("baseline", vqvae.BASELINE, separated, 12),
        ("clean", vqvae.BASELINE, clean, 13),
    ):
        torch.manual_seed(seed)
        model = vqvae.VQVAEModel(config, speakers, variant)
        examples = vqvae.prepare_vc_examples(
            toy_corpus.train, toy_corpus.corpus_dir, seps, speakers, config, variant
        )
        results[name] = vqvae.train_vc(model, examples, steps=VC_STEPS, seed=seed)

    return SimpleNamespace(
        denoiser=den_result.model,
        denoiser_curves=den_result.curves,
        proposed=results["proposed"].model,
        proposed_curves=results["proposed"].curves,
        baseline=results["baseline"].model,
        baseline_curves=results["baseline"].curves,
        clean=results["clean"].model,
        clean_curves=results["clean"].curves,
        speakers=speakers,
        denoiser_seconds=denoiser_seconds,
        total_seconds=time.time() - t0,
    )

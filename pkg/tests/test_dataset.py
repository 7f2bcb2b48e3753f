import numpy as np
import pytest

from noisyvc import dataset
from noisyvc.audio import read_wav
from noisyvc.errors import DataError
from noisyvc.mixing import measure_snr


def estimate_f0(samples, sample_rate=8000):
    """Autocorrelation pitch estimate over the voiced middle third."""
    mid = samples[len(samples) // 3 : 2 * len(samples) // 3]
    mid = mid - mid.mean()
    ac = np.correlate(mid, mid, "full")[len(mid) - 1 :]
    lo, hi = sample_rate // 300, sample_rate // 60
    return sample_rate / (lo + np.argmax(ac[lo:hi]))


def test_toy_pool_counts_and_determinism(tmp_path):
    s1, n1 = dataset.gen_toy_corpus(1, 2, 8, 4, tmp_path / "a")
    assert len(s1) == 8 and len(n1) == 4
    s2, _ = dataset.gen_toy_corpus(1, 2, 8, 4, tmp_path / "b")
    for c1, c2 in zip(s1, s2):
        assert (tmp_path / "a" / "speech" / f"{c1.utterance_id}.wav").read_bytes() == (
            tmp_path / "b" / "speech" / f"{c2.utterance_id}.wav"
        ).read_bytes()


def test_toy_speakers_have_distinct_pitch(tmp_path):
    speech, _ = dataset.gen_toy_corpus(5, 2, 8, 4, tmp_path)
    f0 = {}
    for clip in speech:
        w = read_wav(clip.path)
        f0.setdefault(clip.speaker_id, []).append(estimate_f0(w.samples))
    means = {spk: np.mean(v) for spk, v in f0.items()}
    assert abs(means["spk0"] - means["spk1"]) >= 20.0


def test_toy_clips_are_8khz_and_sane(tmp_path):
    speech, noise = dataset.gen_toy_corpus(2, 2, 4, 4, tmp_path)
    for clip in speech + noise:
        w = read_wav(clip.path)
        assert w.sample_rate == 8000
        assert 1.0 <= w.duration <= 3.0
        assert np.abs(w.samples).max() <= 0.35


def test_manifest_round_trip(tmp_path):
    entries = [
        dataset.MixManifestEntry(
            utterance_id=f"spk0_u{k:02d}", speaker_id="spk0", speech_path="s.wav",
            noise_path="n.wav", noise_category="hum", snr_db=6.0, split="train",
            clip_seed=k, clipped=False,
        )
        for k in (3, 1, 2)
    ]
    path = tmp_path / "manifest.jsonl"
    dataset.write_manifest(entries, path)
    back = dataset.read_manifest(path)
    assert [e.utterance_id for e in back] == ["spk0_u01", "spk0_u02", "spk0_u03"]
    assert set(back) == set(entries)


def test_read_manifest_errors(tmp_path):
    with pytest.raises(DataError, match="not found"):
        dataset.read_manifest(tmp_path / "missing.jsonl")
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json}\n")
    with pytest.raises(DataError, match="malformed"):
        dataset.read_manifest(bad)
    empty = tmp_path / "empty.jsonl"
    empty.write_text("\n")
    with pytest.raises(DataError, match="empty"):
        dataset.read_manifest(empty)


def test_noise_category_split_rules():
    cats = ["a", "b", "c", "d", "e", "f"]
    train, eval_ = dataset.split_noise_categories(cats, "disjoint")
    assert set(train) & set(eval_) == set()
    assert set(train) | set(eval_) == set(cats)
    both = dataset.split_noise_categories(cats, "shared")
    assert both == (sorted(cats), sorted(cats))
    with pytest.raises(DataError):
        dataset.split_noise_categories(["only"], "disjoint")


def test_corpus_build_is_deterministic(toy_corpus, tmp_path):
    again = dataset.build_noisy_corpus(
        toy_corpus.speech, toy_corpus.noise, toy_corpus.spec, tmp_path / "redo", split="train"
    )
    assert again == toy_corpus.train
    for entry in again:
        a = dataset.mixture_path(toy_corpus.corpus_dir, "train", entry.utterance_id)
        b = dataset.mixture_path(tmp_path / "redo", "train", entry.utterance_id)
        assert a.read_bytes() == b.read_bytes()


def test_train_corpus_properties(toy_corpus):
    entries = toy_corpus.train
    assert len(entries) == 8
    assert len({(e.utterance_id, e.split) for e in entries}) == 8
    grid = set(toy_corpus.spec.train_snr_grid)
    assert all(e.snr_db in grid for e in entries)
    train_cats = {e.noise_category for e in entries}
    eval_cats = {e.noise_category for m in toy_corpus.evals for e in m}
    assert train_cats & eval_cats == set()


def test_rendered_mixture_hits_requested_snr(toy_corpus):
    for entry in toy_corpus.train[:4] + toy_corpus.evals[0][:2]:
        speech, result = dataset.render_entry(entry)
        assert abs(measure_snr(speech, result.scaled_noise) - entry.snr_db) <= 1e-6


def test_rendered_files_match_in_memory_mix(toy_corpus):
    entry = toy_corpus.train[0]
    _, result = dataset.render_entry(entry)
    on_disk = read_wav(dataset.mixture_path(toy_corpus.corpus_dir, "train", entry.utterance_id))
    assert np.abs(on_disk.samples - result.noisy.samples).max() <= 1.0 / 32767 + 1e-9


def test_parallel_sets_share_pairing_and_differ_only_in_snr(toy_corpus):
    import dataclasses

    levels = [m[0].snr_db for m in toy_corpus.evals]
    assert levels == sorted(levels)
    first = toy_corpus.evals[0]
    for manifest in toy_corpus.evals[1:]:
        for a, b in zip(first, manifest):
            da, db = dataclasses.asdict(a), dataclasses.asdict(b)
            da.pop("snr_db"), db.pop("snr_db")
            da.pop("clipped"), db.pop("clipped")
            assert da == db


def test_parallel_noise_power_scales_with_level(toy_corpus):
    levels = [m[0].snr_db for m in toy_corpus.evals]
    i0, i10 = levels.index(0.0), levels.index(10.0)
    _, r0 = dataset.render_entry(toy_corpus.evals[i0][0])
    _, r10 = dataset.render_entry(toy_corpus.evals[i10][0])
    ratio = r0.scaled_noise.power() / r10.scaled_noise.power()
    assert ratio == pytest.approx(10.0, rel=1e-6)


def test_same_content_gets_same_noise_category_across_speakers(toy_corpus):
    by_content = {}
    for e in toy_corpus.evals[0]:
        by_content.setdefault(e.utterance_id.split("_", 1)[1], set()).add(e.noise_category)
    assert all(len(cats) == 1 for cats in by_content.values())


def test_single_level_parallel_build(toy_corpus, tmp_path):
    single = dataset.build_parallel_eval_sets(
        toy_corpus.speech, toy_corpus.noise, (15.0,), toy_corpus.spec, tmp_path
    )
    assert len(single) == 1
    assert [e.utterance_id for e in single[0]] == [e.utterance_id for e in toy_corpus.evals[0]]


def test_fit_noise_seeded_crossfade_and_crop():
    rng = np.random.default_rng(0)
    short = rng.standard_normal(300)
    out = dataset.fit_noise_seeded(short, 1000, np.random.default_rng(1))
    assert out.shape == (1000,)
    long = rng.standard_normal(3000)
    a = dataset.fit_noise_seeded(long, 500, np.random.default_rng(2))
    b = dataset.fit_noise_seeded(long, 500, np.random.default_rng(2))
    assert np.array_equal(a, b)


def test_empty_pools_rejected(toy_corpus, tmp_path):
    with pytest.raises(DataError):
        dataset.build_noisy_corpus([], toy_corpus.noise, toy_corpus.spec, tmp_path)
    with pytest.raises(DataError):
        dataset.build_noisy_corpus(toy_corpus.speech, [], toy_corpus.spec, tmp_path)


def test_stable_seed_is_platform_independent_and_distinct():
    assert dataset.stable_seed(1, "a") == dataset.stable_seed(1, "a")
    assert dataset.stable_seed(1, "a") != dataset.stable_seed(1, "b")
    assert dataset.stable_seed(1, "a") != dataset.stable_seed(2, "a")

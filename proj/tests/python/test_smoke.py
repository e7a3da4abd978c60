"""Smoke tests for the _ttmr extension module."""

import json
import math

import pytest

import _ttmr


def unit(i, dim=8):
    v = [0.0] * dim
    v[i] = 1.0
    return v


def test_info_nce_single_pair_is_zero():
    z = [unit(0)]
    assert _ttmr.info_nce(z, z, 0.1) == 0.0


def test_info_nce_uniform_logits_log2():
    z = [unit(0), unit(0)]
    assert _ttmr.info_nce(z, z, 0.1) == pytest.approx(math.log(2.0), abs=1e-12)


def test_info_nce_orthogonal_pairs():
    z = [unit(0), unit(1)]
    expected = math.log(1.0 + math.exp(-10.0))
    assert _ttmr.info_nce(z, z, 0.1) == pytest.approx(expected, abs=1e-9)


def test_lr_schedule_endpoints():
    assert _ttmr.lr_at_step(5e-5, 5000, 32768, 0) == 0.0
    assert _ttmr.lr_at_step(5e-5, 5000, 32768, 5000) == pytest.approx(5e-5, abs=1e-12)
    assert _ttmr.lr_at_step(5e-5, 5000, 32768, 32768) == pytest.approx(0.0, abs=1e-12)


def test_templates():
    assert (
        _ttmr.render_metadata_text("Superstition", "Stevie Wonder", "Talking Book")
        == "music track Superstition by Stevie Wonder from Talking Book"
    )
    assert _ttmr.render_metadata_text("X", "Y") == "music track X by Y"
    assert _ttmr.render_similarity_text("Herbie Hancock") == "similar with artist Herbie Hancock"
    assert _ttmr.default_caption(["jazz", "piano"]) == "a music track characterized by jazz, piano"


def test_search_topk_self_retrieval_and_tie_break():
    ids = ["b", "a", "c"]
    vectors = [unit(0), unit(0), unit(1)]
    hits = _ttmr.search_topk(ids, vectors, unit(0), 3)
    assert [h[0] for h in hits] == ["a", "b", "c"]
    assert hits[0][1] == pytest.approx(1.0)


def test_binary_auc_hand_case():
    assert _ttmr.binary_auc([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0]) == pytest.approx(0.75, abs=1e-12)


def test_ndcg_hand_case():
    assert _ttmr.ndcg_at_k(["b", "a"], "q", ["a"]) == pytest.approx(
        1.0 / math.log2(3.0), abs=1e-9
    )


def test_log_mel_shape():
    signal = [0.0] * 4096
    mel = _ttmr.log_mel(signal)
    assert len(mel) == (4096 - 1024) // 220 + 1
    assert len(mel[0]) == 128


def test_run_pipeline_writes_manifest(tmp_path):
    config = {
        "seed": 5,
        "n_tracks": 16,
        "n_artists": 4,
        "n_triplets": 20,
        "tag_min_count": 2,
        "train": {
            "base_lr": 1e-3,
            "warmup_steps": 2,
            "total_steps": 8,
            "batch_size": 8,
            "seed": 5,
        },
    }
    manifest_path = _ttmr.run_pipeline(json.dumps(config), str(tmp_path / "run"))
    manifest = json.loads(open(manifest_path).read())
    assert manifest["seed"] == 5
    assert manifest["artifacts"]

"""Smoke tests for the python bindings."""

import os

import numpy as np
import pytest

import metafair as mf

ASSETS = os.environ.get("METAFAIR_ASSET_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "assets"))


def toy_path(name):
    return os.path.join(ASSETS, "toy", name)


@pytest.fixture(scope="module")
def src_a():
    return mf.load_text(toy_path("src_a.txt"))


@pytest.fixture(scope="module")
def lexicon():
    return mf.load_lexicon_json(toy_path("lexicon.json"))


def test_load_and_lookup(src_a):
    assert len(src_a) == 50
    assert src_a.dim == 6
    assert "doctor" in src_a
    vec = src_a.lookup("doctor")
    assert vec.shape == (6,)
    assert np.isfinite(vec).all()
    with pytest.raises(mf.MetafairError):
        src_a.lookup("not-a-word")


def test_roundtrip(tmp_path, src_a):
    out = tmp_path / "copy.txt"
    mf.save_text(src_a, str(out))
    back = mf.load_text(str(out))
    assert back.vocab == src_a.vocab
    np.testing.assert_array_equal(back.matrix, src_a.matrix)


def test_meta_methods(src_a):
    src_b = mf.load_text(toy_path("src_b.txt"))
    aligned = mf.align([src_a, src_b], mf.AlignPolicy.union_zero)
    merged = mf.conc(aligned)
    assert merged.dim == src_a.dim + src_b.dim

    averaged = mf.meta_embed([src_a, src_b], "avg")
    assert averaged.dim == max(src_a.dim, src_b.dim)

    # inner products decompose over conc blocks
    w = "doctor"
    lhs = merged.lookup(w) @ merged.lookup("nurse")
    rhs = src_a.lookup(w) @ src_a.lookup("nurse") + src_b.lookup(w) @ src_b.lookup("nurse")
    assert abs(lhs - rhs) < 1e-12


def test_hard_debias_orthogonality(src_a, lexicon):
    basis = mf.bias_subspace(src_a, lexicon, 1)
    debiased = mf.hard_debias(src_a, basis, lexicon)
    v = debiased.lookup("doctor")
    assert abs(np.linalg.norm(v) - 1.0) < 1e-10
    assert abs(v @ basis.directions[:, 0]) < 1e-10


def test_inlp_projection(src_a, lexicon):
    cfg = mf.DebiasConfig()
    cfg.method = mf.DebiasMethod.inlp
    cfg.m = 2
    debiased, projection = mf.inlp_debias(src_a, lexicon, cfg)
    assert np.allclose(projection, projection.T, atol=1e-8)
    assert np.allclose(projection @ projection, projection, atol=1e-8)
    assert debiased.dim == src_a.dim


def test_weat_and_similarity(src_a):
    query = mf.WeatQuery()
    query.name = "toy"
    query.X = ["doctor", "engineer"]
    query.Y = ["nurse", "teacher"]
    query.A = ["he", "man"]
    query.B = ["she", "woman"]
    result = mf.weat(src_a, query)
    assert result.exact
    assert -2.1 <= result.effect_size <= 2.1
    assert 0.0 <= result.p_value <= 1.0

    data = mf.load_similarity_tsv(toy_path("sl.tsv"), "sl")
    sim = mf.similarity_benchmark(src_a, data)
    assert -1.0 <= sim.spearman <= 1.0
    assert sim.n_scored > 0


def test_pipeline_and_report():
    meta, report = mf.run_pipeline_file(toy_path("pipeline_msnd.json"))
    assert len(meta) > 0
    metrics = {row.metric for row in report.rows}
    assert "weat" in metrics
    assert "sembias" in metrics
    tsv = mf.report_to_tsv(report)
    assert tsv.startswith("label\tmetric\tscore\tskipped\tfingerprint")

    meta2, report2 = mf.run_pipeline_file(toy_path("pipeline_msnd.json"))
    assert mf.report_to_json(report) == mf.report_to_json(report2)


def test_synthetic_and_preservation():
    spec = mf.SyntheticSpec()
    spec.n_words = 40
    spec.dim = 8
    spec.n_gendered_pairs = 4
    spec.seed = 3
    synth = mf.generate_synthetic(spec)
    assert len(synth.embeddings) == 40

    lex = synth.lexicon
    basis = mf.bias_subspace(synth.embeddings, lex, 1)
    neutral = mf.GenderLexicon()  # every word neutral
    debiased = mf.hard_debias(synth.embeddings, basis, neutral)
    merged = mf.conc(mf.align([debiased, debiased], mf.AlignPolicy.union_zero))
    leak = mf.preservation_check(merged, [basis, basis], mf.MetaMethod.conc)
    assert leak <= 1e-8

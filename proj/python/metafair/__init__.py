"""Meta-embedding learning, debiasing and gender-bias evaluation toolkit.

Thin wrapper around the compiled ``_metafair`` extension. The C++ core owns
all numerics; this package re-exports its surface and adds a couple of
convenience helpers.
"""

from _metafair import (  # noqa: F401
    AlignedSources,
    AlignPolicy,
    BiasBasis,
    DebiasConfig,
    DebiasMethod,
    DictCorpus,
    EmbeddingSet,
    EvalReport,
    EvalRow,
    GenderLexicon,
    MetaConfig,
    MetaMethod,
    MetafairError,
    OptimizerConfig,
    SemBiasResult,
    SimilarityDataset,
    SimilarityResult,
    SyntheticResult,
    SyntheticSpec,
    WatGraph,
    WatPropagation,
    WeatQuery,
    WeatResult,
    align,
    avg,
    bias_subspace,
    conc,
    debias_apply,
    dict_debias,
    generate_synthetic,
    hard_debias,
    inlp_debias,
    load_dict_corpus,
    load_lexicon_json,
    load_sembias_tsv,
    load_similarity_tsv,
    load_text,
    load_wat_graph,
    meta_fit,
    pearson,
    preservation_check,
    report_to_json,
    report_to_tsv,
    run_pipeline_file,
    save_text,
    sembias,
    sif_gloss_embed,
    similarity_benchmark,
    spearman,
    svd,
    sym_eigen,
    wat_propagate,
    wat_score,
    weat,
)

__version__ = "0.1.0"


def meta_embed(sources, method="conc", **kwargs):
    """Align ``sources`` under union-zero and fit the requested meta method."""
    cfg = MetaConfig()
    cfg.method = getattr(MetaMethod, method) if isinstance(method, str) else method
    for key, value in kwargs.items():
        setattr(cfg, key, value)
    return meta_fit(align(list(sources), AlignPolicy.union_zero), cfg)


def debias(embedding, lexicon, method="hard", corpus=None, **kwargs):
    """Debias an embedding set with the named method."""
    cfg = DebiasConfig()
    cfg.method = getattr(DebiasMethod, method) if isinstance(method, str) else method
    for key, value in kwargs.items():
        setattr(cfg, key, value)
    return debias_apply(embedding, lexicon, cfg, corpus)

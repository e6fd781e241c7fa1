#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "metafair/bias_eval.hpp"
#include "metafair/debias.hpp"
#include "metafair/meta.hpp"
#include "metafair/pipeline.hpp"
#include "metafair/semantic_eval.hpp"
#include "metafair/svg_plot.hpp"
#include "metafair/synthetic.hpp"

namespace py = pybind11;
using namespace metafair;

PYBIND11_MODULE(_metafair, m) {
  m.doc() = "meta-embedding learning, debiasing and bias evaluation";

  py::register_exception<Error>(m, "MetafairError");

  py::class_<EmbeddingSet>(m, "EmbeddingSet")
      .def(py::init<std::string, std::vector<std::string>, Matrix>(), py::arg("name"),
           py::arg("vocab"), py::arg("matrix"))
      .def_property_readonly("name", &EmbeddingSet::name)
      .def_property_readonly("vocab", &EmbeddingSet::vocab)
      .def_property_readonly("dim", &EmbeddingSet::dim)
      .def_property_readonly("matrix", &EmbeddingSet::matrix)
      .def("__len__", &EmbeddingSet::size)
      .def("__contains__", &EmbeddingSet::contains)
      .def("lookup", &EmbeddingSet::lookup);

  m.def("load_text", &load_text, py::arg("path"));
  m.def("save_text", &save_text, py::arg("set"), py::arg("path"));

  py::enum_<AlignPolicy>(m, "AlignPolicy")
      .value("union_zero", AlignPolicy::union_zero)
      .value("intersection", AlignPolicy::intersection);

  py::class_<AlignedSources>(m, "AlignedSources")
      .def_readonly("union_vocab", &AlignedSources::union_vocab)
      .def_readonly("presence", &AlignedSources::presence)
      .def("padded_matrix", &AlignedSources::padded_matrix);

  m.def("align", &align, py::arg("sources"), py::arg("policy") = AlignPolicy::union_zero);

  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("n_words", &SyntheticSpec::n_words)
      .def_readwrite("dim", &SyntheticSpec::dim)
      .def_readwrite("n_gendered_pairs", &SyntheticSpec::n_gendered_pairs)
      .def_readwrite("bias_strength", &SyntheticSpec::bias_strength)
      .def_readwrite("seed", &SyntheticSpec::seed);

  py::class_<SyntheticResult>(m, "SyntheticResult")
      .def_readonly("embeddings", &SyntheticResult::embeddings)
      .def_readonly("lexicon", &SyntheticResult::lexicon)
      .def_readonly("planted_direction", &SyntheticResult::planted_direction)
      .def_readonly("male_stereotyped", &SyntheticResult::male_stereotyped)
      .def_readonly("female_stereotyped", &SyntheticResult::female_stereotyped);

  m.def("generate_synthetic", &generate_synthetic, py::arg("spec"));

  py::class_<GenderLexicon>(m, "GenderLexicon")
      .def(py::init<>())
      .def_readwrite("defining_pairs", &GenderLexicon::defining_pairs)
      .def_readwrite("seed_pairs", &GenderLexicon::seed_pairs)
      .def_readwrite("weat_queries", &GenderLexicon::weat_queries);

  m.def("load_lexicon_json", &load_lexicon_json, py::arg("path"));

  py::class_<WeatQuery>(m, "WeatQuery")
      .def(py::init<>())
      .def_readwrite("name", &WeatQuery::name)
      .def_readwrite("X", &WeatQuery::targets_x)
      .def_readwrite("Y", &WeatQuery::targets_y)
      .def_readwrite("A", &WeatQuery::attributes_a)
      .def_readwrite("B", &WeatQuery::attributes_b);

  py::enum_<MetaMethod>(m, "MetaMethod")
      .value("conc", MetaMethod::conc)
      .value("avg", MetaMethod::avg)
      .value("gle", MetaMethod::gle)
      .value("lle", MetaMethod::lle)
      .value("aeme", MetaMethod::aeme);

  py::class_<OptimizerConfig>(m, "OptimizerConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &OptimizerConfig::learning_rate)
      .def_readwrite("epochs", &OptimizerConfig::epochs)
      .def_readwrite("seed", &OptimizerConfig::seed)
      .def_readwrite("tolerance", &OptimizerConfig::tolerance);

  py::class_<MetaConfig>(m, "MetaConfig")
      .def(py::init<>())
      .def_readwrite("method", &MetaConfig::method)
      .def_readwrite("meta_dim", &MetaConfig::meta_dim)
      .def_readwrite("source_weights", &MetaConfig::source_weights)
      .def_readwrite("neighbors_per_source", &MetaConfig::neighbors_per_source)
      .def_readwrite("lambdas", &MetaConfig::lambdas)
      .def_readwrite("optimizer", &MetaConfig::optimizer);

  m.def("conc", &conc, py::arg("aligned"));
  m.def("avg", &avg, py::arg("aligned"));
  m.def("meta_fit", &meta_fit, py::arg("aligned"), py::arg("config"));

  py::enum_<DebiasMethod>(m, "DebiasMethod")
      .value("identity", DebiasMethod::identity)
      .value("hard", DebiasMethod::hard)
      .value("inlp", DebiasMethod::inlp)
      .value("dict", DebiasMethod::dict);

  py::class_<DebiasConfig>(m, "DebiasConfig")
      .def(py::init<>())
      .def_readwrite("method", &DebiasConfig::method)
      .def_readwrite("k", &DebiasConfig::k)
      .def_readwrite("m", &DebiasConfig::m)
      .def_readwrite("alpha", &DebiasConfig::alpha)
      .def_readwrite("beta", &DebiasConfig::beta)
      .def_readwrite("gamma", &DebiasConfig::gamma)
      .def_readwrite("true_rejection", &DebiasConfig::true_rejection)
      .def_readwrite("optimizer", &DebiasConfig::optimizer);

  py::class_<BiasBasis>(m, "BiasBasis")
      .def(py::init<>())
      .def_readwrite("directions", &BiasBasis::directions)
      .def("validate", &BiasBasis::validate);

  py::class_<DictCorpus>(m, "DictCorpus")
      .def(py::init<>())
      .def_readwrite("glosses", &DictCorpus::glosses)
      .def_readwrite("unigram_probs", &DictCorpus::unigram_probs)
      .def_readwrite("sif_a", &DictCorpus::sif_a);

  m.def("load_dict_corpus", &load_dict_corpus, py::arg("gloss_tsv"), py::arg("probs_json"),
        py::arg("sif_a") = 1e-3);
  m.def(
      "bias_subspace",
      [](const EmbeddingSet& set, const GenderLexicon& lex, Eigen::Index k) {
        return bias_subspace(set, lex, k);
      },
      py::arg("set"), py::arg("lexicon"), py::arg("k") = 1);
  m.def(
      "hard_debias",
      [](const EmbeddingSet& set, const BiasBasis& basis, const GenderLexicon& lex) {
        return hard_debias(set, basis, lex);
      },
      py::arg("set"), py::arg("basis"), py::arg("lexicon"));
  m.def(
      "inlp_debias",
      [](const EmbeddingSet& set, const GenderLexicon& lex, const DebiasConfig& cfg) {
        auto r = inlp_debias(set, lex, cfg);
        return py::make_tuple(r.debiased, r.projection);
      },
      py::arg("set"), py::arg("lexicon"), py::arg("config"));
  m.def(
      "dict_debias",
      [](const EmbeddingSet& set, const DictCorpus& corpus, const DebiasConfig& cfg) {
        return dict_debias(set, corpus, cfg).debiased;
      },
      py::arg("set"), py::arg("corpus"), py::arg("config"));
  m.def(
      "sif_gloss_embed",
      [](const EmbeddingSet& set, const DictCorpus& corpus, bool remove_first_pc) {
        SifOptions opts;
        opts.remove_first_pc = remove_first_pc;
        opts.skip_empty_glosses = true;
        return sif_gloss_embed(set, corpus, opts);
      },
      py::arg("set"), py::arg("corpus"), py::arg("remove_first_pc") = true);
  m.def("preservation_check", &preservation_check, py::arg("meta"), py::arg("bases"),
        py::arg("mode"));
  m.def(
      "debias_apply",
      [](const EmbeddingSet& set, const GenderLexicon& lex, const DebiasConfig& cfg,
         const std::optional<DictCorpus>& corpus) {
        return debias_apply(set, lex, corpus ? &*corpus : nullptr, cfg);
      },
      py::arg("set"), py::arg("lexicon"), py::arg("config"), py::arg("corpus") = std::nullopt);

  py::class_<WeatResult>(m, "WeatResult")
      .def_readonly("s_score", &WeatResult::s_score)
      .def_readonly("effect_size", &WeatResult::effect_size)
      .def_readonly("p_value", &WeatResult::p_value)
      .def_readonly("exact", &WeatResult::exact);

  m.def("weat", &weat, py::arg("set"), py::arg("query"), py::arg("n_permutations") = 10000,
        py::arg("seed") = 1);

  py::class_<WatGraph>(m, "WatGraph")
      .def_readonly("nodes", &WatGraph::nodes)
      .def_readonly("weights", &WatGraph::weights)
      .def_readonly("seed_pairs", &WatGraph::seed_pairs);

  m.def("load_wat_graph", &load_wat_graph, py::arg("edges_tsv"), py::arg("seeds_json"));

  py::class_<WatPropagation>(m, "WatPropagation")
      .def_readonly("scores", &WatPropagation::scores)
      .def_readonly("iterations", &WatPropagation::iterations)
      .def_readonly("residual", &WatPropagation::residual);

  m.def("wat_propagate", &wat_propagate, py::arg("graph"), py::arg("alpha") = 0.85,
        py::arg("tol") = 1e-10, py::arg("max_iters") = 10000);
  m.def("wat_score", &wat_score, py::arg("set"), py::arg("graph"), py::arg("props"),
        py::arg("eps") = 1e-12);

  py::class_<SemBiasResult>(m, "SemBiasResult")
      .def_readonly("definition_pct", &SemBiasResult::definition_pct)
      .def_readonly("stereotype_pct", &SemBiasResult::stereotype_pct)
      .def_readonly("none_pct", &SemBiasResult::none_pct)
      .def_readonly("n_scored", &SemBiasResult::n_scored)
      .def_readonly("n_skipped", &SemBiasResult::n_skipped);

  m.def("load_sembias_tsv", &load_sembias_tsv, py::arg("path"));
  m.def("sembias", &sembias, py::arg("set"), py::arg("instances"), py::arg("direction_pair"),
        py::arg("subset_only") = false);

  py::class_<SimilarityDataset>(m, "SimilarityDataset")
      .def_readonly("name", &SimilarityDataset::name);

  m.def("load_similarity_tsv", &load_similarity_tsv, py::arg("path"), py::arg("name") = "");

  py::class_<SimilarityResult>(m, "SimilarityResult")
      .def_readonly("spearman", &SimilarityResult::spearman)
      .def_readonly("n_scored", &SimilarityResult::n_scored)
      .def_readonly("n_skipped", &SimilarityResult::n_skipped);

  m.def("similarity_benchmark", &similarity_benchmark, py::arg("set"), py::arg("data"));

  py::class_<EvalRow>(m, "EvalRow")
      .def_readonly("label", &EvalRow::label)
      .def_readonly("metric", &EvalRow::metric)
      .def_readonly("score", &EvalRow::score)
      .def_readonly("n_skipped", &EvalRow::n_skipped);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("rows", &EvalReport::rows)
      .def_readonly("spec_hash", &EvalReport::spec_hash)
      .def_readonly("seed", &EvalReport::seed);

  m.def("report_to_tsv", &report_to_tsv);
  m.def("report_to_json", &report_to_json);

  m.def(
      "run_pipeline_file",
      [](const std::string& spec_path) {
        const PipelineSpecFile spec = load_pipeline_spec(spec_path);
        const PipelineInputs inputs = load_pipeline_inputs(spec);
        auto result = run_pipeline(inputs, spec.config);
        return py::make_tuple(result.meta, result.report);
      },
      py::arg("spec_path"));

  m.def("spearman", &spearman, py::arg("a"), py::arg("b"));
  m.def("pearson", &pearson, py::arg("a"), py::arg("b"));
  m.def(
      "svd",
      [](const Eigen::MatrixXd& M, Eigen::Index k) {
        auto s = svd(M, k);
        return py::make_tuple(s.values, s.left, s.vectors);
      },
      py::arg("matrix"), py::arg("k"));
  m.def(
      "sym_eigen",
      [](const Eigen::MatrixXd& S) {
        auto s = sym_eigen(S);
        return py::make_tuple(s.values, s.vectors);
      },
      py::arg("matrix"));
}

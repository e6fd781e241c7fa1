#pragma once

#include <optional>

#include "metafair/bias_eval.hpp"
#include "metafair/debias.hpp"
#include "metafair/meta.hpp"
#include "metafair/report.hpp"
#include "metafair/semantic_eval.hpp"

namespace metafair {

enum class Regime { msnd, mssd_pre, mssd_post, mssd_both, ssmd };
enum class MssdStage { pre, post, both };

Regime regime_from_string(const std::string& s);
std::string to_string(Regime r);

// In-memory pipeline inputs; the file-backed loader fills this from a spec.
struct PipelineInputs {
  std::vector<EmbeddingSet> sources;
  GenderLexicon lexicon;
  std::optional<DictCorpus> corpus;

  std::vector<WeatQuery> weat_queries;
  std::optional<WatGraph> wat_graph;
  std::vector<SemBiasInstance> sembias_instances;
  std::vector<SimilarityDataset> similarity_datasets;
};

struct PipelineConfig {
  Regime regime = Regime::msnd;
  MetaConfig meta;
  std::vector<DebiasConfig> debias;  // one entry for mssd, M entries for ssmd
  std::vector<std::string> evaluations;  // subset of weat|wat|sembias|similarity
  unsigned long long seed = 1;
  std::size_t weat_permutations = 10000;
  std::pair<std::string, std::string> sembias_direction = {"he", "she"};
  bool sembias_subset_only = false;
  bool evaluate_sources = false;  // add one row block per raw source
  std::string spec_hash;          // provenance, filled by the spec loader
};

struct PipelineResult {
  EmbeddingSet meta;
  EvalReport report;
};

PipelineResult run_msnd(const PipelineInputs& inputs, const PipelineConfig& cfg);
PipelineResult run_mssd(const PipelineInputs& inputs, const PipelineConfig& cfg, MssdStage stage);
PipelineResult run_ssmd(const PipelineInputs& inputs, const PipelineConfig& cfg);

// Dispatch on cfg.regime.
PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& cfg);

// Evaluation battery in the fixed order weat, wat, sembias, similarity;
// appends one row block for `set` under `label`.
void evaluate_embedding(const EmbeddingSet& set, const std::string& label,
                        const PipelineInputs& inputs, const PipelineConfig& cfg,
                        EvalReport* report);

// ---- file-backed spec ----

struct PipelineSpecFile {
  std::vector<std::string> source_paths;
  std::string lexicon_path;
  std::string gloss_path;
  std::string probs_path;
  double sif_a = 1e-3;
  std::string weat_path;
  std::string wat_graph_path;
  std::string wat_seeds_path;
  std::string sembias_path;
  std::vector<std::pair<std::string, std::string>> similarity_paths;  // (name, path)
  PipelineConfig config;
};

// Parses and validates the JSON pipeline spec; the returned config carries the
// canonical spec hash for provenance.
PipelineSpecFile load_pipeline_spec(const std::string& path);
PipelineInputs load_pipeline_inputs(const PipelineSpecFile& spec);

}  // namespace metafair

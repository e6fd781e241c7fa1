#include "metafair/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace metafair {

using nlohmann::json;

Regime regime_from_string(const std::string& s) {
  if (s == "msnd") return Regime::msnd;
  if (s == "mssd-pre") return Regime::mssd_pre;
  if (s == "mssd-post") return Regime::mssd_post;
  if (s == "mssd-both") return Regime::mssd_both;
  if (s == "ssmd") return Regime::ssmd;
  throw ConfigError("unknown regime: " + s);
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::msnd: return "msnd";
    case Regime::mssd_pre: return "mssd-pre";
    case Regime::mssd_post: return "mssd-post";
    case Regime::mssd_both: return "mssd-both";
    case Regime::ssmd: return "ssmd";
  }
  return "?";
}

namespace {

std::string config_fingerprint(const PipelineConfig& cfg, const std::string& label) {
  json j{{"regime", to_string(cfg.regime)},
         {"meta", to_string(cfg.meta.method)},
         {"meta_dim", cfg.meta.meta_dim},
         {"seed", cfg.seed},
         {"label", label}};
  json methods = json::array();
  for (const auto& d : cfg.debias) methods.push_back(to_string(d.method));
  j["debias"] = methods;
  return fnv1a_hex(j.dump());
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

std::string stage_name(MssdStage s) {
  switch (s) {
    case MssdStage::pre: return "pre";
    case MssdStage::post: return "post";
    case MssdStage::both: return "both";
  }
  return "?";
}

MetaConfig seeded_meta(const PipelineConfig& cfg) {
  MetaConfig meta = cfg.meta;
  meta.optimizer.seed = cfg.seed;
  return meta;
}

DebiasConfig seeded_debias(const DebiasConfig& d, unsigned long long seed) {
  DebiasConfig out = d;
  out.optimizer.seed = seed;
  return out;
}

const DictCorpus* corpus_ptr(const PipelineInputs& inputs) {
  return inputs.corpus ? &*inputs.corpus : nullptr;
}

void append_rows(EvalReport* report, const PipelineConfig& cfg, const std::string& label,
                 const std::string& meta_method, const std::string& debias_method,
                 const std::string& stage, std::vector<EvalRow>&& rows) {
  const std::string fp = config_fingerprint(cfg, label);
  for (auto& r : rows) {
    r.label = label;
    r.fingerprint = fp;
    r.meta_method = meta_method;
    r.debias_method = debias_method;
    r.stage = stage;
    report->rows.push_back(std::move(r));
  }
}

std::string debias_label(const PipelineConfig& cfg) {
  if (cfg.debias.empty()) return "none";
  std::string out;
  for (const auto& d : cfg.debias) {
    if (!out.empty()) out += "+";
    out += to_string(d.method);
  }
  return out;
}

struct RowTags {
  std::string meta_method;
  std::string debias_method;
  std::string stage;
};

void evaluate_with_tags(const EmbeddingSet& set, const std::string& label,
                        const PipelineInputs& inputs, const PipelineConfig& cfg,
                        const RowTags& tags, EvalReport* report) {
  auto wants = [&](const std::string& name) {
    return std::find(cfg.evaluations.begin(), cfg.evaluations.end(), name) !=
           cfg.evaluations.end();
  };
  std::vector<EvalRow> rows;

  if (wants("weat") && !inputs.weat_queries.empty()) {
    double abs_sum = 0.0;
    std::size_t used = 0, skipped_total = 0;
    for (const auto& q : inputs.weat_queries) {
      std::size_t skipped = 0;
      const WeatQuery filtered = filter_weat_query(set, q, &skipped);
      skipped_total += skipped;
      if (filtered.targets_x.empty() || filtered.attributes_a.empty() ||
          filtered.attributes_b.empty())
        continue;
      const WeatResult r = weat(set, filtered, cfg.weat_permutations, cfg.seed);
      EvalRow row;
      row.metric = "weat:" + q.name;
      row.score = r.effect_size;
      row.n_skipped = skipped;
      rows.push_back(std::move(row));
      abs_sum += std::abs(r.effect_size);
      ++used;
    }
    EvalRow summary;
    summary.metric = "weat";
    summary.score = used > 0 ? abs_sum / static_cast<double>(used) : 0.0;
    summary.n_skipped = skipped_total;
    rows.push_back(std::move(summary));
  }

  if (wants("wat") && inputs.wat_graph) {
    const WatPropagation props = wat_propagate(*inputs.wat_graph);
    EvalRow row;
    row.metric = "wat";
    row.score = wat_score(set, *inputs.wat_graph, props);
    rows.push_back(std::move(row));
  }

  if (wants("sembias") && !inputs.sembias_instances.empty()) {
    const SemBiasResult r =
        sembias(set, inputs.sembias_instances, cfg.sembias_direction, cfg.sembias_subset_only);
    EvalRow row;
    row.metric = "sembias";
    row.score = round1(r.stereotype_pct + r.none_pct);
    row.n_skipped = r.n_skipped;
    rows.push_back(std::move(row));
  }

  if (wants("similarity")) {
    for (const auto& ds : inputs.similarity_datasets) {
      const SimilarityResult r = similarity_benchmark(set, ds);
      EvalRow row;
      row.metric = "similarity:" + ds.name;
      row.score = round1(100.0 * r.spearman);
      row.n_skipped = r.n_skipped;
      rows.push_back(std::move(row));
    }
  }

  append_rows(report, cfg, label, tags.meta_method, tags.debias_method, tags.stage,
              std::move(rows));
}

PipelineResult finish(EmbeddingSet meta, const std::string& label, const PipelineInputs& inputs,
                      const PipelineConfig& cfg) {
  PipelineResult result{std::move(meta), {}};
  result.report.spec_hash = cfg.spec_hash;
  result.report.seed = cfg.seed;
  if (cfg.evaluate_sources) {
    for (const auto& src : inputs.sources)
      evaluate_with_tags(src, "source:" + src.name(), inputs, cfg, {"source", "none", ""},
                         &result.report);
  }
  evaluate_embedding(result.meta, label, inputs, cfg, &result.report);
  return result;
}

}  // namespace

void evaluate_embedding(const EmbeddingSet& set, const std::string& label,
                        const PipelineInputs& inputs, const PipelineConfig& cfg,
                        EvalReport* report) {
  const std::string stage = cfg.regime == Regime::mssd_pre    ? "pre"
                            : cfg.regime == Regime::mssd_post ? "post"
                            : cfg.regime == Regime::mssd_both ? "both"
                                                              : "";
  evaluate_with_tags(set, label, inputs, cfg,
                     {to_string(cfg.meta.method), debias_label(cfg), stage}, report);
}

PipelineResult run_msnd(const PipelineInputs& inputs, const PipelineConfig& cfg) {
  if (inputs.sources.empty()) throw ConfigError("msnd needs at least one source");
  const auto aligned = align(inputs.sources, AlignPolicy::union_zero);
  EmbeddingSet meta = meta_fit(aligned, seeded_meta(cfg));
  return finish(std::move(meta), "msnd:" + to_string(cfg.meta.method), inputs, cfg);
}

PipelineResult run_mssd(const PipelineInputs& inputs, const PipelineConfig& cfg, MssdStage stage) {
  if (inputs.sources.empty()) throw ConfigError("mssd needs at least one source");
  if (cfg.debias.size() != 1) throw ConfigError("mssd uses exactly one debias config");
  const DebiasConfig& dcfg = cfg.debias.front();
  const DictCorpus* corpus = corpus_ptr(inputs);
  if (dcfg.method == DebiasMethod::dict && !corpus)
    throw ConfigError("dict debiasing requires a gloss corpus");

  std::vector<EmbeddingSet> stage_sources;
  if (stage == MssdStage::pre || stage == MssdStage::both) {
    for (std::size_t j = 0; j < inputs.sources.size(); ++j)
      stage_sources.push_back(debias_apply(inputs.sources[j], inputs.lexicon, corpus,
                                           seeded_debias(dcfg, cfg.seed + j)));
  } else {
    stage_sources = inputs.sources;
  }

  const auto aligned = align(stage_sources, AlignPolicy::union_zero);
  EmbeddingSet meta = meta_fit(aligned, seeded_meta(cfg));

  if (stage == MssdStage::post || stage == MssdStage::both) {
    // fresh fit in the meta space; source-space artifacts do not transfer
    meta = debias_apply(meta, inputs.lexicon, corpus,
                        seeded_debias(dcfg, cfg.seed + inputs.sources.size()));
  }

  const std::string label = "mssd-" + stage_name(stage) + ":" + to_string(dcfg.method) + "+" +
                            to_string(cfg.meta.method);
  return finish(std::move(meta), label, inputs, cfg);
}

PipelineResult run_ssmd(const PipelineInputs& inputs, const PipelineConfig& cfg) {
  if (inputs.sources.size() != 1) throw ConfigError("ssmd uses exactly one source");
  if (cfg.debias.empty()) throw ConfigError("ssmd needs at least one debias config");
  const DictCorpus* corpus = corpus_ptr(inputs);

  std::vector<EmbeddingSet> variants;
  for (std::size_t i = 0; i < cfg.debias.size(); ++i) {
    if (cfg.debias[i].method == DebiasMethod::dict && !corpus)
      throw ConfigError("dict debiasing requires a gloss corpus");
    variants.push_back(debias_apply(inputs.sources.front(), inputs.lexicon, corpus,
                                    seeded_debias(cfg.debias[i], cfg.seed + i)));
  }

  const auto aligned = align(variants, AlignPolicy::union_zero);
  EmbeddingSet meta = meta_fit(aligned, seeded_meta(cfg));
  return finish(std::move(meta), "ssmd:" + debias_label(cfg) + "+" + to_string(cfg.meta.method),
                inputs, cfg);
}

PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& cfg) {
  switch (cfg.regime) {
    case Regime::msnd: return run_msnd(inputs, cfg);
    case Regime::mssd_pre: return run_mssd(inputs, cfg, MssdStage::pre);
    case Regime::mssd_post: return run_mssd(inputs, cfg, MssdStage::post);
    case Regime::mssd_both: return run_mssd(inputs, cfg, MssdStage::both);
    case Regime::ssmd: return run_ssmd(inputs, cfg);
  }
  throw ConfigError("unknown regime");
}

PipelineSpecFile load_pipeline_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("invalid json in ") + path + ": " + e.what());
  }

  PipelineSpecFile spec;
  spec.config.spec_hash = fnv1a_hex(j.dump());

  // relative paths resolve against the spec file's directory
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&base](const std::string& p) {
    if (p.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (base / p).string();
  };

  if (!j.contains("sources") || !j["sources"].is_array() || j["sources"].empty())
    throw ConfigError("spec needs a non-empty \"sources\" array");
  for (const auto& s : j["sources"]) spec.source_paths.push_back(resolve(s.get<std::string>()));

  spec.config.regime = regime_from_string(j.value("regime", "msnd"));
  spec.config.seed = j.value("seed", 1ULL);

  if (j.contains("meta")) {
    const auto& m = j["meta"];
    spec.config.meta.method = meta_method_from_string(m.value("method", "conc"));
    spec.config.meta.meta_dim = m.value("dim", 0);
    spec.config.meta.neighbors_per_source = m.value("neighbors", 5);
    if (m.contains("weights"))
      spec.config.meta.source_weights = m["weights"].get<std::vector<double>>();
    if (m.contains("lambdas")) spec.config.meta.lambdas = m["lambdas"].get<std::vector<double>>();
    spec.config.meta.optimizer.epochs = m.value("epochs", 100);
    spec.config.meta.optimizer.learning_rate = m.value("learning_rate", 0.1);
  }

  auto parse_debias = [](const json& d) {
    DebiasConfig cfg;
    cfg.method = debias_method_from_string(d.value("method", "hard"));
    cfg.k = d.value("k", 1);
    cfg.m = d.value("m", 35);
    cfg.alpha = d.value("alpha", 0.2);
    cfg.beta = d.value("beta", 0.4);
    cfg.gamma = d.value("gamma", 0.4);
    cfg.true_rejection = d.value("true_rejection", true);
    cfg.optimizer.epochs = d.value("epochs", 100);
    cfg.optimizer.learning_rate = d.value("learning_rate", 0.1);
    cfg.validate();
    return cfg;
  };
  if (j.contains("debias")) {
    if (j["debias"].is_array()) {
      for (const auto& d : j["debias"]) spec.config.debias.push_back(parse_debias(d));
    } else {
      spec.config.debias.push_back(parse_debias(j["debias"]));
    }
  }

  spec.lexicon_path = resolve(j.value("lexicon", ""));
  if (j.contains("dict_corpus")) {
    const auto& d = j["dict_corpus"];
    spec.gloss_path = resolve(d.value("glosses", ""));
    spec.probs_path = resolve(d.value("unigram_probs", ""));
    spec.sif_a = d.value("sif_a", 1e-3);
  }

  if (j.contains("evaluations"))
    spec.config.evaluations = j["evaluations"].get<std::vector<std::string>>();
  for (const auto& e : spec.config.evaluations) {
    if (e != "weat" && e != "wat" && e != "sembias" && e != "similarity")
      throw ConfigError("unknown evaluation: " + e);
  }

  if (j.contains("eval_data")) {
    const auto& d = j["eval_data"];
    spec.weat_path = resolve(d.value("weat", ""));
    spec.wat_graph_path = resolve(d.value("wat_graph", ""));
    spec.wat_seeds_path = resolve(d.value("wat_seeds", ""));
    spec.sembias_path = resolve(d.value("sembias", ""));
    if (d.contains("similarity")) {
      for (const auto& s : d["similarity"])
        spec.similarity_paths.emplace_back(s.value("name", "sim"), resolve(s.at("path").get<std::string>()));
    }
  }
  if (j.contains("sembias_direction")) {
    spec.config.sembias_direction = {j["sembias_direction"][0].get<std::string>(),
                                     j["sembias_direction"][1].get<std::string>()};
  }
  spec.config.sembias_subset_only = j.value("sembias_subset_only", false);
  spec.config.evaluate_sources = j.value("evaluate_sources", false);
  spec.config.weat_permutations = j.value("weat_permutations", 10000ULL);

  // regime invariants hold at the spec-file boundary
  const std::size_t n_sources = spec.source_paths.size();
  const std::size_t n_debias = spec.config.debias.size();
  switch (spec.config.regime) {
    case Regime::msnd:
      if (n_sources < 2) throw ConfigError("msnd requires at least two sources");
      break;
    case Regime::mssd_pre:
    case Regime::mssd_post:
    case Regime::mssd_both:
      if (n_sources < 2) throw ConfigError("mssd requires at least two sources");
      if (n_debias != 1) throw ConfigError("mssd requires exactly one debias config");
      break;
    case Regime::ssmd:
      if (n_sources != 1) throw ConfigError("ssmd requires exactly one source");
      if (n_debias < 2) throw ConfigError("ssmd requires at least two debias configs");
      break;
  }
  return spec;
}

PipelineInputs load_pipeline_inputs(const PipelineSpecFile& spec) {
  PipelineInputs inputs;
  for (const auto& p : spec.source_paths) inputs.sources.push_back(load_text(p));
  if (!spec.lexicon_path.empty()) inputs.lexicon = load_lexicon_json(spec.lexicon_path);
  if (!spec.gloss_path.empty()) {
    if (spec.probs_path.empty())
      throw ConfigError("dict_corpus needs both glosses and unigram_probs");
    inputs.corpus = load_dict_corpus(spec.gloss_path, spec.probs_path, spec.sif_a);
  }
  if (!spec.weat_path.empty()) inputs.weat_queries = load_weat_json(spec.weat_path);
  if (inputs.weat_queries.empty() && !inputs.lexicon.weat_queries.empty())
    inputs.weat_queries = inputs.lexicon.weat_queries;
  if (!spec.wat_graph_path.empty()) {
    if (spec.wat_seeds_path.empty()) throw ConfigError("wat needs both a graph and seed pairs");
    inputs.wat_graph = load_wat_graph(spec.wat_graph_path, spec.wat_seeds_path);
  }
  if (!spec.sembias_path.empty()) inputs.sembias_instances = load_sembias_tsv(spec.sembias_path);
  for (const auto& [name, path] : spec.similarity_paths)
    inputs.similarity_datasets.push_back(load_similarity_tsv(path, name));
  return inputs;
}

}  // namespace metafair

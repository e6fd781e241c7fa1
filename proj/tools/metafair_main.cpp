#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "metafair/bias_eval.hpp"
#include "metafair/debias.hpp"
#include "metafair/meta.hpp"
#include "metafair/pipeline.hpp"
#include "metafair/semantic_eval.hpp"
#include "metafair/svg_plot.hpp"
#include "metafair/synthetic.hpp"

namespace {

constexpr const char* kVersion = "metafair 0.1.0";

using nlohmann::json;
using namespace metafair;

void warn_notes(const DebiasNotes& notes) {
  if (!notes.missing_tokens.empty()) {
    std::cerr << "warning: " << notes.missing_tokens.size()
              << " lexicon token(s) missing from the vocabulary\n";
  }
  for (const auto& w : notes.degenerate_words)
    std::cerr << "warning: degenerate vector left unchanged: " << w << "\n";
  for (const auto& w : notes.empty_gloss_words)
    std::cerr << "warning: gloss resolves to no known tokens: " << w << "\n";
  for (const auto& w : notes.zero_gloss_words)
    std::cerr << "warning: zero gloss vector, excluded from the orthogonality term: " << w << "\n";
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot open " + out_path + " for writing");
  out << j.dump(2) << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"meta-embedding learning, debiasing and bias evaluation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  unsigned long long seed = 1;
  auto* seed_opt = app.add_option("--seed", seed, "global random seed")->capture_default_str();

  // ---- convert ----
  auto* convert = app.add_subcommand("convert", "re-encode an embedding file (text or .gz)");
  std::string conv_in, conv_out;
  convert->add_option("--in", conv_in, "input embedding file")->required();
  convert->add_option("--out", conv_out, "output embedding file")->required();

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a planted-bias synthetic embedding");
  SyntheticSpec synth_spec;
  std::string synth_out, synth_lex_out;
  synth->add_option("--out", synth_out, "output embedding file")->required();
  synth->add_option("--lexicon-out", synth_lex_out, "output lexicon json");
  synth->add_option("--words", synth_spec.n_words, "vocabulary size")->capture_default_str();
  synth->add_option("--dim", synth_spec.dim, "dimensionality")->capture_default_str();
  synth->add_option("--pairs", synth_spec.n_gendered_pairs, "gender-definitional pairs")
      ->capture_default_str();
  synth->add_option("--bias", synth_spec.bias_strength, "planted bias strength")
      ->capture_default_str();

  // ---- meta ----
  auto* meta_cmd = app.add_subcommand("meta", "learn a meta-embedding from source files");
  std::string meta_method = "conc", meta_out;
  std::vector<std::string> meta_sources;
  MetaConfig meta_cfg;
  meta_cmd->add_option("--method", meta_method, "conc|avg|gle|lle|aeme")->capture_default_str();
  meta_cmd->add_option("--sources", meta_sources, "source embedding files")
      ->required()
      ->expected(-1);
  meta_cmd->add_option("--out", meta_out, "output embedding file")->required();
  meta_cmd->add_option("--dim", meta_cfg.meta_dim, "meta dimensionality (0 = max source dim)");
  meta_cmd->add_option("--neighbors", meta_cfg.neighbors_per_source, "lle neighbours per source")
      ->capture_default_str();
  meta_cmd->add_option("--epochs", meta_cfg.optimizer.epochs, "training epochs")
      ->capture_default_str();
  meta_cmd->add_option("--learning-rate", meta_cfg.optimizer.learning_rate, "step size")
      ->capture_default_str();

  // ---- debias ----
  auto* debias_cmd = app.add_subcommand("debias", "debias an embedding file");
  std::string debias_method = "hard", debias_in, debias_lex, debias_out, debias_gloss, debias_probs;
  DebiasConfig debias_cfg;
  debias_cmd->add_option("--method", debias_method, "hard|inlp|dict|identity")
      ->capture_default_str();
  debias_cmd->add_option("--in", debias_in, "input embedding file")->required();
  debias_cmd->add_option("--lexicon", debias_lex, "lexicon json")->required();
  debias_cmd->add_option("--out", debias_out, "output embedding file")->required();
  debias_cmd->add_option("--k", debias_cfg.k, "bias subspace rank")->capture_default_str();
  debias_cmd->add_option("--m", debias_cfg.m, "inlp iterations")->capture_default_str();
  debias_cmd->add_option("--alpha", debias_cfg.alpha, "dict reconstruction weight")
      ->capture_default_str();
  debias_cmd->add_option("--beta", debias_cfg.beta, "dict gloss weight")->capture_default_str();
  debias_cmd->add_option("--gamma", debias_cfg.gamma, "dict orthogonality weight")
      ->capture_default_str();
  debias_cmd->add_option("--epochs", debias_cfg.optimizer.epochs, "training epochs")
      ->capture_default_str();
  debias_cmd->add_option("--glosses", debias_gloss, "dict gloss tsv");
  debias_cmd->add_option("--probs", debias_probs, "dict unigram probability json");
  bool printed_rejection = false;
  debias_cmd->add_flag("--printed-rejection", printed_rejection,
                       "use the single-norm rejection variant instead of true rejection");

  // ---- eval-bias ----
  auto* eval_bias = app.add_subcommand("eval-bias", "run a bias metric on an embedding file");
  std::string eb_metric, eb_in, eb_data, eb_seeds, eb_out;
  std::vector<std::string> eb_direction{"he", "she"};
  std::size_t eb_permutations = 10000;
  eval_bias->add_option("--metric", eb_metric, "weat|wat|sembias")->required();
  eval_bias->add_option("--in", eb_in, "embedding file")->required();
  eval_bias->add_option("--data", eb_data, "metric data file")->required();
  eval_bias->add_option("--seeds", eb_seeds, "wat seed-pair json");
  eval_bias->add_option("--permutations", eb_permutations, "weat monte-carlo draws")
      ->capture_default_str();
  eval_bias->add_option("--direction", eb_direction, "sembias direction pair")->expected(2);
  eval_bias->add_option("--out", eb_out, "write the json result here instead of stdout");

  // ---- eval-sim ----
  auto* eval_sim = app.add_subcommand("eval-sim", "similarity benchmark on an embedding file");
  std::string es_in, es_data, es_out;
  eval_sim->add_option("--in", es_in, "embedding file")->required();
  eval_sim->add_option("--data", es_data, "tsv dataset: a<TAB>b<TAB>rating")->required();
  eval_sim->add_option("--out", es_out, "write the json result here instead of stdout");

  // ---- pipeline ----
  auto* pipeline_cmd = app.add_subcommand("pipeline", "run a full spec file");
  std::string pl_spec, pl_out, pl_meta_out, pl_format = "tsv";
  pipeline_cmd->add_option("--spec", pl_spec, "pipeline spec json")->required();
  pipeline_cmd->add_option("--out", pl_out, "report output path")->required();
  pipeline_cmd->add_option("--meta-out", pl_meta_out, "also save the meta-embedding here");
  pipeline_cmd->add_option("--format", pl_format, "tsv|json")->capture_default_str();

  // ---- plot ----
  auto* plot_cmd = app.add_subcommand("plot", "scatter two report metrics as svg");
  std::string plot_rx, plot_ry, plot_out;
  PlotOptions plot_opts;
  plot_cmd->add_option("--report-x", plot_rx, "report file for the x axis")->required();
  plot_cmd->add_option("--report-y", plot_ry, "report file for the y axis (defaults to x)");
  plot_cmd->add_option("--x", plot_opts.x_metric, "x metric name")->required();
  plot_cmd->add_option("--y", plot_opts.y_metric, "y metric name")->required();
  plot_cmd->add_option("--out", plot_out, "output svg path")->required();
  plot_cmd->add_option("--width", plot_opts.width, "svg width")->capture_default_str();
  plot_cmd->add_option("--height", plot_opts.height, "svg height")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // every usage problem maps to exit 2
  }

  if (convert->parsed()) {
    save_text(load_text(conv_in), conv_out);
    return 0;
  }

  if (synth->parsed()) {
    synth_spec.seed = seed;
    const auto result = generate_synthetic(synth_spec);
    save_text(result.embeddings, synth_out);
    if (!synth_lex_out.empty()) {
      json lex;
      json dp = json::array(), sp = json::array();
      for (const auto& [m, f] : result.lexicon.defining_pairs) dp.push_back({m, f});
      for (const auto& [m, f] : result.lexicon.seed_pairs) sp.push_back({m, f});
      lex["defining_pairs"] = dp;
      lex["seed_pairs"] = sp;
      json queries = json::array();
      for (const auto& q : result.lexicon.weat_queries) {
        queries.push_back({{"name", q.name},
                           {"X", q.targets_x},
                           {"Y", q.targets_y},
                           {"A", q.attributes_a},
                           {"B", q.attributes_b}});
      }
      lex["weat_queries"] = queries;
      std::ofstream out(synth_lex_out, std::ios::binary);
      if (!out) throw IoError("cannot open " + synth_lex_out + " for writing");
      out << lex.dump(2) << "\n";
    }
    return 0;
  }

  if (meta_cmd->parsed()) {
    meta_cfg.method = meta_method_from_string(meta_method);
    meta_cfg.optimizer.seed = seed;
    std::vector<EmbeddingSet> sources;
    for (const auto& p : meta_sources) sources.push_back(load_text(p));
    const auto aligned = align(sources, AlignPolicy::union_zero);
    save_text(meta_fit(aligned, meta_cfg), meta_out);
    return 0;
  }

  if (debias_cmd->parsed()) {
    debias_cfg.method = debias_method_from_string(debias_method);
    debias_cfg.true_rejection = !printed_rejection;
    debias_cfg.optimizer.seed = seed;
    const EmbeddingSet set = load_text(debias_in);
    const GenderLexicon lex = load_lexicon_json(debias_lex);
    std::optional<DictCorpus> corpus;
    if (!debias_gloss.empty()) {
      if (debias_probs.empty()) throw ConfigError("--glosses requires --probs");
      corpus = load_dict_corpus(debias_gloss, debias_probs);
    }
    DebiasNotes notes;
    const EmbeddingSet debiased =
        debias_apply(set, lex, corpus ? &*corpus : nullptr, debias_cfg, &notes);
    warn_notes(notes);
    save_text(debiased, debias_out);
    return 0;
  }

  if (eval_bias->parsed()) {
    const EmbeddingSet set = load_text(eb_in);
    json out;
    if (eb_metric == "weat") {
      const auto queries = load_weat_json(eb_data);
      if (queries.empty()) throw ConfigError("no weat queries in " + eb_data);
      json per_query = json::array();
      double abs_sum = 0.0;
      for (const auto& q : queries) {
        const WeatResult r = weat(set, q, eb_permutations, seed);
        per_query.push_back({{"name", q.name},
                             {"effect_size", r.effect_size},
                             {"p_value", r.p_value},
                             {"s_score", r.s_score},
                             {"exact", r.exact}});
        abs_sum += std::abs(r.effect_size);
      }
      out["metric"] = "weat";
      out["queries"] = per_query;
      out["mean_abs_effect"] = abs_sum / static_cast<double>(queries.size());
    } else if (eb_metric == "wat") {
      if (eb_seeds.empty()) throw ConfigError("wat needs --seeds");
      const WatGraph graph = load_wat_graph(eb_data, eb_seeds);
      const WatPropagation props = wat_propagate(graph);
      out["metric"] = "wat";
      out["pearson"] = wat_score(set, graph, props);
      out["iterations"] = props.iterations;
    } else if (eb_metric == "sembias") {
      const auto instances = load_sembias_tsv(eb_data);
      const SemBiasResult r = sembias(set, instances, {eb_direction[0], eb_direction[1]});
      out["metric"] = "sembias";
      out["definition_pct"] = r.definition_pct;
      out["stereotype_pct"] = r.stereotype_pct;
      out["none_pct"] = r.none_pct;
      out["stereotype_plus_none_pct"] = r.stereotype_pct + r.none_pct;
      out["n_scored"] = r.n_scored;
      out["n_skipped"] = r.n_skipped;
    } else {
      throw ConfigError("unknown bias metric: " + eb_metric);
    }
    emit(out, eb_out);
    return 0;
  }

  if (eval_sim->parsed()) {
    const EmbeddingSet set = load_text(es_in);
    const SimilarityResult r = similarity_benchmark(set, load_similarity_tsv(es_data));
    json out{{"metric", "similarity"},
             {"spearman", r.spearman},
             {"score_x100", std::round(1000.0 * r.spearman) / 10.0},
             {"n_scored", r.n_scored},
             {"n_skipped", r.n_skipped}};
    emit(out, es_out);
    return 0;
  }

  if (pipeline_cmd->parsed()) {
    PipelineSpecFile spec = load_pipeline_spec(pl_spec);
    if (seed_opt->count() > 0) spec.config.seed = seed;
    const PipelineInputs inputs = load_pipeline_inputs(spec);
    const PipelineResult result = run_pipeline(inputs, spec.config);
    ReportFormat fmt;
    if (pl_format == "tsv") fmt = ReportFormat::tsv;
    else if (pl_format == "json") fmt = ReportFormat::json;
    else throw ConfigError("unknown report format: " + pl_format);
    report_emit(result.report, pl_out, fmt);
    if (!pl_meta_out.empty()) save_text(result.meta, pl_meta_out);
    return 0;
  }

  if (plot_cmd->parsed()) {
    const EvalReport rx = load_report(plot_rx);
    const EvalReport ry = plot_ry.empty() ? rx : load_report(plot_ry);
    plot_scatter(rx, ry, plot_opts, plot_out);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const metafair::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return metafair::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

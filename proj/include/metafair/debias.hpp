#pragma once

#include "metafair/embedding.hpp"
#include "metafair/lexicon.hpp"
#include "metafair/meta.hpp"
#include "metafair/numerics.hpp"

namespace metafair {

enum class DebiasMethod { identity, hard, inlp, dict };

DebiasMethod debias_method_from_string(const std::string& s);
std::string to_string(DebiasMethod m);

// k orthonormal bias directions stored as columns.
struct BiasBasis {
  Eigen::MatrixXd directions;  // dim x k

  Eigen::Index k() const { return directions.cols(); }
  Eigen::Index dim() const { return directions.rows(); }
  void validate() const;  // pairwise orthonormal within 1e-8
};

struct DebiasConfig {
  DebiasMethod method = DebiasMethod::hard;
  Eigen::Index k = 1;   // hard: bias-subspace rank
  int m = 35;           // inlp: projection iterations
  double alpha = 0.2;   // dict: reconstruction weight
  double beta = 0.4;    // dict: gloss-agreement weight
  double gamma = 0.4;   // dict: orthogonality weight
  bool true_rejection = true;  // dict: normalise by ||g||^2 so <phi,g> = 0
  OptimizerConfig optimizer;

  void validate() const;
};

// Non-fatal events surfaced to the caller instead of being silently dropped.
struct DebiasNotes {
  std::vector<std::string> missing_tokens;
  std::vector<std::string> degenerate_words;   // hard: ||w - w_B|| = 0, left unchanged
  std::vector<std::string> empty_gloss_words;  // gloss resolves to no known tokens
  std::vector<std::string> zero_gloss_words;   // dict: ||g(w)|| = 0, excluded from J_a
  std::size_t skipped_gloss_tokens = 0;        // unresolvable tokens inside glosses
};

// Top-k directions of C = sum_i sum_{w in D_i} (w - mu_i)(w - mu_i)^T / |D_i|.
BiasBasis bias_subspace(const EmbeddingSet& set, const GenderLexicon& lex, Eigen::Index k,
                        DebiasNotes* notes = nullptr);

// Neutralise-only hard debiasing: neutral words are projected off the bias
// subspace and renormalised; definitional words pass through unchanged.
EmbeddingSet hard_debias(const EmbeddingSet& set, const BiasBasis& basis, const GenderLexicon& lex,
                         DebiasNotes* notes = nullptr);

struct InlpResult {
  EmbeddingSet debiased;
  Eigen::MatrixXd projection;                 // symmetric idempotent P
  std::vector<double> classifier_accuracies;  // per-iteration training accuracy
};

InlpResult inlp_debias(const EmbeddingSet& set, const GenderLexicon& lex, const DebiasConfig& cfg,
                       DebiasNotes* notes = nullptr);

struct SifOptions {
  bool remove_first_pc = true;
  bool skip_empty_glosses = false;  // skip-and-count instead of throwing EmptyGloss
};

// SIF gloss embeddings in the space of `set`: inverse-frequency weighted token
// average, then the first principal component of the gloss matrix is removed.
EmbeddingSet sif_gloss_embed(const EmbeddingSet& set, const DictCorpus& corpus,
                             const SifOptions& opts = {}, DebiasNotes* notes = nullptr);

// Vector rejection of w from the gloss direction. true_rejection divides by
// ||g||^2 (orthogonal by construction); the alternative keeps the printed
// single-norm variant for comparison.
Vector reject(const Vector& w, const Vector& g, bool true_rejection = true);

struct DictModel {
  Matrix enc_w;
  Vector enc_b;
  Matrix dec_c_w;
  Vector dec_c_b;
  Matrix dec_d_w;
  Vector dec_d_b;
  bool linear_encoder = false;

  Vector encode(const Vector& x) const;
  static DictModel identity(Eigen::Index dim);
};

// Packed training problem for dict debiasing; exposed so the total objective
// J = alpha J_c + beta J_d + gamma J_a can be gradient-checked directly.
struct DictProblem {
  Matrix words;       // training word vectors, row per word
  Matrix glosses;     // matching SIF gloss vectors
  Matrix rejections;  // phi(w, g)
  std::vector<bool> use_ja;
  double alpha = 0.2, beta = 0.4, gamma = 0.4;
  Eigen::Index dim = 0;
  bool linear_encoder = false;

  Eigen::Index n_params() const;
  Eigen::VectorXd pack(const DictModel& m) const;
  DictModel unpack(const Eigen::VectorXd& p) const;
  double eval(const Eigen::VectorXd& p, Eigen::VectorXd* grad) const;

  static DictProblem build(const EmbeddingSet& set, const DictCorpus& corpus,
                           const DebiasConfig& cfg, DebiasNotes* notes = nullptr);
};

struct DictResult {
  EmbeddingSet debiased;
  DictModel model;
  std::vector<double> epoch_losses;
};

DictResult dict_debias(const EmbeddingSet& set, const DictCorpus& corpus, const DebiasConfig& cfg,
                       DebiasNotes* notes = nullptr);

// Max over words and directions of |<m(w), composed b_j>| where composition is
// blockwise concatenation (conc) or vector sum (avg).
double preservation_check(const EmbeddingSet& meta, const std::vector<BiasBasis>& bases,
                          MetaMethod mode);

// Dispatch on cfg.method. `corpus` may be null unless method == dict.
EmbeddingSet debias_apply(const EmbeddingSet& set, const GenderLexicon& lex,
                          const DictCorpus* corpus, const DebiasConfig& cfg,
                          DebiasNotes* notes = nullptr);

}  // namespace metafair

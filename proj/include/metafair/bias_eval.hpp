#pragma once

#include "metafair/embedding.hpp"
#include "metafair/lexicon.hpp"

namespace metafair {

struct WeatResult {
  double s_score = 0.0;
  double effect_size = 0.0;
  double p_value = 1.0;
  bool exact = false;        // exact enumeration vs Monte Carlo splits
  std::size_t n_splits = 0;  // splits actually evaluated
};

// Association test over cosine similarities. All query tokens must resolve;
// the permutation p-value enumerates every equal-size re-split of X u Y when
// C(|X u Y|, |X|) <= 20000 and falls back to seeded Monte Carlo otherwise.
WeatResult weat(const EmbeddingSet& set, const WeatQuery& query, std::size_t n_permutations = 10000,
                unsigned long long seed = 1);

// Restrict a query to tokens present in the vocabulary (skip-and-count policy).
WeatQuery filter_weat_query(const EmbeddingSet& set, const WeatQuery& query,
                            std::size_t* n_skipped = nullptr);

struct WatGraph {
  std::vector<std::string> nodes;
  Eigen::MatrixXd weights;  // symmetric, non-negative
  std::vector<std::pair<std::string, std::string>> seed_pairs;  // (masculine, feminine)

  Eigen::Index find(const std::string& token) const;
  void validate() const;
};

// Edge list "u<TAB>v<TAB>weight" plus a JSON seed-pair list.
WatGraph load_wat_graph(const std::string& edges_tsv, const std::string& seeds_json);

struct WatPropagation {
  Matrix scores;  // |nodes| x 2 columns (b_m, b_f)
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
};

// Random-walk label spreading F <- alpha*S*F + (1-alpha)*Y with the
// symmetric normalisation S = D^-1/2 W D^-1/2. Masculine seeds start at
// (1,0), feminine at (0,1), everything else at (0,0).
WatPropagation wat_propagate(const WatGraph& graph, double alpha = 0.85, double tol = 1e-10,
                             int max_iters = 10000);

// Pearson correlation between the graph bias log((b_m+eps)/(b_f+eps)) and the
// embedding bias mean_i[cos(w, w_m^i) - cos(w, w_f^i)] over shared words.
double wat_score(const EmbeddingSet& set, const WatGraph& graph, const WatPropagation& props,
                 double eps = 1e-12);

struct SemBiasResult {
  double definition_pct = 0.0;
  double stereotype_pct = 0.0;
  double none_pct = 0.0;
  std::size_t n_scored = 0;
  std::size_t n_skipped = 0;
};

// Per instance, picks the pair whose difference vector best aligns with the
// he-she direction; ties go to the lowest-index pair.
SemBiasResult sembias(const EmbeddingSet& set, const std::vector<SemBiasInstance>& instances,
                      const std::pair<std::string, std::string>& direction_pair,
                      bool subset_only = false);

}  // namespace metafair

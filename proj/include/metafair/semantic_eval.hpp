#pragma once

#include "metafair/embedding.hpp"
#include "metafair/lexicon.hpp"

namespace metafair {

struct SimilarityResult {
  double spearman = 0.0;
  std::size_t n_scored = 0;
  std::size_t n_skipped = 0;
};

// Spearman correlation between pairwise cosine similarity and human ratings.
// Pairs with an unresolvable or zero-norm token are skipped and counted.
SimilarityResult similarity_benchmark(const EmbeddingSet& set, const SimilarityDataset& data);

}  // namespace metafair

#include "metafair/semantic_eval.hpp"

#include "metafair/numerics.hpp"

namespace metafair {

SimilarityResult similarity_benchmark(const EmbeddingSet& set, const SimilarityDataset& data) {
  SimilarityResult result;
  std::vector<double> cosines, ratings;
  for (const auto& e : data.entries) {
    const Eigen::Index ra = set.find(e.a), rb = set.find(e.b);
    if (ra < 0 || rb < 0) {
      ++result.n_skipped;
      continue;
    }
    const double na = set.matrix().row(ra).norm(), nb = set.matrix().row(rb).norm();
    if (na == 0.0 || nb == 0.0) {
      ++result.n_skipped;
      continue;
    }
    cosines.push_back(set.matrix().row(ra).dot(set.matrix().row(rb)) / (na * nb));
    ratings.push_back(e.rating);
  }
  if (cosines.size() < 2)
    throw InsufficientData("fewer than 2 scoreable pairs in " + data.name);
  result.n_scored = cosines.size();
  result.spearman = spearman(cosines, ratings);
  return result;
}

}  // namespace metafair

#pragma once

#include "metafair/embedding.hpp"
#include "metafair/lexicon.hpp"

namespace metafair {

struct SyntheticSpec {
  int n_words = 200;
  int dim = 10;
  int n_gendered_pairs = 8;
  double bias_strength = 1.0;
  unsigned long long seed = 1;
  double noise_scale = 0.0;  // 0 -> 1/sqrt(dim)
  std::string name = "synthetic";
};

struct SyntheticResult {
  EmbeddingSet embeddings;
  GenderLexicon lexicon;
  Vector planted_direction;                  // unit vector carrying the planted bias
  std::vector<std::string> male_stereotyped;
  std::vector<std::string> female_stereotyped;
};

// Deterministic biased-embedding generator. Gendered pairs sit at
// +-bias_strength along a planted unit direction; the remaining words split
// into two stereotype halves that receive a signed bias_strength component
// along the same direction plus isotropic Gaussian noise.
SyntheticResult generate_synthetic(const SyntheticSpec& spec);

}  // namespace metafair

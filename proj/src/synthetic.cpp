#include "metafair/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace metafair {

namespace {

std::string padded_name(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, i);
  return buf;
}

}  // namespace

SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
  if (spec.bias_strength < 0.0) throw InvalidArgument("bias_strength must be non-negative");
  if (spec.dim <= 0 || spec.n_words <= 0) throw InvalidArgument("n_words and dim must be positive");
  if (2 * spec.n_gendered_pairs > spec.n_words)
    throw InvalidArgument("2 * n_gendered_pairs exceeds n_words");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double noise = spec.noise_scale > 0.0 ? spec.noise_scale : 1.0 / std::sqrt(spec.dim);

  Vector planted(spec.dim);
  for (int i = 0; i < spec.dim; ++i) planted(i) = gauss(rng);
  planted.normalize();

  const int n_gendered = 2 * spec.n_gendered_pairs;
  const int n_rest = spec.n_words - n_gendered;
  const int n_male_st = n_rest / 2;
  const int n_female_st = n_rest - n_male_st;

  std::vector<std::string> vocab;
  vocab.reserve(spec.n_words);
  Matrix matrix(spec.n_words, spec.dim);

  SyntheticResult out{EmbeddingSet("tmp", {"tmp"}, Matrix::Ones(1, 1)), {}, planted, {}, {}};

  auto fill_row = [&](Eigen::Index r, double planted_sign) {
    Vector base(spec.dim);
    for (int c = 0; c < spec.dim; ++c) base(c) = noise * gauss(rng);
    matrix.row(r) = (base + planted_sign * spec.bias_strength * planted).transpose();
  };

  Eigen::Index r = 0;
  for (int i = 0; i < spec.n_gendered_pairs; ++i) {
    std::string m = padded_name("man", i);
    std::string f = padded_name("woman", i);
    vocab.push_back(m);
    fill_row(r++, +1.0);
    vocab.push_back(f);
    fill_row(r++, -1.0);
    out.lexicon.defining_pairs.emplace_back(m, f);
    out.lexicon.seed_pairs.emplace_back(m, f);
  }
  for (int i = 0; i < n_male_st; ++i) {
    std::string w = padded_name("mjob", i);
    vocab.push_back(w);
    fill_row(r++, +1.0);
    out.male_stereotyped.push_back(w);
  }
  for (int i = 0; i < n_female_st; ++i) {
    std::string w = padded_name("fjob", i);
    vocab.push_back(w);
    fill_row(r++, -1.0);
    out.female_stereotyped.push_back(w);
  }

  // Planted WEAT query: stereotype halves as targets, definitional words as attributes.
  const std::size_t n_targets = std::min(out.male_stereotyped.size(), out.female_stereotyped.size());
  if (n_targets >= 1 && spec.n_gendered_pairs >= 1) {
    WeatQuery q;
    q.name = "planted";
    q.targets_x.assign(out.male_stereotyped.begin(), out.male_stereotyped.begin() + n_targets);
    q.targets_y.assign(out.female_stereotyped.begin(), out.female_stereotyped.begin() + n_targets);
    for (const auto& [m, f] : out.lexicon.defining_pairs) {
      q.attributes_a.push_back(m);
      q.attributes_b.push_back(f);
    }
    out.lexicon.weat_queries.push_back(std::move(q));
  }

  out.embeddings = EmbeddingSet(spec.name, std::move(vocab), std::move(matrix));
  return out;
}

}  // namespace metafair

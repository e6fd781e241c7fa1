#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metafair/embedding.hpp"

namespace metafair {

// Two equal-size target sets X, Y scored against attribute sets A, B.
struct WeatQuery {
  std::string name;
  std::vector<std::string> targets_x;
  std::vector<std::string> targets_y;
  std::vector<std::string> attributes_a;
  std::vector<std::string> attributes_b;

  void validate() const;
};

enum class NeutralPolicy { all_but_defining, explicit_list };

// Gender word resources: defining pairs D_i drive the bias subspace and INLP
// training, seed pairs L drive WAT-style embedding scores.
struct GenderLexicon {
  std::vector<std::pair<std::string, std::string>> defining_pairs;  // (masculine, feminine)
  std::vector<std::pair<std::string, std::string>> seed_pairs;
  std::vector<WeatQuery> weat_queries;
  NeutralPolicy neutral_policy = NeutralPolicy::all_but_defining;
  std::vector<std::string> neutral_words;

  // Tokens of the resolved word-kind against a vocabulary. Missing tokens are
  // collected, never silently dropped.
  std::vector<std::string> definitional_tokens() const;
  bool is_neutral(const std::string& token) const;
};

GenderLexicon load_lexicon_json(const std::string& path);
std::vector<WeatQuery> load_weat_json(const std::string& path);

// token<TAB>gloss corpus plus a unigram probability table for SIF weighting.
struct DictCorpus {
  std::map<std::string, std::string> glosses;
  std::map<std::string, double> unigram_probs;
  double sif_a = 1e-3;

  double prob(const std::string& token) const;
};

DictCorpus load_dict_corpus(const std::string& gloss_tsv, const std::string& probs_json,
                            double sif_a = 1e-3);

// (token_a, token_b, human rating) rows for similarity benchmarks.
struct SimilarityDataset {
  std::string name;
  struct Entry {
    std::string a;
    std::string b;
    double rating;
  };
  std::vector<Entry> entries;
};

SimilarityDataset load_similarity_tsv(const std::string& path, const std::string& name = "");

// Four candidate pairs per instance: definition, stereotype, and two none pairs.
struct SemBiasInstance {
  std::array<std::pair<std::string, std::string>, 4> pairs;
  bool in_subset = false;  // marks the held-out generalisation subset
};

std::vector<SemBiasInstance> load_sembias_tsv(const std::string& path);

}  // namespace metafair

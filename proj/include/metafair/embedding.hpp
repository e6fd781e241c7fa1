#pragma once

#include <Eigen/Dense>
#include <string>
#include <unordered_map>
#include <vector>

#include "metafair/errors.hpp"

namespace metafair {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Named vocabulary plus a dense |vocab| x dim table, row w = vector of word w.
// Immutable after construction; lookups are total over the vocab and throw on OOV.
class EmbeddingSet {
 public:
  EmbeddingSet(std::string name, std::vector<std::string> vocab, Matrix matrix);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& vocab() const noexcept { return vocab_; }
  Eigen::Index dim() const noexcept { return matrix_.cols(); }
  Eigen::Index size() const noexcept { return matrix_.rows(); }
  const Matrix& matrix() const noexcept { return matrix_; }

  bool contains(const std::string& token) const { return index_.count(token) > 0; }

  // Row index of a token, or -1 when absent.
  Eigen::Index find(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : static_cast<Eigen::Index>(it->second);
  }

  // Throws OovToken when the word is not in the vocabulary.
  Vector lookup(const std::string& token) const;

  EmbeddingSet renamed(std::string name) const { return {std::move(name), vocab_, matrix_}; }

 private:
  std::string name_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  Matrix matrix_;
};

enum class AlignPolicy { union_zero, intersection };

// Sources brought to one ordered vocabulary. Under union_zero a word absent from
// a source reads as the zero vector of that source's dimensionality.
struct AlignedSources {
  std::vector<EmbeddingSet> sources;
  std::vector<std::string> union_vocab;
  // presence(w, j): word w has a stored row in source j.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> presence;

  std::size_t n_sources() const { return sources.size(); }
  Eigen::Index n_words() const { return static_cast<Eigen::Index>(union_vocab.size()); }

  // Vector of union word w in source j; zeros when absent.
  Vector row(std::size_t j, Eigen::Index w) const;

  // |union_vocab| x d_j table of source j with zero rows for absent words.
  Matrix padded_matrix(std::size_t j) const;

  // Indices into union_vocab of words present in every source.
  std::vector<Eigen::Index> intersection_indices() const;
};

// Text format: header "<count> <dim>", then one "<token> <dim floats>" line per word.
// Paths ending in ".gz" are read/written gzip-compressed.
EmbeddingSet load_text(const std::string& path);
void save_text(const EmbeddingSet& set, const std::string& path);

AlignedSources align(const std::vector<EmbeddingSet>& sources, AlignPolicy policy);

// Formats a double with 9 significant digits, shortest form ("0", "1.5", "1e-07").
std::string format_value(double v);

}  // namespace metafair

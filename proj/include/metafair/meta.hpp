#pragma once

#include <array>
#include <optional>

#include "metafair/embedding.hpp"
#include "metafair/lexicon.hpp"
#include "metafair/numerics.hpp"

namespace metafair {

enum class MetaMethod { conc, avg, gle, lle, aeme };

MetaMethod meta_method_from_string(const std::string& s);
std::string to_string(MetaMethod m);

struct MetaConfig {
  MetaMethod method = MetaMethod::conc;
  Eigen::Index meta_dim = 0;           // gle/lle/aeme output dim; 0 -> max source dim
  std::vector<double> source_weights;  // gle alpha_j; empty -> calibrated or uniform
  int neighbors_per_source = 5;        // lle
  std::vector<double> lambdas;         // aeme reconstruction weights; normalised to sum 1
  OptimizerConfig optimizer;
  std::optional<SimilarityDataset> similarity_calibration;  // gle alpha_j source
};

// Training-free combinators. conc keeps zero blocks for absent words; avg
// zero-pads every source to the widest dimensionality.
EmbeddingSet conc(const AlignedSources& aligned);
EmbeddingSet avg(const AlignedSources& aligned);

// ---- GLE: one global linear projection per source ----

struct GleResult {
  EmbeddingSet meta;
  std::vector<Matrix> projections;  // A_j, d_j x d_m
  std::vector<double> weights;      // resolved alpha_j
  std::vector<double> epoch_losses;
};

// sum_j alpha_j ( ||M A_j^T - S_j||_F^2 + ||A_j||_F^2 ) with S_j stacked over
// the training vocabulary.
double gle_objective(const std::vector<Matrix>& sources_rows, const std::vector<Matrix>& projections,
                     const Matrix& meta_rows, const std::vector<double>& weights);

GleResult gle_fit(const AlignedSources& aligned, const MetaConfig& cfg);

// ---- LLE: neighbourhood reconstruction weights, then bottom eigenvectors ----

struct LleResult {
  EmbeddingSet meta;
  std::vector<std::string> training_vocab;
  // neighbors[j][w] = indices (into training_vocab) of w's neighbours in source j
  std::vector<std::vector<std::vector<Eigen::Index>>> neighbors;
  Matrix reconstruction_weights;  // A over the training vocabulary
  Matrix c_matrix;                // C_ww' = A_ww' * #{j : w' in N_j(w)}
  Vector selected_eigenvalues;    // ascending, trivial eigenvector discarded
  std::vector<double> epoch_losses;
};

LleResult lle_fit(const AlignedSources& aligned, const MetaConfig& cfg);

// ---- AEME: per-source autoencoders, normalised average of encodings ----

struct AemePairModel {
  std::array<Matrix, 2> enc_w;  // d_m x d_j
  std::array<Vector, 2> enc_b;
  std::array<Matrix, 2> dec_w;  // d_j x d_m
  std::array<Vector, 2> dec_b;
  bool linear_encoder = false;  // tanh by default

  Vector encode(int j, const Vector& x) const;
  Vector decode(int j, const Vector& h) const;
  // l2-normalised sum of the two encodings; zero stays zero.
  Vector combine(const Vector& x1, const Vector& x2) const;

  static AemePairModel identity(Eigen::Index dim);
};

struct AemeResult {
  EmbeddingSet meta;
  std::vector<AemePairModel> stages;  // one per cascade step
  std::vector<std::vector<double>> epoch_losses;
};

AemeResult aeme_fit(const AlignedSources& aligned, const MetaConfig& cfg);

// Dispatch on cfg.method; output vocab always equals the union vocabulary.
EmbeddingSet meta_fit(const AlignedSources& aligned, const MetaConfig& cfg);

}  // namespace metafair

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "metafair/errors.hpp"

namespace metafair {

// Decomposition result. `values` are sorted descending; `vectors` holds the
// right singular / eigen vectors as orthonormal columns. `left` carries the
// left singular vectors for svd() and is empty for sym_eigen().
struct Spectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  Eigen::MatrixXd left;
};

struct LinearClassifier {
  Eigen::VectorXd weights;
  double bias = 0.0;

  double decision(const Eigen::VectorXd& x) const { return weights.dot(x) + bias; }
  int predict(const Eigen::VectorXd& x) const { return decision(x) >= 0.0 ? 1 : -1; }
};

enum class OptMethod { sgd, adagrad };

struct OptimizerConfig {
  OptMethod method = OptMethod::adagrad;
  double learning_rate = 0.1;
  int epochs = 100;
  int batch_size = 32;
  unsigned long long seed = 1;
  double tolerance = 0.0;
};

// Top-k singular triplets of M. U (left) and V (vectors) columns orthonormal.
Spectrum svd(const Eigen::MatrixXd& M, Eigen::Index k);

// Full eigendecomposition of a symmetric matrix; rejects ||S - S^T||_inf > 1e-10.
Spectrum sym_eigen(const Eigen::MatrixXd& S);

// Scalar objective with analytic gradient, evaluated at a parameter vector.
using Objective = std::function<double(const Eigen::VectorXd& params, Eigen::VectorXd* grad)>;

// Full-batch descent with Armijo backtracking; AdaGrad rescales the step
// direction per coordinate. Epoch losses are recorded before each step and are
// non-increasing by construction. Stops early when an epoch improves the loss
// by less than cfg.tolerance.
Eigen::VectorXd minimize(const Objective& objective, Eigen::VectorXd init,
                         const OptimizerConfig& cfg, std::vector<double>* epoch_losses = nullptr);

// L2-penalised logistic regression on +-1 labels.
LinearClassifier fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                              const OptimizerConfig& cfg, double l2 = 1e-4);

double logistic_loss(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                     const LinearClassifier& clf, double l2 = 1e-4);

// Max relative error between the analytic gradient and central differences.
double grad_check(const Objective& objective, const Eigen::VectorXd& theta, double h = 1e-5);

double pearson(const std::vector<double>& a, const std::vector<double>& b);
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Average ranks (1-based), ties averaged.
std::vector<double> average_ranks(const std::vector<double>& values);

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace metafair

#include "metafair/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace metafair {

Spectrum svd(const Eigen::MatrixXd& M, Eigen::Index k) {
  if (!M.allFinite()) throw NumericError("svd: non-finite input");
  if (k < 0 || k > std::min(M.rows(), M.cols()))
    throw InvalidArgument("svd: k out of range");
  Eigen::JacobiSVD<Eigen::MatrixXd> solver(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Spectrum out;
  out.values = solver.singularValues().head(k);
  out.vectors = solver.matrixV().leftCols(k);
  out.left = solver.matrixU().leftCols(k);
  return out;
}

Spectrum sym_eigen(const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols()) throw InvalidArgument("sym_eigen: matrix must be square");
  if (!S.allFinite()) throw NumericError("sym_eigen: non-finite input");
  const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    throw InvalidArgument("sym_eigen: input not symmetric, |S - S^T|_inf = " + std::to_string(asym));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
  if (solver.info() != Eigen::Success) throw NumericError("sym_eigen: eigensolver failed");

  // Eigen returns ascending order; flip to descending.
  const Eigen::Index n = S.rows();
  Spectrum out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

Eigen::VectorXd minimize(const Objective& objective, Eigen::VectorXd theta,
                         const OptimizerConfig& cfg, std::vector<double>* epoch_losses) {
  if (cfg.learning_rate <= 0.0) throw InvalidArgument("learning_rate must be positive");
  if (cfg.epochs <= 0) throw InvalidArgument("epochs must be positive");

  const Eigen::Index n = theta.size();
  Eigen::VectorXd grad(n);
  Eigen::VectorXd accum = Eigen::VectorXd::Zero(n);  // AdaGrad accumulator
  constexpr double kAdaEps = 1e-8;
  constexpr double kArmijo = 1e-4;

  double loss = objective(theta, &grad);
  if (!std::isfinite(loss)) throw NumericError("objective not finite at initial point");

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch_losses) epoch_losses->push_back(loss);

    Eigen::VectorXd direction;
    if (cfg.method == OptMethod::adagrad) {
      accum.array() += grad.array().square();
      direction = grad.array() / (accum.array().sqrt() + kAdaEps);
    } else {
      direction = grad;
    }
    const double slope = grad.dot(direction);
    if (slope <= 0.0) break;  // stationary

    double step = cfg.learning_rate;
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::VectorXd candidate = theta - step * direction;
      double candidate_loss = objective(candidate, nullptr);
      if (std::isfinite(candidate_loss) && candidate_loss <= loss - kArmijo * step * slope) {
        double improvement = loss - candidate_loss;
        theta = std::move(candidate);
        loss = objective(theta, &grad);
        accepted = true;
        if (improvement <= cfg.tolerance) epoch = cfg.epochs;  // converged
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent step found at the smallest trial step
  }
  if (epoch_losses) epoch_losses->push_back(loss);
  return theta;
}

double logistic_loss(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                     const LinearClassifier& clf, double l2) {
  const Eigen::Index m = X.rows();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double margin = y(i) * (X.row(i).dot(clf.weights) + clf.bias);
    // log(1 + exp(-margin)), stable for large |margin|
    loss += margin > 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
  }
  loss /= static_cast<double>(m);
  loss += 0.5 * l2 * clf.weights.squaredNorm();
  return loss;
}

LinearClassifier fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                              const OptimizerConfig& cfg, double l2) {
  const Eigen::Index m = X.rows();
  const Eigen::Index d = X.cols();
  if (m != y.size()) throw InvalidArgument("fit_logistic: X rows and y length differ");
  bool has_pos = false, has_neg = false;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (y(i) == 1) has_pos = true;
    else if (y(i) == -1) has_neg = true;
    else throw InvalidArgument("fit_logistic: labels must be +-1");
  }
  if (!has_pos || !has_neg) throw DegenerateLabels("need at least one example of each label");

  auto objective = [&](const Eigen::VectorXd& params, Eigen::VectorXd* grad) {
    LinearClassifier clf{params.head(d), params(d)};
    if (grad) {
      grad->setZero(d + 1);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double margin = y(i) * (X.row(i).dot(clf.weights) + clf.bias);
        const double sig = 1.0 / (1.0 + std::exp(margin));  // d/dmargin of log(1+e^-margin)
        grad->head(d) -= sig * y(i) * X.row(i).transpose();
        (*grad)(d) -= sig * y(i);
      }
      *grad /= static_cast<double>(m);
      grad->head(d) += l2 * clf.weights;
    }
    return logistic_loss(X, y, clf, l2);
  };

  Eigen::VectorXd params = Eigen::VectorXd::Zero(d + 1);
  params = minimize(objective, std::move(params), cfg);
  return {params.head(d), params(d)};
}

double grad_check(const Objective& objective, const Eigen::VectorXd& theta, double h) {
  Eigen::VectorXd analytic(theta.size());
  const double f0 = objective(theta, &analytic);
  if (!std::isfinite(f0)) throw NumericError("grad_check: objective not finite");

  double max_err = 0.0;
  Eigen::VectorXd probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe(i) = theta(i) + h;
    const double fp = objective(probe, nullptr);
    probe(i) = theta(i) - h;
    const double fm = objective(probe, nullptr);
    probe(i) = theta(i);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("grad_check: objective not finite at probe point");
    const double numeric = (fp - fm) / (2.0 * h);
    const double err =
        std::abs(analytic(i) - numeric) / (std::abs(analytic(i)) + std::abs(numeric) + 1e-12);
    max_err = std::max(max_err, err);
  }
  return max_err;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidArgument("pearson: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw InvalidArgument("pearson: need at least 2 points");
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedCorrelation("constant input");
  return sab / std::sqrt(saa * sbb);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidArgument("spearman: length mismatch");
  if (a.size() < 2) throw InvalidArgument("spearman: need at least 2 points");
  return pearson(average_ranks(a), average_ranks(b));
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw NumericError("cosine of zero vector");
  return a.dot(b) / (na * nb);
}

}  // namespace metafair

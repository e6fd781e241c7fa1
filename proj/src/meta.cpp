#include "metafair/meta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace metafair {

MetaMethod meta_method_from_string(const std::string& s) {
  if (s == "conc") return MetaMethod::conc;
  if (s == "avg") return MetaMethod::avg;
  if (s == "gle") return MetaMethod::gle;
  if (s == "lle") return MetaMethod::lle;
  if (s == "aeme") return MetaMethod::aeme;
  throw ConfigError("unknown meta method: " + s);
}

std::string to_string(MetaMethod m) {
  switch (m) {
    case MetaMethod::conc: return "conc";
    case MetaMethod::avg: return "avg";
    case MetaMethod::gle: return "gle";
    case MetaMethod::lle: return "lle";
    case MetaMethod::aeme: return "aeme";
  }
  return "?";
}

namespace {

Eigen::Index default_meta_dim(const AlignedSources& aligned, const MetaConfig& cfg) {
  if (cfg.meta_dim > 0) return cfg.meta_dim;
  Eigen::Index d = 0;
  for (const auto& s : aligned.sources) d = std::max(d, s.dim());
  return d;
}

// cosine against a prepared row matrix; rows with zero norm rank last
double row_cosine(const Matrix& rows, Eigen::Index a, Eigen::Index b) {
  const double na = rows.row(a).norm(), nb = rows.row(b).norm();
  if (na == 0.0 || nb == 0.0) return -2.0;
  return rows.row(a).dot(rows.row(b)) / (na * nb);
}

std::vector<Eigen::Index> top_k_neighbors(const Matrix& rows, Eigen::Index w, int k,
                                          const std::vector<Eigen::Index>& pool) {
  std::vector<std::pair<double, Eigen::Index>> scored;
  scored.reserve(pool.size());
  for (Eigen::Index u : pool) {
    if (u == w) continue;
    scored.emplace_back(-row_cosine(rows, w, u), u);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<Eigen::Index> out;
  for (int i = 0; i < k && i < static_cast<int>(scored.size()); ++i)
    out.push_back(scored[static_cast<std::size_t>(i)].second);
  return out;
}

std::vector<double> resolve_gle_weights(const AlignedSources& aligned, const MetaConfig& cfg) {
  const std::size_t n = aligned.n_sources();
  if (!cfg.source_weights.empty()) {
    if (cfg.source_weights.size() != n)
      throw ConfigError("source_weights size must match the number of sources");
    for (double w : cfg.source_weights)
      if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("source_weights must be finite and >= 0");
    return cfg.source_weights;
  }
  std::vector<double> alpha(n, 1.0 / static_cast<double>(n));
  if (!cfg.similarity_calibration) return alpha;

  // alpha_j = max(pearson_j, 0) over the calibration pairs, renormalised
  const auto& data = *cfg.similarity_calibration;
  std::vector<double> raw(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& src = aligned.sources[j];
    std::vector<double> cos, ratings;
    for (const auto& e : data.entries) {
      const Eigen::Index a = src.find(e.a), b = src.find(e.b);
      if (a < 0 || b < 0) continue;
      const double na = src.matrix().row(a).norm(), nb = src.matrix().row(b).norm();
      if (na == 0.0 || nb == 0.0) continue;
      cos.push_back(src.matrix().row(a).dot(src.matrix().row(b)) / (na * nb));
      ratings.push_back(e.rating);
    }
    if (cos.size() < 2) continue;
    try {
      raw[j] = std::max(pearson(cos, ratings), 0.0);
    } catch (const UndefinedCorrelation&) {
      raw[j] = 0.0;
    }
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (total <= 0.0) return alpha;  // no usable calibration signal: stay uniform
  for (std::size_t j = 0; j < n; ++j) alpha[j] = raw[j] / total;
  return alpha;
}

}  // namespace

EmbeddingSet conc(const AlignedSources& aligned) {
  Eigen::Index total = 0;
  for (const auto& s : aligned.sources) total += s.dim();
  Matrix out = Matrix::Zero(aligned.n_words(), total);
  Eigen::Index offset = 0;
  for (std::size_t j = 0; j < aligned.n_sources(); ++j) {
    const auto& src = aligned.sources[j];
    for (Eigen::Index w = 0; w < aligned.n_words(); ++w) {
      const Eigen::Index r = src.find(aligned.union_vocab[static_cast<std::size_t>(w)]);
      if (r >= 0) out.block(w, offset, 1, src.dim()) = src.matrix().row(r);
    }
    offset += src.dim();
  }
  return {"conc", aligned.union_vocab, std::move(out)};
}

EmbeddingSet avg(const AlignedSources& aligned) {
  Eigen::Index dmax = 0;
  for (const auto& s : aligned.sources) dmax = std::max(dmax, s.dim());
  Matrix out = Matrix::Zero(aligned.n_words(), dmax);
  for (std::size_t j = 0; j < aligned.n_sources(); ++j) {
    const auto& src = aligned.sources[j];
    for (Eigen::Index w = 0; w < aligned.n_words(); ++w) {
      const Eigen::Index r = src.find(aligned.union_vocab[static_cast<std::size_t>(w)]);
      if (r >= 0) out.block(w, 0, 1, src.dim()) += src.matrix().row(r);
    }
  }
  out /= static_cast<double>(aligned.n_sources());
  return {"avg", aligned.union_vocab, std::move(out)};
}

double gle_objective(const std::vector<Matrix>& sources_rows,
                     const std::vector<Matrix>& projections, const Matrix& meta_rows,
                     const std::vector<double>& weights) {
  double j_total = 0.0;
  for (std::size_t j = 0; j < sources_rows.size(); ++j) {
    const double recon = (meta_rows * projections[j].transpose() - sources_rows[j]).squaredNorm();
    j_total += weights[j] * (recon + projections[j].squaredNorm());
  }
  return j_total;
}

GleResult gle_fit(const AlignedSources& aligned, const MetaConfig& cfg) {
  const std::size_t n_src = aligned.n_sources();
  const auto training = aligned.intersection_indices();
  if (training.empty()) throw EmptyTrainingSet("gle needs a non-empty intersection vocabulary");
  const Eigen::Index n = static_cast<Eigen::Index>(training.size());
  const Eigen::Index dm = default_meta_dim(aligned, cfg);
  const auto alpha = resolve_gle_weights(aligned, cfg);

  std::vector<Matrix> S(n_src);
  for (std::size_t j = 0; j < n_src; ++j) {
    S[j].resize(n, aligned.sources[j].dim());
    for (Eigen::Index t = 0; t < n; ++t)
      S[j].row(t) = aligned.row(j, training[static_cast<std::size_t>(t)]).transpose();
  }

  std::mt19937_64 rng(cfg.optimizer.seed);
  std::uniform_real_distribution<double> u(-1.0 / std::sqrt(static_cast<double>(dm)),
                                           1.0 / std::sqrt(static_cast<double>(dm)));
  Matrix M(n, dm);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < dm; ++c) M(r, c) = u(rng);

  std::vector<Matrix> A(n_src);
  for (std::size_t j = 0; j < n_src; ++j) A[j] = Matrix::Zero(aligned.sources[j].dim(), dm);

  if (cfg.optimizer.epochs <= 0) throw InvalidArgument("epochs must be positive");
  GleResult result{EmbeddingSet("gle", {"tmp"}, Matrix::Ones(1, 1)), {}, alpha, {}};
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dm, dm);

  double prev = gle_objective(S, A, M, alpha);
  for (int epoch = 0; epoch < cfg.optimizer.epochs; ++epoch) {
    result.epoch_losses.push_back(prev);

    // exact ridge update of each projection, then exact update of the meta rows
    Eigen::MatrixXd G = (M.transpose() * M + Eigen::MatrixXd::Identity(dm, dm)).eval();
    Eigen::LDLT<Eigen::MatrixXd> g_solver(G);
    for (std::size_t j = 0; j < n_src; ++j)
      A[j] = (g_solver.solve(M.transpose() * S[j])).transpose();

    H.setZero();
    Matrix rhs = Matrix::Zero(n, dm);
    for (std::size_t j = 0; j < n_src; ++j) {
      H += alpha[j] * (A[j].transpose() * A[j]);
      rhs += alpha[j] * (S[j] * A[j]);
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> h_solver(H);
    M = h_solver.solve(rhs.transpose()).transpose();

    const double cur = gle_objective(S, A, M, alpha);
    const double improvement = prev - cur;
    prev = cur;
    if (improvement <= cfg.optimizer.tolerance && epoch > 0) break;
  }
  result.epoch_losses.push_back(prev);

  // extend to the full union vocabulary: zero inputs stand in for absent words
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> h_solver(H);
  Matrix out = Matrix::Zero(aligned.n_words(), dm);
  std::vector<bool> is_training(static_cast<std::size_t>(aligned.n_words()), false);
  for (Eigen::Index t = 0; t < n; ++t) {
    out.row(training[static_cast<std::size_t>(t)]) = M.row(t);
    is_training[static_cast<std::size_t>(training[static_cast<std::size_t>(t)])] = true;
  }
  for (Eigen::Index w = 0; w < aligned.n_words(); ++w) {
    if (is_training[static_cast<std::size_t>(w)]) continue;
    Vector rhs_w = Vector::Zero(dm);
    for (std::size_t j = 0; j < n_src; ++j)
      rhs_w += alpha[j] * (A[j].transpose() * aligned.row(j, w));
    out.row(w) = h_solver.solve(rhs_w).transpose();
  }

  result.meta = EmbeddingSet("gle", aligned.union_vocab, std::move(out));
  result.projections = std::move(A);
  return result;
}

LleResult lle_fit(const AlignedSources& aligned, const MetaConfig& cfg) {
  const std::size_t n_src = aligned.n_sources();
  const auto training = aligned.intersection_indices();
  const Eigen::Index n = static_cast<Eigen::Index>(training.size());
  if (n == 0) throw EmptyTrainingSet("lle needs a non-empty intersection vocabulary");
  if (cfg.neighbors_per_source < 1 || cfg.neighbors_per_source >= n)
    throw InvalidArgument("neighbors_per_source must lie in [1, |training vocab|)");
  const int k = cfg.neighbors_per_source;

  LleResult result{EmbeddingSet("lle", {"tmp"}, Matrix::Ones(1, 1)), {}, {}, {}, {}, {}, {}};
  for (Eigen::Index t = 0; t < n; ++t)
    result.training_vocab.push_back(
        aligned.union_vocab[static_cast<std::size_t>(training[static_cast<std::size_t>(t)])]);

  std::vector<Matrix> R(n_src);
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  result.neighbors.resize(n_src);
  for (std::size_t j = 0; j < n_src; ++j) {
    R[j].resize(n, aligned.sources[j].dim());
    for (Eigen::Index t = 0; t < n; ++t)
      R[j].row(t) = aligned.row(j, training[static_cast<std::size_t>(t)]).transpose();
    result.neighbors[j].resize(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t)
      result.neighbors[j][static_cast<std::size_t>(t)] = top_k_neighbors(R[j], t, k, pool);
  }

  // one shared weight per (word, candidate) pair; candidates = union over sources
  std::vector<std::vector<Eigen::Index>> candidates(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> offset(static_cast<std::size_t>(n) + 1, 0);
  for (Eigen::Index t = 0; t < n; ++t) {
    std::set<Eigen::Index> cs;
    for (std::size_t j = 0; j < n_src; ++j)
      cs.insert(result.neighbors[j][static_cast<std::size_t>(t)].begin(),
                result.neighbors[j][static_cast<std::size_t>(t)].end());
    candidates[static_cast<std::size_t>(t)].assign(cs.begin(), cs.end());
    offset[static_cast<std::size_t>(t) + 1] =
        offset[static_cast<std::size_t>(t)] +
        static_cast<Eigen::Index>(candidates[static_cast<std::size_t>(t)].size());
  }
  const Eigen::Index n_params = offset[static_cast<std::size_t>(n)];

  auto slot = [&](Eigen::Index t, Eigen::Index u) -> Eigen::Index {
    const auto& cs = candidates[static_cast<std::size_t>(t)];
    const auto it = std::lower_bound(cs.begin(), cs.end(), u);
    return offset[static_cast<std::size_t>(t)] + (it - cs.begin());
  };

  auto objective = [&](const Eigen::VectorXd& params, Eigen::VectorXd* grad) {
    if (grad) grad->setZero(n_params);
    double loss = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < n_src; ++j) {
        const auto& nb = result.neighbors[j][static_cast<std::size_t>(t)];
        Vector r = R[j].row(t).transpose();
        for (Eigen::Index u : nb) r -= params(slot(t, u)) * R[j].row(u).transpose();
        loss += r.squaredNorm();
        if (grad) {
          for (Eigen::Index u : nb)
            (*grad)(slot(t, u)) -= 2.0 * r.dot(R[j].row(u).transpose());
        }
      }
    }
    return loss;
  };

  Eigen::VectorXd params =
      minimize(objective, Eigen::VectorXd::Zero(n_params), cfg.optimizer, &result.epoch_losses);

  result.reconstruction_weights = Matrix::Zero(n, n);
  result.c_matrix = Matrix::Zero(n, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index u : candidates[static_cast<std::size_t>(t)]) {
      double count = 0.0;
      for (std::size_t j = 0; j < n_src; ++j) {
        const auto& nb = result.neighbors[j][static_cast<std::size_t>(t)];
        count += std::find(nb.begin(), nb.end(), u) != nb.end() ? 1.0 : 0.0;
      }
      result.reconstruction_weights(t, u) = params(slot(t, u));
      result.c_matrix(t, u) = params(slot(t, u)) * count;
    }
  }

  const Eigen::Index dm = std::min<Eigen::Index>(default_meta_dim(aligned, cfg), n - 1);
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd Q = (I - result.c_matrix).transpose() * (I - result.c_matrix);
  Q = 0.5 * (Q + Q.transpose()).eval();
  auto spectrum = sym_eigen(Q);

  // drop the trivial bottom eigenvector, take the next dm ascending
  Matrix M(n, dm);
  result.selected_eigenvalues.resize(dm);
  for (Eigen::Index c = 0; c < dm; ++c) {
    const Eigen::Index pos = n - 2 - c;  // descending storage
    M.col(c) = spectrum.vectors.col(pos);
    result.selected_eigenvalues(c) = spectrum.values(pos);
  }

  Matrix out = Matrix::Zero(aligned.n_words(), dm);
  std::vector<bool> is_training(static_cast<std::size_t>(aligned.n_words()), false);
  for (Eigen::Index t = 0; t < n; ++t) {
    out.row(training[static_cast<std::size_t>(t)]) = M.row(t);
    is_training[static_cast<std::size_t>(training[static_cast<std::size_t>(t)])] = true;
  }

  // out-of-sample words: fit reconstruction weights against training neighbours,
  // renormalise to sum 1 and combine the training meta rows
  for (Eigen::Index w = 0; w < aligned.n_words(); ++w) {
    if (is_training[static_cast<std::size_t>(w)]) continue;
    std::vector<std::vector<Eigen::Index>> nb_per_source(n_src);
    std::set<Eigen::Index> cand_set;
    for (std::size_t j = 0; j < n_src; ++j) {
      if (!aligned.presence(w, static_cast<Eigen::Index>(j))) continue;
      const Vector x = aligned.row(j, w);
      std::vector<std::pair<double, Eigen::Index>> scored;
      const double nx = x.norm();
      for (Eigen::Index t = 0; t < n; ++t) {
        const double nr = R[j].row(t).norm();
        const double sim = (nx == 0.0 || nr == 0.0) ? -2.0 : x.dot(R[j].row(t).transpose()) / (nx * nr);
        scored.emplace_back(-sim, t);
      }
      std::sort(scored.begin(), scored.end());
      for (int i = 0; i < k && i < static_cast<int>(scored.size()); ++i) {
        nb_per_source[j].push_back(scored[static_cast<std::size_t>(i)].second);
        cand_set.insert(scored[static_cast<std::size_t>(i)].second);
      }
    }
    if (cand_set.empty()) continue;  // unreachable: every union word is in some source
    std::vector<Eigen::Index> cand(cand_set.begin(), cand_set.end());
    Eigen::Index rows = 0;
    for (std::size_t j = 0; j < n_src; ++j)
      if (!nb_per_source[j].empty()) rows += aligned.sources[j].dim();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(cand.size()));
    Eigen::VectorXd target(rows);
    Eigen::Index row0 = 0;
    for (std::size_t j = 0; j < n_src; ++j) {
      if (nb_per_source[j].empty()) continue;
      const Eigen::Index dj = aligned.sources[j].dim();
      target.segment(row0, dj) = aligned.row(j, w);
      for (std::size_t ci = 0; ci < cand.size(); ++ci) {
        const auto& nb = nb_per_source[j];
        if (std::find(nb.begin(), nb.end(), cand[ci]) != nb.end())
          B.block(row0, static_cast<Eigen::Index>(ci), dj, 1) = R[j].row(cand[ci]).transpose();
      }
      row0 += dj;
    }
    Eigen::MatrixXd gram = B.transpose() * B;
    gram.diagonal().array() += 1e-10;
    Eigen::VectorXd a = gram.ldlt().solve(B.transpose() * target);

    Vector combo = Vector::Zero(dm);
    double weight_sum = 0.0;
    for (std::size_t ci = 0; ci < cand.size(); ++ci) {
      double count = 0.0;
      for (std::size_t j = 0; j < n_src; ++j) {
        const auto& nb = nb_per_source[j];
        count += std::find(nb.begin(), nb.end(), cand[ci]) != nb.end() ? 1.0 : 0.0;
      }
      const double cw = a(static_cast<Eigen::Index>(ci)) * count;
      combo += cw * M.row(cand[ci]).transpose();
      weight_sum += cw;
    }
    if (std::abs(weight_sum) > 1e-12) combo /= weight_sum;
    out.row(w) = combo.transpose();
  }

  result.meta = EmbeddingSet("lle", aligned.union_vocab, std::move(out));
  return result;
}

Vector AemePairModel::encode(int j, const Vector& x) const {
  Vector z = enc_w[static_cast<std::size_t>(j)] * x + enc_b[static_cast<std::size_t>(j)];
  if (!linear_encoder) z = z.array().tanh();
  return z;
}

Vector AemePairModel::decode(int j, const Vector& h) const {
  return dec_w[static_cast<std::size_t>(j)] * h + dec_b[static_cast<std::size_t>(j)];
}

Vector AemePairModel::combine(const Vector& x1, const Vector& x2) const {
  Vector sum = encode(0, x1) + encode(1, x2);
  const double norm = sum.norm();
  if (norm <= 1e-15) return Vector::Zero(sum.size());
  return sum / norm;
}

AemePairModel AemePairModel::identity(Eigen::Index dim) {
  AemePairModel m;
  for (int j = 0; j < 2; ++j) {
    m.enc_w[static_cast<std::size_t>(j)] = Matrix::Identity(dim, dim);
    m.enc_b[static_cast<std::size_t>(j)] = Vector::Zero(dim);
    m.dec_w[static_cast<std::size_t>(j)] = Matrix::Identity(dim, dim);
    m.dec_b[static_cast<std::size_t>(j)] = Vector::Zero(dim);
  }
  m.linear_encoder = true;
  return m;
}

namespace {

struct AemeLayout {
  Eigen::Index d1, d2, dm;
  Eigen::Index total() const { return dm * d1 + dm + dm * d2 + dm + d1 * dm + d1 + d2 * dm + d2; }
};

AemePairModel unpack_aeme(const Eigen::VectorXd& p, const AemeLayout& L) {
  AemePairModel m;
  Eigen::Index at = 0;
  auto take_mat = [&](Eigen::Index r, Eigen::Index c) {
    Matrix out = Eigen::Map<const Matrix>(p.data() + at, r, c);
    at += r * c;
    return out;
  };
  auto take_vec = [&](Eigen::Index r) {
    Vector out = p.segment(at, r);
    at += r;
    return out;
  };
  m.enc_w[0] = take_mat(L.dm, L.d1);
  m.enc_b[0] = take_vec(L.dm);
  m.enc_w[1] = take_mat(L.dm, L.d2);
  m.enc_b[1] = take_vec(L.dm);
  m.dec_w[0] = take_mat(L.d1, L.dm);
  m.dec_b[0] = take_vec(L.d1);
  m.dec_w[1] = take_mat(L.d2, L.dm);
  m.dec_b[1] = take_vec(L.d2);
  return m;
}

// Trains one pair of sources; returns the union-vocab meta set.
std::pair<EmbeddingSet, AemePairModel> aeme_fit_pair(const EmbeddingSet& s1, const EmbeddingSet& s2,
                                                     const MetaConfig& cfg, unsigned long long seed,
                                                     std::vector<double>* losses) {
  const auto aligned = align({s1, s2}, AlignPolicy::union_zero);
  const auto training = aligned.intersection_indices();
  if (training.empty()) throw EmptyTrainingSet("aeme needs a non-empty intersection vocabulary");
  const Eigen::Index n = static_cast<Eigen::Index>(training.size());

  AemeLayout L{s1.dim(), s2.dim(),
               cfg.meta_dim > 0 ? cfg.meta_dim : std::max(s1.dim(), s2.dim())};

  std::vector<double> lambda = cfg.lambdas;
  if (lambda.empty()) lambda = {0.5, 0.5};
  if (lambda.size() != 2) throw ConfigError("aeme lambdas must have one entry per source");
  const double lsum = lambda[0] + lambda[1];
  if (!(lsum > 0.0)) throw ConfigError("aeme lambdas must sum to a positive value");
  lambda[0] /= lsum;
  lambda[1] /= lsum;

  Matrix X1(n, L.d1), X2(n, L.d2);
  for (Eigen::Index t = 0; t < n; ++t) {
    X1.row(t) = aligned.row(0, training[static_cast<std::size_t>(t)]).transpose();
    X2.row(t) = aligned.row(1, training[static_cast<std::size_t>(t)]).transpose();
  }

  auto objective = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    const AemePairModel m = unpack_aeme(p, L);
    double loss = 0.0;
    std::array<Matrix, 2> g_enc_w{Matrix::Zero(L.dm, L.d1), Matrix::Zero(L.dm, L.d2)};
    std::array<Vector, 2> g_enc_b{Vector::Zero(L.dm), Vector::Zero(L.dm)};
    std::array<Matrix, 2> g_dec_w{Matrix::Zero(L.d1, L.dm), Matrix::Zero(L.d2, L.dm)};
    std::array<Vector, 2> g_dec_b{Vector::Zero(L.d1), Vector::Zero(L.d2)};

    for (Eigen::Index t = 0; t < n; ++t) {
      for (int j = 0; j < 2; ++j) {
        const Vector x = (j == 0 ? X1.row(t) : X2.row(t)).transpose();
        const Vector h = m.encode(j, x);
        const Vector r = x - m.decode(j, h);
        loss += lambda[static_cast<std::size_t>(j)] * r.squaredNorm();
        if (grad) {
          const double lj = lambda[static_cast<std::size_t>(j)];
          g_dec_w[static_cast<std::size_t>(j)] += -2.0 * lj * r * h.transpose();
          g_dec_b[static_cast<std::size_t>(j)] += -2.0 * lj * r;
          Vector dh = -2.0 * lj * (m.dec_w[static_cast<std::size_t>(j)].transpose() * r);
          if (!m.linear_encoder) dh.array() *= (1.0 - h.array().square());
          g_enc_w[static_cast<std::size_t>(j)] += dh * x.transpose();
          g_enc_b[static_cast<std::size_t>(j)] += dh;
        }
      }
    }
    if (grad) {
      grad->resize(L.total());
      Eigen::Index at = 0;
      auto put_mat = [&](const Matrix& mat) {
        Eigen::Map<Matrix>(grad->data() + at, mat.rows(), mat.cols()) = mat;
        at += mat.size();
      };
      auto put_vec = [&](const Vector& v) {
        grad->segment(at, v.size()) = v;
        at += v.size();
      };
      put_mat(g_enc_w[0]);
      put_vec(g_enc_b[0]);
      put_mat(g_enc_w[1]);
      put_vec(g_enc_b[1]);
      put_mat(g_dec_w[0]);
      put_vec(g_dec_b[0]);
      put_mat(g_dec_w[1]);
      put_vec(g_dec_b[1]);
    }
    return loss;
  };

  // weights uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)); biases start at zero
  std::mt19937_64 rng(seed);
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(L.total());
  Eigen::Index at = 0;
  auto init_mat = [&](Eigen::Index r, Eigen::Index c, Eigen::Index fan_in) {
    std::uniform_real_distribution<double> u(-1.0 / std::sqrt(static_cast<double>(fan_in)),
                                             1.0 / std::sqrt(static_cast<double>(fan_in)));
    for (Eigen::Index i = 0; i < r * c; ++i) p0(at + i) = u(rng);
    at += r * c;
  };
  init_mat(L.dm, L.d1, L.d1);
  at += L.dm;
  init_mat(L.dm, L.d2, L.d2);
  at += L.dm;
  init_mat(L.d1, L.dm, L.dm);
  at += L.d1;
  init_mat(L.d2, L.dm, L.dm);
  at += L.d2;

  OptimizerConfig opt = cfg.optimizer;
  opt.seed = seed;
  const Eigen::VectorXd trained = minimize(objective, std::move(p0), opt, losses);
  const AemePairModel model = unpack_aeme(trained, L);

  Matrix out(aligned.n_words(), L.dm);
  for (Eigen::Index w = 0; w < aligned.n_words(); ++w)
    out.row(w) = model.combine(aligned.row(0, w), aligned.row(1, w)).transpose();
  return {EmbeddingSet("aeme", aligned.union_vocab, std::move(out)), model};
}

}  // namespace

AemeResult aeme_fit(const AlignedSources& aligned, const MetaConfig& cfg) {
  if (aligned.n_sources() < 2) throw InvalidArgument("aeme requires at least two sources");

  AemeResult result{EmbeddingSet("aeme", {"tmp"}, Matrix::Ones(1, 1)), {}, {}};
  EmbeddingSet current = aligned.sources[0];
  for (std::size_t j = 1; j < aligned.n_sources(); ++j) {
    std::vector<double> losses;
    auto [meta, model] =
        aeme_fit_pair(current, aligned.sources[j], cfg, cfg.optimizer.seed + (j - 1), &losses);
    result.stages.push_back(std::move(model));
    result.epoch_losses.push_back(std::move(losses));
    current = std::move(meta);
  }
  result.meta = current.renamed("aeme");
  return result;
}

EmbeddingSet meta_fit(const AlignedSources& aligned, const MetaConfig& cfg) {
  switch (cfg.method) {
    case MetaMethod::conc: return conc(aligned);
    case MetaMethod::avg: return avg(aligned);
    case MetaMethod::gle: return gle_fit(aligned, cfg).meta;
    case MetaMethod::lle: return lle_fit(aligned, cfg).meta;
    case MetaMethod::aeme: return aeme_fit(aligned, cfg).meta;
  }
  throw ConfigError("unknown meta method");
}

}  // namespace metafair

#include "metafair/debias.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace metafair {

DebiasMethod debias_method_from_string(const std::string& s) {
  if (s == "identity" || s == "none") return DebiasMethod::identity;
  if (s == "hard") return DebiasMethod::hard;
  if (s == "inlp") return DebiasMethod::inlp;
  if (s == "dict") return DebiasMethod::dict;
  throw ConfigError("unknown debias method: " + s);
}

std::string to_string(DebiasMethod m) {
  switch (m) {
    case DebiasMethod::identity: return "identity";
    case DebiasMethod::hard: return "hard";
    case DebiasMethod::inlp: return "inlp";
    case DebiasMethod::dict: return "dict";
  }
  return "?";
}

void BiasBasis::validate() const {
  const Eigen::MatrixXd gram = directions.transpose() * directions;
  const double err =
      (gram - Eigen::MatrixXd::Identity(k(), k())).cwiseAbs().maxCoeff();
  if (err > 1e-8)
    throw NumericError("bias basis not orthonormal, deviation " + std::to_string(err));
}

void DebiasConfig::validate() const {
  if (method == DebiasMethod::hard && k < 1) throw ConfigError("hard debias needs k >= 1");
  if (method == DebiasMethod::inlp && m < 1) throw ConfigError("inlp needs m >= 1");
  if (method == DebiasMethod::dict) {
    if (alpha < 0 || beta < 0 || gamma < 0 || std::abs(alpha + beta + gamma - 1.0) > 1e-9)
      throw ConfigError("dict weights must be non-negative and sum to 1");
  }
}

BiasBasis bias_subspace(const EmbeddingSet& set, const GenderLexicon& lex, Eigen::Index k,
                        DebiasNotes* notes) {
  if (k < 1 || k > set.dim()) throw InvalidArgument("bias subspace rank out of range");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(set.dim(), set.dim());
  std::size_t resolved = 0;
  for (const auto& [m_tok, f_tok] : lex.defining_pairs) {
    const Eigen::Index rm = set.find(m_tok), rf = set.find(f_tok);
    if (rm < 0 || rf < 0) {
      if (notes) {
        if (rm < 0) notes->missing_tokens.push_back(m_tok);
        if (rf < 0) notes->missing_tokens.push_back(f_tok);
      }
      continue;
    }
    ++resolved;
    const Vector vm = set.matrix().row(rm).transpose();
    const Vector vf = set.matrix().row(rf).transpose();
    const Vector mu = 0.5 * (vm + vf);
    C += ((vm - mu) * (vm - mu).transpose() + (vf - mu) * (vf - mu).transpose()) / 2.0;
  }
  if (resolved == 0) throw EmptyDefiningSets("no defining pair resolves against the vocabulary");
  if (C.cwiseAbs().maxCoeff() <= 1e-30)
    throw DegenerateSubspace("defining pairs have zero within-pair variance");

  const auto spectrum = sym_eigen(C);
  BiasBasis basis{spectrum.vectors.leftCols(k)};
  basis.validate();
  return basis;
}

EmbeddingSet hard_debias(const EmbeddingSet& set, const BiasBasis& basis, const GenderLexicon& lex,
                         DebiasNotes* notes) {
  if (basis.dim() != set.dim())
    throw InvalidArgument("bias basis dimensionality does not match the embedding set");
  basis.validate();

  Matrix out = set.matrix();
  for (Eigen::Index r = 0; r < set.size(); ++r) {
    const std::string& token = set.vocab()[static_cast<std::size_t>(r)];
    if (!lex.is_neutral(token)) continue;
    const Vector w = set.matrix().row(r).transpose();
    const Vector w_b = basis.directions * (basis.directions.transpose() * w);
    const Vector residual = w - w_b;
    const double norm = residual.norm();
    if (norm <= 1e-12 * std::max(1.0, w.norm())) {
      if (notes) notes->degenerate_words.push_back(token);
      continue;  // left unchanged and reported
    }
    out.row(r) = (residual / norm).transpose();
  }
  return {set.name() + "+hard", set.vocab(), std::move(out)};
}

namespace {

// Gendered training rows: masculine -> +1, feminine -> -1, from defining and
// seed pairs resolved against the vocabulary.
std::pair<Eigen::MatrixXd, Eigen::VectorXi> inlp_training_data(const EmbeddingSet& set,
                                                               const GenderLexicon& lex,
                                                               DebiasNotes* notes) {
  std::vector<Eigen::Index> rows;
  std::vector<int> labels;
  std::set<std::string> seen;
  auto add = [&](const std::string& tok, int label) {
    if (!seen.insert(tok).second) return;
    const Eigen::Index r = set.find(tok);
    if (r < 0) {
      if (notes) notes->missing_tokens.push_back(tok);
      return;
    }
    rows.push_back(r);
    labels.push_back(label);
  };
  for (const auto& [m_tok, f_tok] : lex.defining_pairs) {
    add(m_tok, 1);
    add(f_tok, -1);
  }
  for (const auto& [m_tok, f_tok] : lex.seed_pairs) {
    add(m_tok, 1);
    add(f_tok, -1);
  }

  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), set.dim());
  Eigen::VectorXi y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = set.matrix().row(rows[i]);
    y(static_cast<Eigen::Index>(i)) = labels[i];
  }
  return {std::move(X), std::move(y)};
}

}  // namespace

InlpResult inlp_debias(const EmbeddingSet& set, const GenderLexicon& lex, const DebiasConfig& cfg,
                       DebiasNotes* notes) {
  if (cfg.m < 1) throw ConfigError("inlp needs m >= 1");
  auto [X, y] = inlp_training_data(set, lex, notes);
  int n_pos = 0, n_neg = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) == 1 ? n_pos : n_neg)++;
  if (n_pos < 2 || n_neg < 2)
    throw DegenerateLabels("inlp needs at least 2 resolvable words per gender class");

  const Eigen::Index d = set.dim();
  Eigen::MatrixXd basis(d, 0);  // orthonormal removed directions
  InlpResult result{EmbeddingSet("tmp", {"tmp"}, Matrix::Ones(1, 1)), Eigen::MatrixXd::Identity(d, d), {}};
  const double majority =
      static_cast<double>(std::max(n_pos, n_neg)) / static_cast<double>(y.size());

  for (int i = 0; i < cfg.m; ++i) {
    OptimizerConfig opt = cfg.optimizer;
    opt.seed = cfg.optimizer.seed + static_cast<unsigned long long>(i);
    const LinearClassifier clf = fit_logistic(X, y, opt);

    int correct = 0;
    for (Eigen::Index r = 0; r < X.rows(); ++r)
      correct += clf.predict(X.row(r).transpose()) == y(r);
    const double accuracy = static_cast<double>(correct) / static_cast<double>(X.rows());
    result.classifier_accuracies.push_back(accuracy);

    // the classifier is at chance: no detectable bias left to project away
    if (accuracy <= majority) break;

    Vector dir = clf.weights;
    if (dir.norm() <= 1e-10) break;  // no separating signal left
    dir.normalize();
    // keep the accumulated projection exactly symmetric-idempotent
    dir -= basis * (basis.transpose() * dir);
    const double rem = dir.norm();
    if (rem <= 1e-8) break;
    dir /= rem;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = dir;
    X -= (X * dir) * dir.transpose();
  }

  result.projection = Eigen::MatrixXd::Identity(d, d) - basis * basis.transpose();
  Matrix out = set.matrix() * result.projection;  // P symmetric: row-wise P*w
  result.debiased = EmbeddingSet(set.name() + "+inlp", set.vocab(), std::move(out));
  return result;
}

EmbeddingSet sif_gloss_embed(const EmbeddingSet& set, const DictCorpus& corpus,
                             const SifOptions& opts, DebiasNotes* notes) {
  std::vector<std::string> vocab;
  std::vector<Vector> rows;
  for (const auto& [token, gloss] : corpus.glosses) {
    Vector acc = Vector::Zero(set.dim());
    std::size_t resolved = 0;
    std::size_t skipped = 0;
    std::istringstream ls(gloss);
    std::string t;
    while (ls >> t) {
      const Eigen::Index r = set.find(t);
      if (r < 0) {
        ++skipped;
        continue;
      }
      const double weight = corpus.sif_a / (corpus.sif_a + corpus.prob(t));
      acc += weight * set.matrix().row(r).transpose();
      ++resolved;
    }
    if (notes) notes->skipped_gloss_tokens += skipped;
    if (resolved == 0) {
      if (!opts.skip_empty_glosses) throw EmptyGloss(token);
      if (notes) notes->empty_gloss_words.push_back(token);
      continue;
    }
    vocab.push_back(token);
    rows.push_back(acc / static_cast<double>(resolved));
  }
  if (vocab.empty()) throw EmptyTrainingSet("no gloss resolves against the vocabulary");

  Matrix G(static_cast<Eigen::Index>(rows.size()), set.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) G.row(static_cast<Eigen::Index>(i)) = rows[i];

  if (opts.remove_first_pc && G.rows() > 0 && G.cwiseAbs().maxCoeff() > 0.0) {
    const auto s = svd(G, 1);
    const Vector u = s.vectors.col(0);
    G -= (G * u) * u.transpose();
  }
  return {"gloss(" + set.name() + ")", std::move(vocab), std::move(G)};
}

Vector reject(const Vector& w, const Vector& g, bool true_rejection) {
  const double gn = g.norm();
  if (gn <= 1e-15) return w;
  const double denom = true_rejection ? gn * gn : gn;
  return w - (w.dot(g) / denom) * g;
}

Vector DictModel::encode(const Vector& x) const {
  Vector z = enc_w * x + enc_b;
  if (!linear_encoder) z = z.array().tanh();
  return z;
}

DictModel DictModel::identity(Eigen::Index dim) {
  DictModel m;
  m.enc_w = Matrix::Identity(dim, dim);
  m.enc_b = Vector::Zero(dim);
  m.dec_c_w = Matrix::Identity(dim, dim);
  m.dec_c_b = Vector::Zero(dim);
  m.dec_d_w = Matrix::Identity(dim, dim);
  m.dec_d_b = Vector::Zero(dim);
  m.linear_encoder = true;
  return m;
}

Eigen::Index DictProblem::n_params() const { return 3 * dim * dim + 3 * dim; }

Eigen::VectorXd DictProblem::pack(const DictModel& m) const {
  Eigen::VectorXd p(n_params());
  Eigen::Index at = 0;
  auto put_mat = [&](const Matrix& mat) {
    Eigen::Map<Matrix>(p.data() + at, mat.rows(), mat.cols()) = mat;
    at += mat.size();
  };
  auto put_vec = [&](const Vector& v) {
    p.segment(at, v.size()) = v;
    at += v.size();
  };
  put_mat(m.enc_w);
  put_vec(m.enc_b);
  put_mat(m.dec_c_w);
  put_vec(m.dec_c_b);
  put_mat(m.dec_d_w);
  put_vec(m.dec_d_b);
  return p;
}

DictModel DictProblem::unpack(const Eigen::VectorXd& p) const {
  DictModel m;
  Eigen::Index at = 0;
  auto take_mat = [&]() {
    Matrix out = Eigen::Map<const Matrix>(p.data() + at, dim, dim);
    at += dim * dim;
    return out;
  };
  auto take_vec = [&]() {
    Vector out = p.segment(at, dim);
    at += dim;
    return out;
  };
  m.enc_w = take_mat();
  m.enc_b = take_vec();
  m.dec_c_w = take_mat();
  m.dec_c_b = take_vec();
  m.dec_d_w = take_mat();
  m.dec_d_b = take_vec();
  m.linear_encoder = linear_encoder;
  return m;
}

double DictProblem::eval(const Eigen::VectorXd& p, Eigen::VectorXd* grad) const {
  const DictModel m = unpack(p);
  const Eigen::Index n = words.rows();
  double loss = 0.0;

  Matrix g_enc_w = Matrix::Zero(dim, dim), g_dec_c_w = Matrix::Zero(dim, dim),
         g_dec_d_w = Matrix::Zero(dim, dim);
  Vector g_enc_b = Vector::Zero(dim), g_dec_c_b = Vector::Zero(dim), g_dec_d_b = Vector::Zero(dim);

  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector w = words.row(i).transpose();
    const Vector g = glosses.row(i).transpose();
    const Vector h = m.encode(w);

    const Vector r_c = w - (m.dec_c_w * h + m.dec_c_b);
    const Vector r_d = g - (m.dec_d_w * h + m.dec_d_b);
    loss += alpha * r_c.squaredNorm() + beta * r_d.squaredNorm();

    Vector dh = Vector::Zero(dim);
    if (grad) {
      g_dec_c_w += -2.0 * alpha * r_c * h.transpose();
      g_dec_c_b += -2.0 * alpha * r_c;
      g_dec_d_w += -2.0 * beta * r_d * h.transpose();
      g_dec_d_b += -2.0 * beta * r_d;
      dh = -2.0 * alpha * (m.dec_c_w.transpose() * r_c) - 2.0 * beta * (m.dec_d_w.transpose() * r_d);
    }

    if (use_ja[static_cast<std::size_t>(i)] && gamma != 0.0) {
      const Vector phi = rejections.row(i).transpose();
      const Vector h_phi = m.encode(phi);
      const double inner = h_phi.dot(h);
      loss += gamma * inner * inner;
      if (grad) {
        dh += gamma * 2.0 * inner * h_phi;
        Vector dh_phi = gamma * 2.0 * inner * h;
        if (!m.linear_encoder) dh_phi.array() *= (1.0 - h_phi.array().square());
        g_enc_w += dh_phi * phi.transpose();
        g_enc_b += dh_phi;
      }
    }

    if (grad) {
      if (!m.linear_encoder) dh.array() *= (1.0 - h.array().square());
      g_enc_w += dh * w.transpose();
      g_enc_b += dh;
    }
  }

  if (grad) {
    DictModel gm;
    gm.enc_w = g_enc_w;
    gm.enc_b = g_enc_b;
    gm.dec_c_w = g_dec_c_w;
    gm.dec_c_b = g_dec_c_b;
    gm.dec_d_w = g_dec_d_w;
    gm.dec_d_b = g_dec_d_b;
    *grad = pack(gm);
  }
  return loss;
}

DictProblem DictProblem::build(const EmbeddingSet& set, const DictCorpus& corpus,
                               const DebiasConfig& cfg, DebiasNotes* notes) {
  cfg.validate();
  SifOptions sif_opts;
  sif_opts.skip_empty_glosses = true;
  const EmbeddingSet gloss_set = sif_gloss_embed(set, corpus, sif_opts, notes);

  std::vector<Eigen::Index> word_rows, gloss_rows;
  for (Eigen::Index r = 0; r < gloss_set.size(); ++r) {
    const Eigen::Index w = set.find(gloss_set.vocab()[static_cast<std::size_t>(r)]);
    if (w < 0) continue;  // gloss entry for a word outside this embedding
    word_rows.push_back(w);
    gloss_rows.push_back(r);
  }
  if (word_rows.empty()) throw EmptyTrainingSet("no dictionary entry matches the vocabulary");

  DictProblem prob;
  prob.alpha = cfg.alpha;
  prob.beta = cfg.beta;
  prob.gamma = cfg.gamma;
  prob.dim = set.dim();
  prob.words.resize(static_cast<Eigen::Index>(word_rows.size()), set.dim());
  prob.glosses.resize(static_cast<Eigen::Index>(word_rows.size()), set.dim());
  prob.rejections.resize(static_cast<Eigen::Index>(word_rows.size()), set.dim());
  for (std::size_t i = 0; i < word_rows.size(); ++i) {
    const Eigen::Index row = static_cast<Eigen::Index>(i);
    prob.words.row(row) = set.matrix().row(word_rows[i]);
    prob.glosses.row(row) = gloss_set.matrix().row(gloss_rows[i]);
    const Vector w = prob.words.row(row).transpose();
    const Vector g = prob.glosses.row(row).transpose();
    const bool usable = g.norm() > 1e-15;
    prob.use_ja.push_back(usable);
    if (!usable && notes)
      notes->zero_gloss_words.push_back(gloss_set.vocab()[static_cast<std::size_t>(gloss_rows[i])]);
    prob.rejections.row(row) = reject(w, g, cfg.true_rejection).transpose();
  }
  return prob;
}

DictResult dict_debias(const EmbeddingSet& set, const DictCorpus& corpus, const DebiasConfig& cfg,
                       DebiasNotes* notes) {
  DictProblem prob = DictProblem::build(set, corpus, cfg, notes);

  std::mt19937_64 rng(cfg.optimizer.seed);
  const Eigen::Index d = prob.dim;
  std::uniform_real_distribution<double> u(-1.0 / std::sqrt(static_cast<double>(d)),
                                           1.0 / std::sqrt(static_cast<double>(d)));
  // pack order is [enc_w enc_b dec_c_w dec_c_b dec_d_w dec_d_b]; biases start at zero
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(prob.n_params());
  for (Eigen::Index i = 0; i < d * d; ++i) p0(i) = u(rng);                          // enc_w
  for (Eigen::Index i = 0; i < d * d; ++i) p0(d * d + d + i) = u(rng);              // dec_c_w
  for (Eigen::Index i = 0; i < d * d; ++i) p0(2 * (d * d + d) + i) = u(rng);        // dec_d_w

  std::vector<double> losses;
  auto objective = [&prob](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    return prob.eval(p, grad);
  };
  const Eigen::VectorXd trained = minimize(objective, std::move(p0), cfg.optimizer, &losses);
  DictModel model = prob.unpack(trained);

  Matrix out(set.size(), d);
  for (Eigen::Index r = 0; r < set.size(); ++r)
    out.row(r) = model.encode(set.matrix().row(r).transpose()).transpose();

  return {EmbeddingSet(set.name() + "+dict", set.vocab(), std::move(out)), std::move(model),
          std::move(losses)};
}

double preservation_check(const EmbeddingSet& meta, const std::vector<BiasBasis>& bases,
                          MetaMethod mode) {
  if (bases.empty()) throw InvalidArgument("preservation_check needs at least one basis");
  const Eigen::Index k = bases.front().k();
  for (const auto& b : bases)
    if (b.k() != k) throw InvalidArgument("all bias bases must share the same rank");

  Eigen::MatrixXd composed;  // meta_dim x k
  if (mode == MetaMethod::conc) {
    Eigen::Index total = 0;
    for (const auto& b : bases) total += b.dim();
    if (total != meta.dim())
      throw InvalidArgument("conc mode: sum of basis dims must equal the meta dim");
    composed = Eigen::MatrixXd::Zero(total, k);
    Eigen::Index at = 0;
    for (const auto& b : bases) {
      composed.block(at, 0, b.dim(), k) = b.directions;
      at += b.dim();
    }
  } else if (mode == MetaMethod::avg) {
    composed = Eigen::MatrixXd::Zero(meta.dim(), k);
    for (const auto& b : bases) {
      if (b.dim() != meta.dim())
        throw InvalidArgument("avg mode: every basis dim must equal the meta dim");
      composed += b.directions;
    }
  } else {
    throw InvalidArgument("preservation_check supports conc and avg modes only");
  }

  return (meta.matrix() * composed).cwiseAbs().maxCoeff();
}

EmbeddingSet debias_apply(const EmbeddingSet& set, const GenderLexicon& lex,
                          const DictCorpus* corpus, const DebiasConfig& cfg, DebiasNotes* notes) {
  cfg.validate();
  switch (cfg.method) {
    case DebiasMethod::identity:
      return set.renamed(set.name() + "+identity");
    case DebiasMethod::hard: {
      const BiasBasis basis = bias_subspace(set, lex, std::min(cfg.k, set.dim()), notes);
      return hard_debias(set, basis, lex, notes);
    }
    case DebiasMethod::inlp:
      return inlp_debias(set, lex, cfg, notes).debiased;
    case DebiasMethod::dict: {
      if (!corpus) throw ConfigError("dict debiasing requires a gloss corpus");
      return dict_debias(set, *corpus, cfg, notes).debiased;
    }
  }
  throw ConfigError("unknown debias method");
}

}  // namespace metafair

#include "metafair/bias_eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metafair/numerics.hpp"

namespace metafair {

namespace {

Vector unit_row(const EmbeddingSet& set, Eigen::Index r) {
  Vector v = set.matrix().row(r).transpose();
  const double n = v.norm();
  if (n == 0.0) throw NumericError("zero-norm vector for token " + set.vocab()[static_cast<std::size_t>(r)]);
  return v / n;
}

// C(n, k) capped at `cap` to avoid overflow.
std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    // result *= (n - k + i) / i, kept exact by multiplying first
    result = result * (n - k + i) / i;
    if (result > cap) return cap + 1;
  }
  return result;
}

}  // namespace

WeatQuery filter_weat_query(const EmbeddingSet& set, const WeatQuery& query,
                            std::size_t* n_skipped) {
  WeatQuery out;
  out.name = query.name;
  std::size_t skipped = 0;
  auto keep = [&](const std::vector<std::string>& toks) {
    std::vector<std::string> kept;
    for (const auto& t : toks) {
      if (set.contains(t)) kept.push_back(t);
      else ++skipped;
    }
    return kept;
  };
  out.targets_x = keep(query.targets_x);
  out.targets_y = keep(query.targets_y);
  out.attributes_a = keep(query.attributes_a);
  out.attributes_b = keep(query.attributes_b);
  // keep target sets equal-size by truncating the longer one
  const std::size_t n = std::min(out.targets_x.size(), out.targets_y.size());
  skipped += (out.targets_x.size() - n) + (out.targets_y.size() - n);
  out.targets_x.resize(n);
  out.targets_y.resize(n);
  if (n_skipped) *n_skipped = skipped;
  return out;
}

WeatResult weat(const EmbeddingSet& set, const WeatQuery& query, std::size_t n_permutations,
                unsigned long long seed) {
  query.validate();
  std::vector<std::string> missing;
  auto resolve = [&](const std::vector<std::string>& toks) {
    std::vector<Eigen::Index> rows;
    for (const auto& t : toks) {
      const Eigen::Index r = set.find(t);
      if (r < 0) missing.push_back(t);
      else rows.push_back(r);
    }
    return rows;
  };
  const auto x_rows = resolve(query.targets_x);
  const auto y_rows = resolve(query.targets_y);
  const auto a_rows = resolve(query.attributes_a);
  const auto b_rows = resolve(query.attributes_b);
  if (!missing.empty()) throw MissingWords(missing);

  // k(t, A, B) = mean_a cos(t,a) - mean_b cos(t,b), precomputed per target
  std::vector<Vector> a_units, b_units;
  for (auto r : a_rows) a_units.push_back(unit_row(set, r));
  for (auto r : b_rows) b_units.push_back(unit_row(set, r));
  auto assoc = [&](Eigen::Index r) {
    const Vector t = unit_row(set, r);
    double ma = 0.0, mb = 0.0;
    for (const auto& a : a_units) ma += t.dot(a);
    for (const auto& b : b_units) mb += t.dot(b);
    return ma / static_cast<double>(a_units.size()) - mb / static_cast<double>(b_units.size());
  };

  const std::size_t n = x_rows.size();
  const std::size_t total = 2 * n;
  std::vector<double> k_all(total);
  for (std::size_t i = 0; i < n; ++i) k_all[i] = assoc(x_rows[i]);
  for (std::size_t i = 0; i < n; ++i) k_all[n + i] = assoc(y_rows[i]);

  double sum_x = 0.0, sum_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_x += k_all[i];
    sum_y += k_all[n + i];
  }
  const double s_obs = sum_x - sum_y;

  const double mean_x = sum_x / static_cast<double>(n);
  const double mean_y = sum_y / static_cast<double>(n);
  // accumulate pooled statistics in sorted order so that swapping X and Y
  // negates the effect size bitwise
  std::vector<double> k_sorted = k_all;
  std::sort(k_sorted.begin(), k_sorted.end());
  double mean_all = 0.0;
  for (double k : k_sorted) mean_all += k;
  mean_all /= static_cast<double>(total);
  double var = 0.0;
  for (double k : k_sorted) var += (k - mean_all) * (k - mean_all);
  var /= static_cast<double>(total - 1);  // sample standard deviation
  const double sd = std::sqrt(var);
  if (sd == 0.0) throw DegenerateEffect("association scores are constant over X u Y");

  WeatResult result;
  result.s_score = s_obs;
  result.effect_size = (mean_x - mean_y) / sd;

  const double sum_all = sum_x + sum_y;
  const std::size_t n_exact = binomial_capped(total, n, 20000);
  if (n_exact <= 20000) {
    // enumerate every choice of n indices as the re-split X_i
    std::vector<std::size_t> comb(n);
    for (std::size_t i = 0; i < n; ++i) comb[i] = i;
    std::size_t greater = 0, count = 0;
    while (true) {
      double sx = 0.0;
      for (std::size_t i : comb) sx += k_all[i];
      if (2.0 * sx - sum_all > s_obs) ++greater;
      ++count;
      // next combination in lexicographic order
      std::size_t i = n;
      while (i > 0) {
        --i;
        if (comb[i] != i + total - n) break;
        if (i == 0) {
          i = total;
          break;
        }
      }
      if (i >= total) break;
      ++comb[i];
      for (std::size_t j = i + 1; j < n; ++j) comb[j] = comb[j - 1] + 1;
    }
    result.exact = true;
    result.n_splits = count;
    result.p_value = static_cast<double>(greater) / static_cast<double>(count);
  } else {
    if (n_permutations == 0) throw InvalidArgument("n_permutations must be positive");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    std::size_t greater = 0;
    for (std::size_t p = 0; p < n_permutations; ++p) {
      // partial Fisher-Yates: first n entries form the re-split
      for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, total - 1);
        std::swap(idx[i], idx[pick(rng)]);
      }
      double sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) sx += k_all[idx[i]];
      if (2.0 * sx - sum_all > s_obs) ++greater;
    }
    result.exact = false;
    result.n_splits = n_permutations;
    result.p_value = static_cast<double>(greater) / static_cast<double>(n_permutations);
  }
  return result;
}

Eigen::Index WatGraph::find(const std::string& token) const {
  const auto it = std::find(nodes.begin(), nodes.end(), token);
  return it == nodes.end() ? -1 : static_cast<Eigen::Index>(it - nodes.begin());
}

void WatGraph::validate() const {
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  if (weights.rows() != n || weights.cols() != n)
    throw InvalidArgument("wat graph weight matrix must be |nodes| x |nodes|");
  if ((weights.array() < 0.0).any()) throw InvalidArgument("wat graph weights must be >= 0");
  if ((weights - weights.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidArgument("wat graph must be undirected (symmetric weights)");
  for (const auto& [m, f] : seed_pairs) {
    if (find(m) < 0 || find(f) < 0) throw InvalidArgument("seed pair not contained in graph nodes");
  }
}

WatGraph load_wat_graph(const std::string& edges_tsv, const std::string& seeds_json) {
  std::ifstream in(edges_tsv);
  if (!in) throw IoError("cannot open " + edges_tsv);
  struct Edge {
    std::string u, v;
    double w;
  };
  std::vector<Edge> edges;
  std::vector<std::string> nodes;
  std::map<std::string, Eigen::Index> index;
  auto intern = [&](const std::string& tok) {
    auto [it, inserted] = index.emplace(tok, static_cast<Eigen::Index>(nodes.size()));
    if (inserted) nodes.push_back(tok);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Edge e;
    if (!(ls >> e.u >> e.v >> e.w)) throw ParseError(line_no, "expected \"u<TAB>v<TAB>weight\"");
    if (e.w < 0.0) throw ParseError(line_no, "negative edge weight");
    intern(e.u);
    intern(e.v);
    edges.push_back(std::move(e));
  }

  std::ifstream sin(seeds_json);
  if (!sin) throw IoError("cannot open " + seeds_json);
  nlohmann::json j;
  try {
    sin >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, std::string("invalid json in ") + seeds_json + ": " + e.what());
  }

  WatGraph g;
  for (const auto& p : j.at("seed_pairs")) {
    if (!p.is_array() || p.size() != 2) throw ParseError(1, "seed_pairs entries must be pairs");
    const std::string m = p[0].get<std::string>(), f = p[1].get<std::string>();
    intern(m);  // isolated seed nodes are allowed
    intern(f);
    g.seed_pairs.emplace_back(m, f);
  }

  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  g.nodes = std::move(nodes);
  g.weights = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges) {
    const Eigen::Index a = index[e.u], b = index[e.v];
    g.weights(a, b) += e.w;
    if (a != b) g.weights(b, a) += e.w;
  }
  g.validate();
  return g;
}

WatPropagation wat_propagate(const WatGraph& graph, double alpha, double tol, int max_iters) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("wat damping must lie in (0,1)");
  graph.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(graph.nodes.size());

  Eigen::VectorXd degree = graph.weights.rowwise().sum();
  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt(i) = degree(i) > 0.0 ? 1.0 / std::sqrt(degree(i)) : 0.0;
  const Eigen::MatrixXd S = inv_sqrt.asDiagonal() * graph.weights * inv_sqrt.asDiagonal();

  Matrix Y = Matrix::Zero(n, 2);
  for (const auto& [m, f] : graph.seed_pairs) {
    Y(graph.find(m), 0) = 1.0;
    Y(graph.find(f), 1) = 1.0;
  }

  WatPropagation out;
  Matrix F = Y;
  for (int it = 0; it < max_iters; ++it) {
    Matrix next = alpha * (S * F) + (1.0 - alpha) * Y;
    out.residual = (next - F).cwiseAbs().maxCoeff();
    out.residual_history.push_back(out.residual);
    F = std::move(next);
    out.iterations = it + 1;
    if (out.residual <= tol) {
      out.scores = std::move(F);
      return out;
    }
  }
  throw NonConvergence(out.residual);
}

double wat_score(const EmbeddingSet& set, const WatGraph& graph, const WatPropagation& props,
                 double eps) {
  if (props.scores.rows() != static_cast<Eigen::Index>(graph.nodes.size()))
    throw InvalidArgument("propagation output does not match the graph");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");

  // embedding-side gender axis from the resolvable seed pairs
  std::vector<std::pair<Vector, Vector>> seeds;
  for (const auto& [m, f] : graph.seed_pairs) {
    const Eigen::Index rm = set.find(m), rf = set.find(f);
    if (rm < 0 || rf < 0) continue;
    if (set.matrix().row(rm).norm() == 0.0 || set.matrix().row(rf).norm() == 0.0) continue;
    seeds.emplace_back(unit_row(set, rm), unit_row(set, rf));
  }
  if (seeds.empty()) throw InsufficientOverlap("no seed pair resolves against the vocabulary");

  std::vector<double> graph_bias, embed_bias;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const Eigen::Index r = set.find(graph.nodes[i]);
    if (r < 0 || set.matrix().row(r).norm() == 0.0) continue;
    const Vector w = unit_row(set, r);
    double score = 0.0;
    for (const auto& [m, f] : seeds) score += w.dot(m) - w.dot(f);
    score /= static_cast<double>(seeds.size());
    const double gb = std::log((props.scores(static_cast<Eigen::Index>(i), 0) + eps) /
                               (props.scores(static_cast<Eigen::Index>(i), 1) + eps));
    if (!std::isfinite(gb) || !std::isfinite(score)) continue;
    graph_bias.push_back(gb);
    embed_bias.push_back(score);
  }
  if (graph_bias.size() < 2)
    throw InsufficientOverlap("fewer than 2 words carry both a graph and an embedding score");
  return pearson(graph_bias, embed_bias);
}

SemBiasResult sembias(const EmbeddingSet& set, const std::vector<SemBiasInstance>& instances,
                      const std::pair<std::string, std::string>& direction_pair, bool subset_only) {
  const Eigen::Index rh = set.find(direction_pair.first);
  const Eigen::Index rs = set.find(direction_pair.second);
  std::vector<std::string> missing;
  if (rh < 0) missing.push_back(direction_pair.first);
  if (rs < 0) missing.push_back(direction_pair.second);
  if (!missing.empty()) throw MissingWords(missing);

  const Vector direction =
      set.matrix().row(rh).transpose() - set.matrix().row(rs).transpose();
  if (direction.norm() == 0.0) throw NumericError("gender direction is the zero vector");

  SemBiasResult result;
  std::size_t counts[3] = {0, 0, 0};  // definition, stereotype, none
  for (const auto& inst : instances) {
    if (subset_only && !inst.in_subset) continue;
    bool ok = true;
    std::array<Vector, 4> diffs;
    for (int p = 0; p < 4 && ok; ++p) {
      const Eigen::Index ra = set.find(inst.pairs[static_cast<std::size_t>(p)].first);
      const Eigen::Index rb = set.find(inst.pairs[static_cast<std::size_t>(p)].second);
      if (ra < 0 || rb < 0) {
        ok = false;
        break;
      }
      diffs[static_cast<std::size_t>(p)] =
          set.matrix().row(ra).transpose() - set.matrix().row(rb).transpose();
    }
    if (!ok) {
      ++result.n_skipped;
      continue;
    }
    int best = 0;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < 4; ++p) {
      const Vector& d = diffs[static_cast<std::size_t>(p)];
      const double sim = d.norm() == 0.0
                             ? -std::numeric_limits<double>::infinity()
                             : direction.dot(d) / (direction.norm() * d.norm());
      if (sim > best_sim) {  // strict: ties keep the lowest index
        best_sim = sim;
        best = p;
      }
    }
    ++counts[best == 0 ? 0 : (best == 1 ? 1 : 2)];
    ++result.n_scored;
  }
  if (result.n_scored == 0) throw NoScorableInstances("every instance was skipped");

  const double total = static_cast<double>(result.n_scored);
  result.definition_pct = 100.0 * static_cast<double>(counts[0]) / total;
  result.stereotype_pct = 100.0 * static_cast<double>(counts[1]) / total;
  result.none_pct = 100.0 * static_cast<double>(counts[2]) / total;
  return result;
}

}  // namespace metafair

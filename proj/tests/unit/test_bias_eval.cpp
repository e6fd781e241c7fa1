#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "metafair/bias_eval.hpp"
#include "metafair/numerics.hpp"

using namespace metafair;

namespace {

EmbeddingSet make_set(const std::string& name, std::vector<std::string> vocab,
                      std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return {name, std::move(vocab), std::move(m)};
}

// Independent WEAT route: raw cosines, bitmask split enumeration.
struct BruteWeat {
  double s = 0.0, effect = 0.0, p = 0.0;
};

BruteWeat brute_weat(const EmbeddingSet& set, const WeatQuery& q) {
  auto cosv = [&](const std::string& a, const std::string& b) {
    const Vector va = set.lookup(a), vb = set.lookup(b);
    return va.dot(vb) / (va.norm() * vb.norm());
  };
  auto assoc = [&](const std::string& t) {
    double ma = 0, mb = 0;
    for (const auto& a : q.attributes_a) ma += cosv(t, a);
    for (const auto& b : q.attributes_b) mb += cosv(t, b);
    return ma / q.attributes_a.size() - mb / q.attributes_b.size();
  };
  std::vector<std::string> pool = q.targets_x;
  pool.insert(pool.end(), q.targets_y.begin(), q.targets_y.end());
  const std::size_t total = pool.size(), half = q.targets_x.size();

  std::vector<double> k(total);
  for (std::size_t i = 0; i < total; ++i) k[i] = assoc(pool[i]);

  BruteWeat out;
  double sum_x = 0, sum_y = 0;
  for (std::size_t i = 0; i < half; ++i) sum_x += k[i];
  for (std::size_t i = half; i < total; ++i) sum_y += k[i];
  out.s = sum_x - sum_y;

  double mean = 0;
  for (double v : k) mean += v;
  mean /= total;
  double var = 0;
  for (double v : k) var += (v - mean) * (v - mean);
  var /= (total - 1);
  out.effect = (sum_x / half - sum_y / half) / std::sqrt(var);

  std::size_t greater = 0, count = 0;
  for (unsigned mask = 0; mask < (1u << total); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != half) continue;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < total; ++i) (mask >> i & 1 ? sx : sy) += k[i];
    if (sx - sy > out.s) ++greater;
    ++count;
  }
  out.p = static_cast<double>(greater) / count;
  return out;
}

EmbeddingSet random_unit_set(std::mt19937_64& rng, int n, int dim) {
  std::normal_distribution<double> g;
  Matrix m(n, dim);
  std::vector<std::string> vocab;
  for (int i = 0; i < n; ++i) {
    vocab.push_back("w" + std::to_string(i));
    for (int j = 0; j < dim; ++j) m(i, j) = g(rng);
  }
  return {"rand", std::move(vocab), std::move(m)};
}

std::string temp_file(const std::string& name, const std::string& content) {
  auto path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("weat: identical attribute vectors degenerate the effect size") {
  // distinct tokens, equal vectors: k(t) is identically zero
  auto set = make_set("s", {"x1", "x2", "y1", "y2", "a1", "a2", "b1", "b2"},
                      {{1, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 1}, {0.5, 1}, {2, 1}, {0.5, 1}});
  WeatQuery q{"t", {"x1", "x2"}, {"y1", "y2"}, {"a1", "a2"}, {"b1", "b2"}};
  CHECK_THROWS_AS(weat(set, q), DegenerateEffect);
}

TEST_CASE("weat: matches the brute-force oracle to 1e-12 on a 2+2/2+2 toy") {
  auto set = make_set("s", {"x1", "x2", "y1", "y2", "a1", "a2", "b1", "b2"},
                      {{1.0, 0.2, 0.1},
                       {0.9, -0.1, 0.3},
                       {-0.8, 0.4, 0.2},
                       {-1.1, 0.1, -0.2},
                       {0.7, 0.7, 0.0},
                       {0.9, 0.3, 0.4},
                       {-0.6, 0.8, 0.1},
                       {-0.9, 0.2, 0.5}});
  WeatQuery q{"toy", {"x1", "x2"}, {"y1", "y2"}, {"a1", "a2"}, {"b1", "b2"}};
  const WeatResult r = weat(set, q);
  const BruteWeat oracle = brute_weat(set, q);
  CHECK(r.exact);
  CHECK(r.n_splits == 6);  // C(4,2)
  CHECK(std::abs(r.s_score - oracle.s) <= 1e-12);
  CHECK(std::abs(r.effect_size - oracle.effect) <= 1e-12);
  CHECK(std::abs(r.p_value - oracle.p) <= 1e-12);

  // antisymmetry in X <-> Y and A <-> B
  WeatQuery swapped = q;
  std::swap(swapped.targets_x, swapped.targets_y);
  const WeatResult rs = weat(set, swapped);
  CHECK(rs.s_score == -r.s_score);
  CHECK(rs.effect_size == -r.effect_size);

  WeatQuery ab = q;
  std::swap(ab.attributes_a, ab.attributes_b);
  const WeatResult rab = weat(set, ab);
  CHECK(rab.s_score == -r.s_score);
  CHECK(rab.effect_size == -r.effect_size);
}

TEST_CASE("weat: monte-carlo p agrees with exact enumeration within 3 sigma") {
  std::mt19937_64 rng(51);
  auto set = random_unit_set(rng, 40, 6);
  WeatQuery q;
  q.name = "mc";
  for (int i = 0; i < 10; ++i) q.targets_x.push_back("w" + std::to_string(i));
  for (int i = 10; i < 20; ++i) q.targets_y.push_back("w" + std::to_string(i));
  for (int i = 20; i < 24; ++i) q.attributes_a.push_back("w" + std::to_string(i));
  for (int i = 24; i < 28; ++i) q.attributes_b.push_back("w" + std::to_string(i));

  const WeatResult mc = weat(set, q, 20000, 7);
  CHECK_FALSE(mc.exact);  // C(20,10) = 184756 > 20000

  // exact oracle over all splits, reusing only the public lookup surface
  std::vector<std::string> pool = q.targets_x;
  pool.insert(pool.end(), q.targets_y.begin(), q.targets_y.end());
  std::vector<double> k(20);
  for (std::size_t i = 0; i < 20; ++i) {
    const Vector t = set.lookup(pool[i]).normalized();
    double ma = 0, mb = 0;
    for (const auto& a : q.attributes_a) ma += t.dot(set.lookup(a).normalized());
    for (const auto& b : q.attributes_b) mb += t.dot(set.lookup(b).normalized());
    k[i] = ma / 4.0 - mb / 4.0;
  }
  double s_obs = 0;
  for (std::size_t i = 0; i < 10; ++i) s_obs += k[i];
  for (std::size_t i = 10; i < 20; ++i) s_obs -= k[i];
  std::size_t greater = 0, count = 0;
  for (unsigned mask = 0; mask < (1u << 20); ++mask) {
    if (__builtin_popcount(mask) != 10) continue;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < 20; ++i) (mask >> i & 1 ? sx : sy) += k[i];
    if (sx - sy > s_obs) ++greater;
    ++count;
  }
  const double p_exact = static_cast<double>(greater) / count;
  const double sigma = std::sqrt(p_exact * (1 - p_exact) / 20000.0);
  CHECK(std::abs(mc.p_value - p_exact) <= 3.0 * sigma + 1e-12);
}

TEST_CASE("weat: missing tokens are listed; filter_weat_query skips and counts") {
  auto set = make_set("s", {"x1", "y1", "a1", "b1"}, {{1, 0}, {0, 1}, {1, 1}, {1, -1}});
  WeatQuery q{"t", {"x1", "ghost"}, {"y1", "phantom"}, {"a1"}, {"b1"}};
  CHECK_THROWS_AS(weat(set, q), MissingWords);
  try {
    weat(set, q);
  } catch (const MissingWords& e) {
    CHECK(e.tokens == std::vector<std::string>{"ghost", "phantom"});
  }

  std::size_t skipped = 0;
  const WeatQuery filtered = filter_weat_query(set, q, &skipped);
  CHECK(skipped == 2);
  CHECK(filtered.targets_x == std::vector<std::string>{"x1"});
  CHECK(filtered.targets_y == std::vector<std::string>{"y1"});
}

TEST_CASE("wat_propagate: no feminine mass reaches components without feminine seeds") {
  // m -- w edge; f isolated
  auto edges = temp_file("wat_edges1.tsv", "m\tw\t1.0\n");
  auto seeds = temp_file("wat_seeds1.json", R"({"seed_pairs": [["m", "f"]]})");
  auto graph = load_wat_graph(edges, seeds);
  auto props = wat_propagate(graph);
  const Eigen::Index w = graph.find("w");
  CHECK(props.scores(w, 0) > 0.0);
  CHECK(props.scores(w, 1) == 0.0);
  std::remove(edges.c_str());
  std::remove(seeds.c_str());
}

TEST_CASE("wat_propagate: matches the closed-form linear solve on a 6-node graph") {
  auto edges = temp_file("wat_edges2.tsv",
                         "m\ta\t1.0\n"
                         "a\tb\t0.5\n"
                         "b\tf\t1.0\n"
                         "a\tc\t2.0\n"
                         "c\td\t1.5\n"
                         "d\tf\t0.5\n");
  auto seeds = temp_file("wat_seeds2.json", R"({"seed_pairs": [["m", "f"]]})");
  auto graph = load_wat_graph(edges, seeds);
  REQUIRE(graph.nodes.size() == 6);
  const double alpha = 0.85;
  auto props = wat_propagate(graph, alpha, 1e-12, 20000);

  // closed form (1-alpha)(I - alpha S)^-1 Y
  const Eigen::Index n = 6;
  Eigen::VectorXd deg = graph.weights.rowwise().sum();
  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt(i) = deg(i) > 0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  Eigen::MatrixXd S = inv_sqrt.asDiagonal() * graph.weights * inv_sqrt.asDiagonal();
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, 2);
  Y(graph.find("m"), 0) = 1.0;
  Y(graph.find("f"), 1) = 1.0;
  Eigen::MatrixXd fixed_point =
      (1 - alpha) * (Eigen::MatrixXd::Identity(n, n) - alpha * S).partialPivLu().solve(Y);
  CHECK((props.scores - fixed_point).cwiseAbs().maxCoeff() <= 1e-8);

  // residual decreases monotonically after the first iteration
  for (std::size_t i = 1; i + 1 < props.residual_history.size(); ++i)
    CHECK(props.residual_history[i + 1] <= props.residual_history[i]);

  std::remove(edges.c_str());
  std::remove(seeds.c_str());
}

TEST_CASE("wat_propagate: gender swap symmetry is exact on a mirror graph") {
  auto edges = temp_file("wat_edges3.tsv", "m\tx\t1.0\nf\tx\t1.0\n");
  auto seeds = temp_file("wat_seeds3.json", R"({"seed_pairs": [["m", "f"]]})");
  auto graph = load_wat_graph(edges, seeds);
  auto props = wat_propagate(graph);
  const Eigen::Index m = graph.find("m"), f = graph.find("f"), x = graph.find("x");
  CHECK(props.scores(m, 0) == props.scores(f, 1));
  CHECK(props.scores(m, 1) == props.scores(f, 0));
  CHECK(props.scores(x, 0) == props.scores(x, 1));
  std::remove(edges.c_str());
  std::remove(seeds.c_str());
}

TEST_CASE("wat_propagate: non-convergence raises with the residual") {
  auto edges = temp_file("wat_edges4.tsv", "m\tf\t1.0\n");
  auto seeds = temp_file("wat_seeds4.json", R"({"seed_pairs": [["m", "f"]]})");
  auto graph = load_wat_graph(edges, seeds);
  CHECK_THROWS_AS(wat_propagate(graph, 0.85, 1e-12, 1), NonConvergence);
  std::remove(edges.c_str());
  std::remove(seeds.c_str());
}

TEST_CASE("wat_score: perfect correlation by construction, null on random data") {
  auto edges = temp_file("wat_edges5.tsv",
                         "m\tu\t1.0\n"
                         "f\tv\t1.0\n"
                         "u\tv\t0.5\n");
  auto seeds = temp_file("wat_seeds5.json", R"({"seed_pairs": [["m", "f"]]})");
  auto graph = load_wat_graph(edges, seeds);
  auto props = wat_propagate(graph, 0.85, 1e-14, 50000);

  // mirror graph: graph scores are (g_m, -g_m, g_u, -g_u); build embeddings
  // whose scores are exactly affine in them. With m=(1,0), f=(0,1) the score
  // of a unit vector at angle t is cos(t)-sin(t); solve for u and mirror v.
  const double g_m = std::log((props.scores(graph.find("m"), 0) + 1e-12) /
                              (props.scores(graph.find("m"), 1) + 1e-12));
  const double g_u = std::log((props.scores(graph.find("u"), 0) + 1e-12) /
                              (props.scores(graph.find("u"), 1) + 1e-12));
  const double target = g_u / g_m;  // wanted embedding score of u, in (-1, 1)
  REQUIRE(std::abs(target) < 1.0);
  const double theta = std::acos(target / std::sqrt(2.0)) - M_PI / 4.0;
  auto set = make_set("s", {"m", "f", "u", "v"},
                      {{1.0, 0.0},
                       {0.0, 1.0},
                       {std::cos(theta), std::sin(theta)},
                       {std::sin(theta), std::cos(theta)}});
  const double r = wat_score(set, graph, props);
  CHECK(r == doctest::Approx(1.0).epsilon(1e-9));

  // 20-seed null calibration on 200 random words
  std::mt19937_64 rng(777);
  int inside = 0;
  std::string big_edges;
  for (int i = 0; i < 200; ++i)
    big_edges += "n" + std::to_string(i) + "\tn" + std::to_string((i + 1) % 200) + "\t1.0\n";
  big_edges += "m\tn0\t1.0\nf\tn100\t1.0\n";
  auto edges2 = temp_file("wat_edges6.tsv", big_edges);
  auto graph2 = load_wat_graph(edges2, seeds);
  auto props2 = wat_propagate(graph2);
  for (int trial = 0; trial < 20; ++trial) {
    std::normal_distribution<double> g;
    std::vector<std::string> vocab{"m", "f"};
    for (int i = 0; i < 200; ++i) vocab.push_back("n" + std::to_string(i));
    Matrix mat(202, 8);
    for (Eigen::Index i = 0; i < 202; ++i)
      for (Eigen::Index j = 0; j < 8; ++j) mat(i, j) = g(rng);
    EmbeddingSet rand_set("r", vocab, mat);
    if (std::abs(wat_score(rand_set, graph2, props2)) <= 0.2) ++inside;
  }
  CHECK(inside >= 17);  // 95% of seeds at the null, allowing small-sample slack

  std::remove(edges.c_str());
  std::remove(edges2.c_str());
  std::remove(seeds.c_str());
}

TEST_CASE("sembias: exact definition pick, ties to the lowest index, skip counting") {
  auto set = make_set("s",
                      {"he", "she", "hero", "heroine", "boss", "aide", "jazz", "blues", "pen",
                       "pencil"},
                      {{1, 0, 0},
                       {0, 1, 0},
                       {1.5, 0.5, 0},   // hero - heroine = he - she
                       {0.5, 1.5, 0},
                       {0, 0, 1.0},     // boss - aide orthogonal to direction
                       {0, 0, 0.5},
                       {0.3, 0.3, 0.7},  // jazz - blues orthogonal
                       {0.3, 0.3, 0.2},
                       {0.1, 0.1, 0.9},  // pen - pencil orthogonal
                       {0.1, 0.1, 0.1}});
  SemBiasInstance inst;
  inst.pairs = {{{"hero", "heroine"}, {"boss", "aide"}, {"jazz", "blues"}, {"pen", "pencil"}}};
  SemBiasInstance broken = inst;
  broken.pairs[2] = {"missing", "blues"};

  auto result = sembias(set, {inst, broken}, {"he", "she"});
  CHECK(result.n_scored == 1);
  CHECK(result.n_skipped == 1);
  CHECK(result.definition_pct == 100.0);
  CHECK(result.stereotype_pct == 0.0);

  // all four pairs identical: the tie goes to the definition slot
  SemBiasInstance tie;
  tie.pairs = {{{"hero", "heroine"}, {"hero", "heroine"}, {"hero", "heroine"}, {"hero", "heroine"}}};
  auto tied = sembias(set, {tie}, {"he", "she"});
  CHECK(tied.definition_pct == 100.0);

  CHECK_THROWS_AS(sembias(set, {broken}, {"he", "she"}), NoScorableInstances);
  CHECK_THROWS_AS(sembias(set, {inst}, {"he", "ghost"}), MissingWords);
}

TEST_CASE("sembias: isotropic null picks stereotype+none about three quarters of the time") {
  std::mt19937_64 seed_rng(4242);
  double mean = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng(seed_rng());
    std::normal_distribution<double> g;
    const int n_words = 60;
    std::vector<std::string> vocab{"he", "she"};
    for (int i = 0; i < n_words; ++i) vocab.push_back("w" + std::to_string(i));
    Matrix m(n_words + 2, 10);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < 10; ++j) m(i, j) = g(rng);
    EmbeddingSet set("iso", vocab, m);

    std::uniform_int_distribution<int> pick(0, n_words - 1);
    std::vector<SemBiasInstance> instances;
    for (int i = 0; i < 440; ++i) {
      SemBiasInstance inst;
      std::set<int> used;
      for (int p = 0; p < 4; ++p) {
        int a = pick(rng), b = pick(rng);
        while (used.count(a)) a = pick(rng);
        used.insert(a);
        while (used.count(b)) b = pick(rng);
        used.insert(b);
        inst.pairs[static_cast<std::size_t>(p)] = {"w" + std::to_string(a),
                                                   "w" + std::to_string(b)};
      }
      instances.push_back(std::move(inst));
    }
    const auto r = sembias(set, instances, {"he", "she"});
    mean += r.stereotype_pct + r.none_pct;
  }
  mean /= 20.0;
  CHECK(mean >= 68.0);
  CHECK(mean <= 82.0);
}

TEST_CASE("sembias: instance order does not matter") {
  std::mt19937_64 rng(99);
  auto set = random_unit_set(rng, 20, 5);
  std::vector<SemBiasInstance> instances;
  for (int i = 0; i + 8 <= 20; i += 8) {
    SemBiasInstance inst;
    for (int p = 0; p < 4; ++p)
      inst.pairs[static_cast<std::size_t>(p)] = {"w" + std::to_string(i + 2 * p),
                                                 "w" + std::to_string(i + 2 * p + 1)};
    instances.push_back(inst);
  }
  auto forward = sembias(set, instances, {"w0", "w1"});
  std::reverse(instances.begin(), instances.end());
  auto backward = sembias(set, instances, {"w0", "w1"});
  CHECK(forward.definition_pct == backward.definition_pct);
  CHECK(forward.stereotype_pct == backward.stereotype_pct);
  CHECK(forward.none_pct == backward.none_pct);
}

TEST_CASE("sembias: subset mode scores only the marked instances") {
  const std::string assets = METAFAIR_ASSET_DIR;
  auto instances = load_sembias_tsv(assets + "/toy/sembias.tsv");
  REQUIRE(instances.size() == 10);
  std::size_t marked = 0;
  for (const auto& inst : instances) marked += inst.in_subset;
  REQUIRE(marked == 2);

  auto set = load_text(assets + "/toy/src_a.txt");
  auto full = sembias(set, instances, {"he", "she"});
  auto subset = sembias(set, instances, {"he", "she"}, true);
  CHECK(full.n_scored == 10);
  CHECK(subset.n_scored == 2);
}

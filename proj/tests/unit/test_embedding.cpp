#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "metafair/bias_eval.hpp"
#include "metafair/embedding.hpp"
#include "metafair/synthetic.hpp"

using namespace metafair;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

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

EmbeddingSet random_set(std::mt19937_64& rng, int n, int dim) {
  std::normal_distribution<double> g;
  Matrix m(n, dim);
  std::vector<std::string> vocab;
  for (int i = 0; i < n; ++i) {
    vocab.push_back("w" + std::to_string(i));
    for (int j = 0; j < dim; ++j) m(i, j) = g(rng);
  }
  return {"rand", std::move(vocab), std::move(m)};
}

}  // namespace

TEST_CASE("EmbeddingSet: invariants enforced") {
  CHECK_THROWS_AS(make_set("dup", {"a", "a"}, {{1.0}, {2.0}}), DuplicateToken);
  CHECK_THROWS_AS(EmbeddingSet("bad", {"a"}, Matrix::Zero(2, 1)), InvalidArgument);
  Matrix nan_m(1, 1);
  nan_m(0, 0) = std::nan("");
  CHECK_THROWS_AS(EmbeddingSet("nan", {"a"}, nan_m), NumericError);

  auto s = make_set("ok", {"foo", "bar"}, {{0.0, 1.0}, {2.0, 3.0}});
  CHECK(s.lookup("bar")(1) == 3.0);
  CHECK_THROWS_AS(s.lookup("baz"), OovToken);
}

TEST_CASE("load_text: minimal well-formed file") {
  auto path = temp_path("metafair_min.txt");
  {
    std::ofstream out(path);
    out << "1 2\nfoo 0.0 1.0\n";
  }
  auto s = load_text(path);
  CHECK(s.vocab() == std::vector<std::string>{"foo"});
  CHECK(s.dim() == 2);
  CHECK(s.matrix()(0, 0) == 0.0);
  CHECK(s.matrix()(0, 1) == 1.0);
  std::remove(path.c_str());
}

TEST_CASE("load_text: malformed inputs carry line numbers") {
  auto path = temp_path("metafair_bad.txt");
  auto write = [&](const std::string& content) {
    std::ofstream out(path);
    out << content;
  };

  write("nonsense\n");
  CHECK_THROWS_WITH_AS(load_text(path), doctest::Contains("line 1"), ParseError);

  write("2 3\nfoo 1 2 3\nbar 1 2\n");
  try {
    load_text(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }

  write("2 2\nfoo 1 2\nfoo 3 4\n");
  CHECK_THROWS_AS(load_text(path), DuplicateToken);

  write("3 2\nfoo 1 2\nbar 3 4\n");
  CHECK_THROWS_AS(load_text(path), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("save_text: exact formatting, empty set") {
  auto path = temp_path("metafair_fmt.txt");
  save_text(make_set("s", {"foo"}, {{0.0, 1.0}}), path);
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all == "1 2\nfoo 0 1\n");

  EmbeddingSet empty("empty", {}, Matrix::Zero(0, 4));
  save_text(empty, path);
  std::ifstream in2(path);
  std::string header;
  std::getline(in2, header);
  CHECK(header == "0 4");
  auto back = load_text(path);
  CHECK(back.size() == 0);
  CHECK(back.dim() == 4);
  std::remove(path.c_str());
}

TEST_CASE("text round-trip is the identity on canonical sets") {
  std::mt19937_64 rng(42);
  auto path = temp_path("metafair_rt.txt");
  for (int trial = 0; trial < 100; ++trial) {
    auto raw = random_set(rng, 1 + trial % 7, 1 + trial % 5);
    // one save/load canonicalises values to the 9-significant-digit text grid
    save_text(raw, path);
    auto canonical = load_text(path);
    save_text(canonical, path);
    auto again = load_text(path);
    REQUIRE(again.vocab() == canonical.vocab());
    REQUIRE(again.dim() == canonical.dim());
    CHECK(again.matrix() == canonical.matrix());  // bit-for-bit
  }
  std::remove(path.c_str());
}

TEST_CASE("gzip round-trip by extension") {
  std::mt19937_64 rng(9);
  auto set = random_set(rng, 12, 4);
  auto path = temp_path("metafair_rt.txt.gz");
  save_text(set, path);
  auto back = load_text(path);
  save_text(back, path);
  CHECK(load_text(path).matrix() == back.matrix());
  CHECK(back.vocab() == set.vocab());
  std::remove(path.c_str());
}

TEST_CASE("load_text: a 300-dim source loads with dim 300") {
  auto path = temp_path("metafair_300.txt");
  {
    std::ofstream out(path);
    out << "2 300\n";
    for (const char* tok : {"alpha", "beta"}) {
      out << tok;
      for (int i = 0; i < 300; ++i) out << ' ' << (i % 7) * 0.5;
      out << '\n';
    }
  }
  auto s = load_text(path);
  CHECK(s.dim() == 300);
  std::remove(path.c_str());
}

TEST_CASE("align: union-zero and intersection policies") {
  auto s1 = make_set("s1", {"a", "b"}, {{1.0, 0.0}, {2.0, 0.0}});
  auto s2 = make_set("s2", {"b", "c"}, {{0.0, 3.0}, {0.0, 4.0}});

  auto uz = align({s1, s2}, AlignPolicy::union_zero);
  CHECK(uz.union_vocab == std::vector<std::string>{"a", "b", "c"});
  CHECK(uz.row(1, 0) == Vector::Zero(2));  // s_2(a) = 0
  CHECK(uz.row(0, 1)(0) == 2.0);

  auto inter = align({s1, s2}, AlignPolicy::intersection);
  CHECK(inter.union_vocab == std::vector<std::string>{"b"});
  CHECK(inter.presence.all());

  CHECK_THROWS_AS(align({}, AlignPolicy::union_zero), InvalidArgument);
}

TEST_CASE("align: presence column sums match a brute-force set oracle") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pick(0, 19);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<EmbeddingSet> sources;
    std::vector<std::set<std::string>> vocabs;
    for (int j = 0; j < 3; ++j) {
      std::set<std::string> words;
      while (words.size() < 6) words.insert("w" + std::to_string(pick(rng)));
      std::vector<std::string> vocab(words.begin(), words.end());
      sources.emplace_back("s" + std::to_string(j), vocab,
                           Matrix::Random(static_cast<Eigen::Index>(vocab.size()), 3));
      vocabs.push_back(words);
    }
    auto aligned = align(sources, AlignPolicy::union_zero);
    std::set<std::string> all;
    for (const auto& v : vocabs) all.insert(v.begin(), v.end());
    REQUIRE(aligned.union_vocab.size() == all.size());
    for (std::size_t j = 0; j < sources.size(); ++j) {
      Eigen::Index count = 0;
      for (Eigen::Index w = 0; w < aligned.n_words(); ++w)
        count += aligned.presence(w, static_cast<Eigen::Index>(j));
      CHECK(count == static_cast<Eigen::Index>(vocabs[j].size()));
    }
  }
}

TEST_CASE("align: union-zero restricted to intersection equals intersection") {
  auto s1 = make_set("s1", {"a", "b", "d"}, {{1, 1}, {2, 2}, {3, 3}});
  auto s2 = make_set("s2", {"d", "b", "e"}, {{4, 4}, {5, 5}, {6, 6}});
  auto uz = align({s1, s2}, AlignPolicy::union_zero);
  auto inter = align({s1, s2}, AlignPolicy::intersection);

  std::vector<std::string> restricted;
  for (Eigen::Index w = 0; w < uz.n_words(); ++w) {
    if (uz.presence.row(w).all()) restricted.push_back(uz.union_vocab[w]);
  }
  REQUIRE(restricted == inter.union_vocab);
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t w = 0; w < restricted.size(); ++w) {
      CHECK(uz.sources[j].lookup(restricted[w]) == inter.sources[j].lookup(restricted[w]));
    }
  }
}

TEST_CASE("generate_synthetic: determinism and construction") {
  SyntheticSpec spec;
  spec.n_words = 60;
  spec.dim = 10;
  spec.n_gendered_pairs = 6;
  spec.bias_strength = 1.0;
  spec.seed = 123;

  auto a = generate_synthetic(spec);
  auto b = generate_synthetic(spec);
  CHECK(a.embeddings.matrix() == b.embeddings.matrix());
  CHECK(a.embeddings.vocab() == b.embeddings.vocab());

  // planted-direction projection of stereotype words should carry the planted sign
  int good = 0, total = 0;
  for (const auto& w : a.male_stereotyped) {
    good += a.embeddings.lookup(w).dot(a.planted_direction) > 0;
    ++total;
  }
  for (const auto& w : a.female_stereotyped) {
    good += a.embeddings.lookup(w).dot(a.planted_direction) < 0;
    ++total;
  }
  CHECK(static_cast<double>(good) / total >= 0.95);

  CHECK_THROWS_AS(generate_synthetic(SyntheticSpec{10, 4, 6, 1.0, 1}), InvalidArgument);

  SyntheticSpec neg = spec;
  neg.bias_strength = -0.5;
  CHECK_THROWS_AS(generate_synthetic(neg), InvalidArgument);
}

TEST_CASE("generate_synthetic: zero bias strength leaves no WEAT signal") {
  // statistical oracle: with nothing planted the effect size stays near zero
  for (unsigned long long seed = 1; seed <= 20; ++seed) {
    SyntheticSpec spec;
    spec.n_words = 300;
    spec.dim = 10;
    spec.n_gendered_pairs = 10;
    spec.bias_strength = 0.0;
    spec.seed = seed;
    auto synth = generate_synthetic(spec);
    REQUIRE(!synth.lexicon.weat_queries.empty());
    const auto result = weat(synth.embeddings, synth.lexicon.weat_queries.front(), 200, seed);
    CHECK(result.effect_size >= -0.5);
    CHECK(result.effect_size <= 0.5);
  }
}

TEST_CASE("save_text: unwritable path raises IoError") {
  auto set = make_set("s", {"a"}, {{1.0}});
  CHECK_THROWS_AS(save_text(set, "/nonexistent-dir-for-sure/out.txt"), IoError);
}

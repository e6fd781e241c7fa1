#include "metafair/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace metafair {

using nlohmann::json;

namespace {

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("invalid json in ") + path + ": " + e.what());
  }
  return j;
}

std::vector<std::pair<std::string, std::string>> parse_pairs(const json& arr,
                                                             const std::string& what) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2)
      throw ParseError(1, what + " entries must be [token, token] pairs");
    out.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
  }
  return out;
}

WeatQuery parse_weat_query(const json& q) {
  WeatQuery out;
  out.name = q.value("name", "weat");
  out.targets_x = q.at("X").get<std::vector<std::string>>();
  out.targets_y = q.at("Y").get<std::vector<std::string>>();
  out.attributes_a = q.at("A").get<std::vector<std::string>>();
  out.attributes_b = q.at("B").get<std::vector<std::string>>();
  out.validate();
  return out;
}

}  // namespace

void WeatQuery::validate() const {
  if (targets_x.empty() || targets_x.size() != targets_y.size())
    throw InvalidArgument("weat query " + name + ": target sets must be equal-size and non-empty");
  if (attributes_a.empty() || attributes_b.empty())
    throw InvalidArgument("weat query " + name + ": attribute sets must be non-empty");
  std::set<std::string> x(targets_x.begin(), targets_x.end());
  for (const auto& t : targets_y)
    if (x.count(t)) throw InvalidArgument("weat query " + name + ": X and Y overlap on " + t);
  std::set<std::string> a(attributes_a.begin(), attributes_a.end());
  for (const auto& t : attributes_b)
    if (a.count(t)) throw InvalidArgument("weat query " + name + ": A and B overlap on " + t);
}

std::vector<std::string> GenderLexicon::definitional_tokens() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& [m, f] : defining_pairs) {
    if (seen.insert(m).second) out.push_back(m);
    if (seen.insert(f).second) out.push_back(f);
  }
  return out;
}

bool GenderLexicon::is_neutral(const std::string& token) const {
  if (neutral_policy == NeutralPolicy::explicit_list)
    return std::find(neutral_words.begin(), neutral_words.end(), token) != neutral_words.end();
  for (const auto& [m, f] : defining_pairs) {
    if (token == m || token == f) return false;
  }
  return true;
}

GenderLexicon load_lexicon_json(const std::string& path) {
  const json j = parse_json_file(path);
  GenderLexicon lex;
  if (j.contains("defining_pairs")) lex.defining_pairs = parse_pairs(j["defining_pairs"], "defining_pairs");
  if (j.contains("seed_pairs")) lex.seed_pairs = parse_pairs(j["seed_pairs"], "seed_pairs");
  if (j.contains("weat_queries")) {
    for (const auto& q : j["weat_queries"]) lex.weat_queries.push_back(parse_weat_query(q));
  }
  if (j.contains("neutral_words") && !j["neutral_words"].is_null()) {
    lex.neutral_policy = NeutralPolicy::explicit_list;
    lex.neutral_words = j["neutral_words"].get<std::vector<std::string>>();
  }
  return lex;
}

std::vector<WeatQuery> load_weat_json(const std::string& path) {
  const json j = parse_json_file(path);
  std::vector<WeatQuery> out;
  if (j.is_array()) {
    for (const auto& q : j) out.push_back(parse_weat_query(q));
  } else {
    out.push_back(parse_weat_query(j));
  }
  return out;
}

double DictCorpus::prob(const std::string& token) const {
  auto it = unigram_probs.find(token);
  if (it == unigram_probs.end()) return 1.0;  // unseen tokens get weight a/(a+1)
  return it->second;
}

DictCorpus load_dict_corpus(const std::string& gloss_tsv, const std::string& probs_json,
                            double sif_a) {
  DictCorpus corpus;
  corpus.sif_a = sif_a;

  std::ifstream in(gloss_tsv);
  if (!in) throw IoError("cannot open " + gloss_tsv);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "expected token<TAB>gloss");
    std::string token = line.substr(0, tab);
    std::string gloss = line.substr(tab + 1);
    if (gloss.empty()) throw ParseError(line_no, "empty gloss for " + token);
    corpus.glosses[token] = gloss;
  }

  const json j = parse_json_file(probs_json);
  for (auto it = j.begin(); it != j.end(); ++it) {
    const double p = it.value().get<double>();
    if (!(p > 0.0 && p <= 1.0))
      throw ParseError(1, "unigram probability for " + it.key() + " outside (0,1]");
    corpus.unigram_probs[it.key()] = p;
  }
  return corpus;
}

SimilarityDataset load_similarity_tsv(const std::string& path, const std::string& name) {
  SimilarityDataset ds;
  ds.name = name.empty() ? path : name;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    SimilarityDataset::Entry e;
    if (!(ls >> e.a >> e.b >> e.rating))
      throw ParseError(line_no, "expected \"a<TAB>b<TAB>rating\"");
    ds.entries.push_back(std::move(e));
  }
  return ds;
}

std::vector<SemBiasInstance> load_sembias_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<SemBiasInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> cols;
    std::string tok;
    while (ls >> tok) cols.push_back(tok);
    if (cols.size() != 8 && cols.size() != 9)
      throw ParseError(line_no, "expected 8 token columns (plus optional subset marker)");
    SemBiasInstance inst;
    for (int p = 0; p < 4; ++p) inst.pairs[p] = {cols[2 * p], cols[2 * p + 1]};
    inst.in_subset = cols.size() == 9 && cols[8] == "subset";
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace metafair

#include "metafair/embedding.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace metafair {

namespace {

bool has_gz_suffix(const std::string& path) {
  return path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

std::string read_whole_file(const std::string& path) {
  if (has_gz_suffix(path)) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open " + path);
    std::string out;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
    bool bad = n < 0;
    gzclose(f);
    if (bad) throw IoError("gzip read failed on " + path);
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_whole_file(const std::string& path, const std::string& data) {
  if (has_gz_suffix(path)) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open " + path + " for writing");
    if (!data.empty() &&
        gzwrite(f, data.data(), static_cast<unsigned>(data.size())) !=
            static_cast<int>(data.size())) {
      gzclose(f);
      throw IoError("gzip write failed on " + path);
    }
    gzclose(f);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << data;
  if (!out) throw IoError("write failed on " + path);
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::string name, std::vector<std::string> vocab, Matrix matrix)
    : name_(std::move(name)), vocab_(std::move(vocab)), matrix_(std::move(matrix)) {
  if (matrix_.cols() <= 0) throw InvalidArgument("embedding dim must be positive");
  if (matrix_.rows() != static_cast<Eigen::Index>(vocab_.size()))
    throw InvalidArgument("matrix rows must equal vocabulary size");
  if (!matrix_.allFinite()) throw NumericError("embedding matrix contains non-finite values");
  index_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i], i).second) throw DuplicateToken(vocab_[i]);
  }
}

Vector EmbeddingSet::lookup(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw OovToken(token);
  return matrix_.row(static_cast<Eigen::Index>(it->second)).transpose();
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

EmbeddingSet load_text(const std::string& path) {
  const std::string data = read_whole_file(path);
  std::istringstream in(data);

  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty file");
  std::istringstream header(line);
  long long count = -1, dim = -1;
  std::string trailing;
  if (!(header >> count >> dim) || (header >> trailing) || count < 0 || dim <= 0)
    throw ParseError(1, "expected header \"<count> <dim>\"");

  std::vector<std::string> vocab;
  vocab.reserve(static_cast<std::size_t>(count));
  Matrix matrix(count, dim);

  std::size_t line_no = 1;
  long long row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.eof()) break;
    if (row >= count) throw ParseError(line_no, "more rows than declared in header");
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) throw ParseError(line_no, "missing token");
    for (long long c = 0; c < dim; ++c) {
      double v;
      if (!(ls >> v)) throw ParseError(line_no, "expected " + std::to_string(dim) + " values");
      matrix(row, c) = v;
    }
    double extra;
    if (ls >> extra) throw ParseError(line_no, "more values than declared dim");
    vocab.push_back(token);
    ++row;
  }
  if (row != count)
    throw ParseError(line_no, "header declared " + std::to_string(count) + " rows, found " +
                                  std::to_string(row));

  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name.erase(0, slash + 1);
  if (has_gz_suffix(name)) name.erase(name.size() - 3);
  if (auto dot = name.find_last_of('.'); dot != std::string::npos && dot > 0) name.erase(dot);
  return {name, std::move(vocab), std::move(matrix)};
}

void save_text(const EmbeddingSet& set, const std::string& path) {
  std::string out;
  out += std::to_string(set.size());
  out += ' ';
  out += std::to_string(set.dim());
  out += '\n';
  for (Eigen::Index r = 0; r < set.size(); ++r) {
    out += set.vocab()[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < set.dim(); ++c) {
      out += ' ';
      out += format_value(set.matrix()(r, c));
    }
    out += '\n';
  }
  write_whole_file(path, out);
}

Vector AlignedSources::row(std::size_t j, Eigen::Index w) const {
  const auto& src = sources.at(j);
  if (presence(w, static_cast<Eigen::Index>(j))) return src.lookup(union_vocab[static_cast<std::size_t>(w)]);
  return Vector::Zero(src.dim());
}

Matrix AlignedSources::padded_matrix(std::size_t j) const {
  const auto& src = sources.at(j);
  Matrix out = Matrix::Zero(n_words(), src.dim());
  for (Eigen::Index w = 0; w < n_words(); ++w) {
    Eigen::Index r = src.find(union_vocab[static_cast<std::size_t>(w)]);
    if (r >= 0) out.row(w) = src.matrix().row(r);
  }
  return out;
}

std::vector<Eigen::Index> AlignedSources::intersection_indices() const {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index w = 0; w < n_words(); ++w) {
    if (presence.row(w).all()) idx.push_back(w);
  }
  return idx;
}

AlignedSources align(const std::vector<EmbeddingSet>& sources, AlignPolicy policy) {
  if (sources.empty()) throw InvalidArgument("align requires at least one source");

  std::vector<std::string> vocab;
  if (policy == AlignPolicy::union_zero) {
    std::unordered_map<std::string, bool> seen;
    for (const auto& src : sources) {
      for (const auto& tok : src.vocab()) {
        if (seen.emplace(tok, true).second) vocab.push_back(tok);
      }
    }
  } else {
    for (const auto& tok : sources.front().vocab()) {
      bool everywhere = true;
      for (std::size_t j = 1; j < sources.size(); ++j) {
        if (!sources[j].contains(tok)) {
          everywhere = false;
          break;
        }
      }
      if (everywhere) vocab.push_back(tok);
    }
  }

  AlignedSources out;
  out.sources = sources;
  out.union_vocab = std::move(vocab);
  out.presence.resize(out.n_words(), static_cast<Eigen::Index>(sources.size()));
  for (Eigen::Index w = 0; w < out.n_words(); ++w) {
    for (std::size_t j = 0; j < sources.size(); ++j) {
      out.presence(w, static_cast<Eigen::Index>(j)) =
          sources[j].contains(out.union_vocab[static_cast<std::size_t>(w)]);
    }
  }
  return out;
}

}  // namespace metafair

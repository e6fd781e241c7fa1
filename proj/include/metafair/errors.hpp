#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace metafair {

// Every failure mode maps to exactly one exit-code category:
//   usage -> 2, data -> 3, numeric -> 4.
enum class ErrorKind { usage, data, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string what) : std::runtime_error(std::move(what)), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ParseError : Error {
  ParseError(std::size_t line, const std::string& msg)
      : Error(ErrorKind::data, "parse error at line " + std::to_string(line) + ": " + msg),
        line(line) {}
  std::size_t line;
};

struct DuplicateToken : Error {
  explicit DuplicateToken(const std::string& tok)
      : Error(ErrorKind::data, "duplicate token: " + tok), token(tok) {}
  std::string token;
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrorKind::data, "io error: " + msg) {}
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& msg) : Error(ErrorKind::usage, msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(ErrorKind::usage, msg) {}
};

struct OovToken : Error {
  explicit OovToken(const std::string& tok)
      : Error(ErrorKind::data, "token not in vocabulary: " + tok), token(tok) {}
  std::string token;
};

struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

struct DegenerateLabels : Error {
  explicit DegenerateLabels(const std::string& msg)
      : Error(ErrorKind::data, "degenerate labels: " + msg) {}
};

struct UndefinedCorrelation : Error {
  explicit UndefinedCorrelation(const std::string& msg)
      : Error(ErrorKind::numeric, "undefined correlation: " + msg) {}
};

struct EmptyTrainingSet : Error {
  explicit EmptyTrainingSet(const std::string& msg)
      : Error(ErrorKind::data, "empty training set: " + msg) {}
};

struct EmptyDefiningSets : Error {
  explicit EmptyDefiningSets(const std::string& msg)
      : Error(ErrorKind::data, "no resolvable defining pairs: " + msg) {}
};

struct DegenerateSubspace : Error {
  explicit DegenerateSubspace(const std::string& msg)
      : Error(ErrorKind::numeric, "degenerate bias subspace: " + msg) {}
};

struct DegenerateEffect : Error {
  explicit DegenerateEffect(const std::string& msg)
      : Error(ErrorKind::numeric, "degenerate effect size: " + msg) {}
};

struct MissingWords : Error {
  explicit MissingWords(std::vector<std::string> toks)
      : Error(ErrorKind::data, "missing words: " + join(toks)), tokens(std::move(toks)) {}
  std::vector<std::string> tokens;

 private:
  static std::string join(const std::vector<std::string>& toks) {
    std::string out;
    for (const auto& t : toks) {
      if (!out.empty()) out += ", ";
      out += t;
    }
    return out;
  }
};

struct NonConvergence : Error {
  explicit NonConvergence(double residual)
      : Error(ErrorKind::numeric, "propagation did not converge, residual " + std::to_string(residual)),
        residual(residual) {}
  double residual;
};

struct InsufficientOverlap : Error {
  explicit InsufficientOverlap(const std::string& msg)
      : Error(ErrorKind::data, "insufficient overlap: " + msg) {}
};

struct NoScorableInstances : Error {
  explicit NoScorableInstances(const std::string& msg)
      : Error(ErrorKind::data, "no scorable instances: " + msg) {}
};

struct InsufficientData : Error {
  explicit InsufficientData(const std::string& msg)
      : Error(ErrorKind::data, "insufficient data: " + msg) {}
};

struct EmptyGloss : Error {
  explicit EmptyGloss(const std::string& tok)
      : Error(ErrorKind::data, "gloss resolves to no known tokens: " + tok), token(tok) {}
  std::string token;
};

struct EmptyPlot : Error {
  explicit EmptyPlot(const std::string& msg) : Error(ErrorKind::data, "empty plot: " + msg) {}
};

inline int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::usage: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::numeric: return 4;
  }
  return 4;
}

}  // namespace metafair

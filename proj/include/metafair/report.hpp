#pragma once

#include <string>
#include <vector>

#include "metafair/errors.hpp"

namespace metafair {

struct EvalRow {
  std::string label;
  std::string metric;
  double score = 0.0;
  std::size_t n_skipped = 0;
  std::string fingerprint;
  // plot metadata, carried by the json format only
  std::string meta_method;
  std::string debias_method;
  std::string stage;

  bool operator==(const EvalRow&) const = default;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::string spec_hash;
  unsigned long long seed = 0;

  bool operator==(const EvalReport&) const = default;

  const EvalRow* find(const std::string& label, const std::string& metric) const;
};

enum class ReportFormat { tsv, json };

std::string report_to_tsv(const EvalReport& report);
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
EvalReport load_report(const std::string& path);  // by extension: .json or TSV

void report_emit(const EvalReport& report, const std::string& path, ReportFormat fmt);

// FNV-1a 64-bit hex digest; stable across platforms, used for fingerprints.
std::string fnv1a_hex(const std::string& data);

}  // namespace metafair

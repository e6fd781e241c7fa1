#include "metafair/report.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metafair/embedding.hpp"

namespace metafair {

using nlohmann::json;

const EvalRow* EvalReport::find(const std::string& label, const std::string& metric) const {
  for (const auto& r : rows) {
    if (r.label == label && r.metric == metric) return &r;
  }
  return nullptr;
}

std::string fnv1a_hex(const std::string& data) {
  unsigned long long hash = 14695981039346656037ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", hash);
  return buf;
}

std::string report_to_tsv(const EvalReport& report) {
  std::string out = "label\tmetric\tscore\tskipped\tfingerprint\n";
  for (const auto& r : report.rows) {
    out += r.label;
    out += '\t';
    out += r.metric;
    out += '\t';
    out += format_value(r.score);
    out += '\t';
    out += std::to_string(r.n_skipped);
    out += '\t';
    out += r.fingerprint;
    out += '\n';
  }
  return out;
}

std::string report_to_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"label", r.label},
                    {"metric", r.metric},
                    {"score", r.score},
                    {"skipped", r.n_skipped},
                    {"fingerprint", r.fingerprint},
                    {"meta_method", r.meta_method},
                    {"debias_method", r.debias_method},
                    {"stage", r.stage}});
  }
  json j{{"rows", rows}, {"spec_hash", report.spec_hash}, {"seed", report.seed}};
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("invalid report json: ") + e.what());
  }
  EvalReport report;
  report.spec_hash = j.value("spec_hash", "");
  report.seed = j.value("seed", 0ULL);
  for (const auto& r : j.at("rows")) {
    EvalRow row;
    row.label = r.at("label").get<std::string>();
    row.metric = r.at("metric").get<std::string>();
    row.score = r.at("score").get<double>();
    row.n_skipped = r.at("skipped").get<std::size_t>();
    row.fingerprint = r.value("fingerprint", "");
    row.meta_method = r.value("meta_method", "");
    row.debias_method = r.value("debias_method", "");
    row.stage = r.value("stage", "");
    report.rows.push_back(std::move(row));
  }
  return report;
}

EvalReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return report_from_json(text);

  // TSV: header then rows
  EvalReport report;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::istringstream ls(line);
    EvalRow row;
    std::string score;
    std::string skipped;
    if (!std::getline(ls, row.label, '\t') || !std::getline(ls, row.metric, '\t') ||
        !std::getline(ls, score, '\t') || !std::getline(ls, skipped, '\t'))
      throw ParseError(line_no, "expected 5 tab-separated columns");
    std::getline(ls, row.fingerprint, '\t');
    try {
      row.score = std::stod(score);
      row.n_skipped = std::stoul(skipped);
    } catch (const std::exception&) {
      throw ParseError(line_no, "malformed score or skipped count");
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void report_emit(const EvalReport& report, const std::string& path, ReportFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << (fmt == ReportFormat::tsv ? report_to_tsv(report) : report_to_json(report));
  if (!out) throw IoError("write failed on " + path);
}

}  // namespace metafair

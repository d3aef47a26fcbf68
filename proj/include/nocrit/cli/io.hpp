#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "nocrit/errors.hpp"
#include "nocrit/seqspace.hpp"

namespace nocrit::cli {

using Json = nlohmann::ordered_json;

inline Json to_json(const SparseVec& v) {
  Json e = Json::array();
  for (const Entry& x : v.entries()) e.push_back({x.index, x.value});
  return Json{{"entries", e}};
}

inline SparseVec sparse_from_json(const Json& j, std::size_t dim) {
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
    throw ConfigError("cli:sparse-json", "expected {\"entries\": [[index, value], ...]}");
  std::vector<Entry> e;
  Index last = 0;
  for (const auto& p : j["entries"]) {
    if (!p.is_array() || p.size() != 2) throw ConfigError("cli:sparse-json", "entry must be [index, value]");
    const auto i = p[0].get<Index>();
    if (i <= last) throw ConfigError("cli:sparse-json", "indices must be ascending");
    last = i;
    e.push_back({i, p[1].get<double>()});
  }
  return SparseVec(dim, std::move(e));
}

// RFC 4180: fields holding a comma, quote or line break are quoted, quotes doubled
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

inline std::string csv_number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) { row(header); }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) text_ += (i ? "," : "") + csv_field(fields[i]);
    text_ += "\r\n";
  }
  void row(const std::vector<double>& values) {
    std::vector<std::string> f;
    for (double v : values) f.push_back(csv_number(v));
    row(f);
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw ConfigError("cli:write", "cannot write " + p.string());
}

inline void write_json(const std::filesystem::path& p, const Json& j) { write_file(p, j.dump(2) + "\n"); }

struct FailureRecord {
  std::string subcommand;
  std::string check;   // suite or stage that failed
  std::string clause;  // violated clause tag
  std::string detail;
};

inline Json to_json(const std::vector<FailureRecord>& f) {
  Json a = Json::array();
  for (const auto& r : f)
    a.push_back({{"subcommand", r.subcommand}, {"check", r.check}, {"clause", r.clause}, {"detail", r.detail}});
  return Json{{"failures", a}};
}

}  // namespace nocrit::cli

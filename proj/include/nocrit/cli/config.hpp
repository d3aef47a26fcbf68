#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nocrit/errors.hpp"
#include "nocrit/seqspace.hpp"

namespace nocrit::cli {

struct RunConfig {
  std::size_t dim = 64;
  std::uint64_t seed = 7;
  double tol_fp = 1e-12;
  double tol_rank = 1e-6;
  double tol_norm = 1e-10;
  double tol_k = 1e-12;
  std::size_t corpus = 1000;
  double eps_base = 0.1;
  std::size_t extraction_size = 0;  // 0: half of the unguarded indices
  double scale = 1.0;               // sample-count multiplier for the invariant suites
  std::string out = "out";

  void set(const std::string& key, const std::string& value) {
    try {
      std::size_t used = 0;
      auto whole = [&](std::size_t n) {
        if (n != value.size()) throw std::invalid_argument("trailing characters");
      };
      if (key == "out") {
        out = value;
        return;
      }
      if (key == "dim" || key == "corpus" || key == "extraction_size" || key == "seed") {
        if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
        const unsigned long long v = std::stoull(value, &used);
        whole(used);
        if (key == "dim") dim = v;
        else if (key == "corpus") corpus = v;
        else if (key == "extraction_size") extraction_size = v;
        else seed = v;
        return;
      }
      const double v = std::stod(value, &used);
      whole(used);
      if (key == "tol_fp") tol_fp = v;
      else if (key == "tol_rank") tol_rank = v;
      else if (key == "tol_norm") tol_norm = v;
      else if (key == "tol_k") tol_k = v;
      else if (key == "eps_base") eps_base = v;
      else if (key == "scale") scale = v;
      else throw ConfigError("cli:config-key", "unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("cli:config-value", "bad value '" + value + "' for " + key);
    }
  }

  BlockDecomposition layout() const { return BlockDecomposition::standard(dim, extraction_size); }

  void validate() const {
    for (auto [name, v] : {std::pair{"tol_fp", tol_fp}, {"tol_rank", tol_rank}, {"tol_norm", tol_norm},
                           {"tol_k", tol_k}, {"eps_base", eps_base}, {"scale", scale}})
      if (!(v > 0.0)) throw ConfigError("cli:config-positive", std::string(name) + " must be positive");
    if (dim < 16) throw ConfigError("cli:config-dim", "dim must be at least 16");
    if (corpus == 0) throw ConfigError("cli:config-corpus", "corpus must be nonempty");
    if (out.empty()) throw ConfigError("cli:config-out", "output directory must be named");
    BlockDecomposition dec = [&] {
      try {
        return layout();  // rejects overlapping or out-of-range blocks
      } catch (const Error& e) {
        throw ConfigError("cli:config-layout", e.what());
      }
    }();
    if (dec.block("data").indices.size() < 4 || dec.block("extraction").indices.size() < 4)
      throw ConfigError("cli:config-layout", "data and extraction blocks need at least 4 indices each");
  }
};

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

// key = value lines; '#' starts a comment
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("cli:config-syntax", "line " + std::to_string(n) + ": expected key = value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cli:config-file", "cannot read " + path);
  for (const auto& [k, v] : parse_key_values(in)) cfg.set(k, v);
}

}  // namespace nocrit::cli

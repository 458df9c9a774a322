#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ising_market/config.hpp"
#include "ising_market/error.hpp"

// Configuration documents are flat `key = value` lines; `#` starts a comment.
//
//   L = 120
//   K = 2
//   beta = 2.0
//   alpha = 30
//   J = 1
//   gamma = 0.15                 # scalar: every off-diagonal entry
//   gamma = 0, 0.15; 0.15, 0     # or the full matrix, rows split by ';'
//   thermalization_sweeps = 10000
//   measurement_sweeps = 500000
//   normalization = per_site     # or total
//   seed = 42
//
// Keys not given keep the SimConfig defaults.

namespace ising_market {

inline constexpr const char* version_string = "ising-market 1.0.0";

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline double parse_double(std::string_view text, const std::string& where) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError(where + ": expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

inline std::uint64_t parse_u64(std::string_view text, const std::string& where) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError(where + ": expected a nonnegative integer, got '" + std::string(text) + "'");
  }
  return v;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  std::string value;
  std::size_t line = 0;
};

/// Splits a key = value document into entries, rejecting malformed lines
/// and duplicate keys.
inline std::map<std::string, Entry> read_entries(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ValidationError("line " + std::to_string(line_no) + ": missing key");
    if (entries.count(key)) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    entries.emplace(std::move(key), Entry{std::string(trim(line.substr(eq + 1))), line_no});
  }
  return entries;
}

inline std::string where(const std::string& key, const Entry& e) {
  return "line " + std::to_string(e.line) + " (" + key + ")";
}

inline GammaMatrix parse_gamma(const std::string& text, std::size_t K, const std::string& loc) {
  if (text.find(';') == std::string::npos && text.find(',') == std::string::npos) {
    return GammaMatrix::uniform(K, parse_double(text, loc));
  }
  const auto rows = split(text, ';');
  if (rows.size() != K) {
    throw ValidationError(loc + ": gamma has " + std::to_string(rows.size()) + " rows, expected K = " +
                          std::to_string(K));
  }
  GammaMatrix g(K);
  for (std::size_t j = 0; j < K; ++j) {
    const auto cols = split(rows[j], ',');
    if (cols.size() != K) {
      throw ValidationError(loc + ": gamma row " + std::to_string(j + 1) + " has " + std::to_string(cols.size()) +
                            " entries, expected " + std::to_string(K));
    }
    for (std::size_t k = 0; k < K; ++k) g(j, k) = parse_double(cols[k], loc);
  }
  return g;
}

/// Fills a SimConfig from entries, consuming the keys it knows. Keys starting
/// with `allowed_prefix` are left for the caller; anything else is an error.
inline SimConfig config_from_entries(const std::map<std::string, Entry>& entries, std::string_view allowed_prefix) {
  SimConfig c;
  auto get = [&](const char* key) -> const Entry* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };
  if (auto e = get("L")) c.L = parse_u64(e->value, where("L", *e));
  if (auto e = get("K")) c.K = parse_u64(e->value, where("K", *e));
  if (auto e = get("beta")) c.beta = parse_double(e->value, where("beta", *e));
  if (auto e = get("alpha")) c.alpha = parse_double(e->value, where("alpha", *e));
  if (auto e = get("J")) c.J = parse_double(e->value, where("J", *e));
  if (auto e = get("thermalization_sweeps")) {
    c.thermalization_sweeps = parse_u64(e->value, where("thermalization_sweeps", *e));
  }
  if (auto e = get("measurement_sweeps")) {
    c.measurement_sweeps = parse_u64(e->value, where("measurement_sweeps", *e));
  }
  if (auto e = get("seed")) c.seed = parse_u64(e->value, where("seed", *e));
  if (auto e = get("normalization")) {
    if (e->value == "per_site") {
      c.normalization = NormalizationMode::per_site;
    } else if (e->value == "total") {
      c.normalization = NormalizationMode::total;
    } else {
      throw ValidationError(where("normalization", *e) + ": expected per_site or total, got '" + e->value + "'");
    }
  }
  if (c.K < 1) throw ValidationError("K must be >= 1 (got " + std::to_string(c.K) + ")");
  if (auto e = get("gamma")) {
    c.gamma = parse_gamma(e->value, c.K, where("gamma", *e));
  } else {
    c.gamma = GammaMatrix(c.K);
  }

  static constexpr std::string_view known[] = {"L",     "K",     "beta", "alpha", "J", "gamma", "thermalization_sweeps",
                                               "measurement_sweeps", "seed", "normalization"};
  for (const auto& [key, e] : entries) {
    bool ok = !allowed_prefix.empty() && std::string_view(key).starts_with(allowed_prefix);
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ValidationError("line " + std::to_string(e.line) + ": unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

}  // namespace detail

/// Parses and validates a configuration document. Missing keys keep the
/// defaults; errors name the offending line or field.
inline SimConfig parse_config(std::string_view text) {
  return detail::config_from_entries(detail::read_entries(text), {});
}

inline std::string to_string(NormalizationMode mode) {
  return mode == NormalizationMode::per_site ? "per_site" : "total";
}

inline std::string format_gamma(const GammaMatrix& g) {
  std::string out;
  for (std::size_t j = 0; j < g.stocks(); ++j) {
    if (j) out += "; ";
    for (std::size_t k = 0; k < g.stocks(); ++k) {
      if (k) out += ", ";
      out += detail::format_double(g(j, k));
    }
  }
  return out;
}

/// Every SimConfig field as a document parse_config reads back exactly.
inline std::string format_config(const SimConfig& c) {
  std::ostringstream os;
  os << "L = " << c.L << '\n'
     << "K = " << c.K << '\n'
     << "beta = " << detail::format_double(c.beta) << '\n'
     << "alpha = " << detail::format_double(c.alpha) << '\n'
     << "J = " << detail::format_double(c.J) << '\n'
     << "gamma = " << format_gamma(c.gamma) << '\n'
     << "thermalization_sweeps = " << c.thermalization_sweeps << '\n'
     << "measurement_sweeps = " << c.measurement_sweeps << '\n'
     << "normalization = " << to_string(c.normalization) << '\n'
     << "seed = " << c.seed << '\n';
  return os.str();
}

/// What a run was, where it wrote, and when.
struct RunManifest {
  SimConfig config;
  std::string started_at;  // ISO-8601 UTC
  std::string finished_at;
  std::string series_path;
  std::string summary_path;
  std::string version = version_string;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

// Manifest-only keys live under `run.` so the config part stays a plain
// configuration document.
inline std::string format_manifest(const RunManifest& m) {
  std::ostringstream os;
  os << "# run manifest\n"
     << format_config(m.config) << "run.version = " << m.version << '\n'
     << "run.started_at = " << m.started_at << '\n'
     << "run.finished_at = " << m.finished_at << '\n'
     << "run.series = " << m.series_path << '\n'
     << "run.summary = " << m.summary_path << '\n';
  return os.str();
}

inline RunManifest parse_manifest(std::string_view text) {
  const auto entries = detail::read_entries(text);
  RunManifest m;
  m.config = detail::config_from_entries(entries, "run.");
  auto get = [&](const char* key) {
    const auto it = entries.find(key);
    return it == entries.end() ? std::string() : it->second.value;
  };
  m.version = get("run.version");
  m.started_at = get("run.started_at");
  m.finished_at = get("run.finished_at");
  m.series_path = get("run.series");
  m.summary_path = get("run.summary");
  return m;
}

}  // namespace ising_market

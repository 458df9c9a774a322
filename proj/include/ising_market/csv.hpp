#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ising_market/config_io.hpp"
#include "ising_market/error.hpp"
#include "ising_market/observables.hpp"

namespace ising_market {

// Series CSV: header `t,M_1,...,M_K,r_1,...,r_K`, one row per measured sweep,
// reals with 17 significant digits (exact round trip), return fields empty on
// the first row.

inline std::string series_header(std::size_t stocks) {
  std::string h = "t";
  for (std::size_t k = 1; k <= stocks; ++k) h += ",M_" + std::to_string(k);
  for (std::size_t k = 1; k <= stocks; ++k) h += ",r_" + std::to_string(k);
  return h;
}

/// Streams records to an ostream; usable directly as a run_simulation sink.
class SeriesCsvWriter {
public:
  SeriesCsvWriter(std::ostream& out, std::size_t stocks) : out_(&out), stocks_(stocks) {
    *out_ << series_header(stocks_) << '\n';
  }

  void write(const SeriesRecord& r) {
    if (r.magnetizations.size() != stocks_ || (r.has_returns() && r.returns.size() != stocks_)) {
      throw ValidationError("series record at t=" + std::to_string(r.t) + " does not have " +
                            std::to_string(stocks_) + " stocks");
    }
    line_.clear();
    line_ += std::to_string(r.t);
    for (double m : r.magnetizations) {
      line_ += ',';
      line_ += detail::format_double(m);
    }
    for (std::size_t k = 0; k < stocks_; ++k) {
      line_ += ',';
      if (r.has_returns()) line_ += detail::format_double(r.returns[k]);
    }
    line_ += '\n';
    *out_ << line_;
    if (!*out_) throw IoError("failed writing series row t=" + std::to_string(r.t));
  }

  void operator()(const SeriesRecord& r) { write(r); }

private:
  std::ostream* out_;
  std::size_t stocks_;
  std::string line_;
};

inline void write_series_csv(std::span<const SeriesRecord> records, const std::filesystem::path& path) {
  if (records.empty()) throw ValidationError("write_series_csv: no records");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  SeriesCsvWriter writer(out, records.front().magnetizations.size());
  for (const auto& r : records) writer.write(r);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

/// Parses a series CSV. Errors name the 1-based line number (the header is
/// line 1).
inline std::vector<SeriesRecord> read_series_csv(std::istream& in, const std::string& name = "series") {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(name + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split(line, ',');
  if (header.size() < 3 || header.size() % 2 == 0 || header[0] != "t") {
    throw ValidationError(name + ": line 1: malformed header '" + line + "'");
  }
  const std::size_t stocks = (header.size() - 1) / 2;
  if (line != series_header(stocks)) throw ValidationError(name + ": line 1: malformed header '" + line + "'");

  std::vector<SeriesRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string loc = name + ": line " + std::to_string(line_no);
    if (in.eof()) throw ValidationError(loc + ": truncated row (no line terminator)");
    const auto fields = detail::split(line, ',');
    if (fields.size() != 1 + 2 * stocks) {
      throw ValidationError(loc + ": expected " + std::to_string(1 + 2 * stocks) + " fields, got " +
                            std::to_string(fields.size()));
    }
    SeriesRecord r;
    r.t = detail::parse_u64(fields[0], loc);
    for (std::size_t k = 0; k < stocks; ++k) r.magnetizations.push_back(detail::parse_double(fields[1 + k], loc));
    const bool first = records.empty();
    for (std::size_t k = 0; k < stocks; ++k) {
      const auto f = fields[1 + stocks + k];
      if (first) {
        if (!f.empty()) throw ValidationError(loc + ": first row must have empty returns");
      } else {
        if (f.empty()) throw ValidationError(loc + ": missing return for stock " + std::to_string(k + 1));
        r.returns.push_back(detail::parse_double(f, loc));
      }
    }
    if (!first && r.t <= records.back().t) throw ValidationError(loc + ": t must be increasing");
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ValidationError(name + ": no data rows");
  return records;
}

inline std::vector<SeriesRecord> read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_series_csv(in, path.string());
}

// Summary CSV: `gamma,seed,cc_12,...,kurtosis_1,...` with one cc column per
// stock pair (j < k) and one kurtosis column per stock.

inline std::string summary_header(std::size_t stocks) {
  std::string h = "gamma,seed";
  for (std::size_t a = 0; a < stocks; ++a)
    for (std::size_t b = a + 1; b < stocks; ++b) h += ",cc_" + std::to_string(a + 1) + std::to_string(b + 1);
  for (std::size_t k = 1; k <= stocks; ++k) h += ",kurtosis_" + std::to_string(k);
  return h;
}

/// Scalar label for a coupling matrix: gamma(1, 2), or 0 for a single stock.
inline double gamma_label(const GammaMatrix& g) { return g.stocks() >= 2 ? g(0, 1) : 0.0; }

inline std::string summary_row(double gamma, std::uint64_t seed, const SummaryStats& s) {
  std::string row = detail::format_double(gamma) + "," + std::to_string(seed);
  for (std::size_t a = 0; a < s.stocks; ++a)
    for (std::size_t b = a + 1; b < s.stocks; ++b) row += "," + detail::format_double(s.cross_correlation[a][b]);
  for (double k : s.excess_kurtosis) row += "," + detail::format_double(k);
  return row;
}

/// Per-lag autocorrelations: `lag,vacf_1,...,vacf_K,racf_1,...,racf_K`.
inline std::string autocorrelation_csv(const SummaryStats& s) {
  std::string out = "lag";
  for (std::size_t k = 1; k <= s.stocks; ++k) out += ",vacf_" + std::to_string(k);
  for (std::size_t k = 1; k <= s.stocks; ++k) out += ",racf_" + std::to_string(k);
  out += '\n';
  for (std::size_t lag = 1; lag <= s.max_lag; ++lag) {
    out += std::to_string(lag);
    for (std::size_t k = 0; k < s.stocks; ++k) out += "," + detail::format_double(s.volatility_autocorrelation[k][lag - 1]);
    for (std::size_t k = 0; k < s.stocks; ++k) out += "," + detail::format_double(s.return_autocorrelation[k][lag - 1]);
    out += '\n';
  }
  return out;
}

/// Per-stock volatility moments: `stock,vol_mean,vol_std,kurtosis`.
inline std::string moments_csv(const SummaryStats& s) {
  std::string out = "stock,vol_mean,vol_std,kurtosis\n";
  for (std::size_t k = 0; k < s.stocks; ++k) {
    out += std::to_string(k + 1) + "," + detail::format_double(s.volatility_mean[k]) + "," +
           detail::format_double(s.volatility_std[k]) + "," + detail::format_double(s.excess_kurtosis[k]) + "\n";
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ising_market

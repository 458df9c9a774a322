#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ising_market/config_io.hpp"
#include "ising_market/csv.hpp"
#include "ising_market/error.hpp"
#include "ising_market/simulation.hpp"

// Implementations behind the `ising_market` command-line subcommands.

namespace ising_market::commands {

namespace fs = std::filesystem;

inline constexpr const char* series_file = "series.csv";
inline constexpr const char* summary_file = "summary.csv";
inline constexpr const char* autocorrelation_file = "autocorrelation.csv";
inline constexpr const char* moments_file = "moments.csv";
inline constexpr const char* manifest_file = "manifest.txt";

inline std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

inline SimConfig load_config(const std::optional<fs::path>& path) {
  if (!path) return parse_config("");
  try {
    return parse_config(read_text_file(*path));
  } catch (const ValidationError& e) {
    throw ValidationError(path->string() + ": " + e.what());
  }
}

inline void write_stats(const fs::path& dir, const SimConfig& config, const SummaryStats& stats) {
  write_text_file(dir / summary_file,
                  summary_header(stats.stocks) + "\n" + summary_row(gamma_label(config.gamma), config.seed, stats) + "\n");
  write_text_file(dir / autocorrelation_file, autocorrelation_csv(stats));
  write_text_file(dir / moments_file, moments_csv(stats));
}

/// One full run into `dir`: series CSV (optional), summary, autocorrelation
/// and moments tables, and the manifest.
inline SummaryStats run_into(const SimConfig& config, const fs::path& dir, std::size_t max_lag, bool keep_series) {
  ensure_directory(dir);
  RunManifest manifest;
  manifest.config = config;
  manifest.started_at = utc_now();
  manifest.summary_path = (dir / summary_file).string();

  SummaryStats stats;
  if (keep_series) {
    manifest.series_path = (dir / series_file).string();
    std::ofstream out(dir / series_file, std::ios::binary);
    if (!out) throw IoError("cannot open " + manifest.series_path + " for writing");
    SeriesCsvWriter writer(out, config.K);
    stats = run_simulation(config, writer, max_lag);
    out.flush();
    if (!out) throw IoError("failed writing " + manifest.series_path);
  } else {
    stats = run_simulation(config, max_lag);
  }
  write_stats(dir, config, stats);
  manifest.finished_at = utc_now();
  write_text_file(dir / manifest_file, format_manifest(manifest));
  return stats;
}

struct SimulateOptions {
  std::optional<fs::path> config;
  std::uint64_t seed = 0;
  fs::path out;
  std::optional<double> gamma;
  std::size_t max_lag = default_max_lag;
};

inline SimConfig resolve(const SimulateOptions& opt) {
  SimConfig config = load_config(opt.config);
  config.seed = opt.seed;
  if (opt.gamma) config.gamma = GammaMatrix::uniform(config.K, *opt.gamma);
  validate(config);
  return config;
}

inline int simulate(const SimulateOptions& opt) {
  const SimConfig config = resolve(opt);
  const SummaryStats stats = run_into(config, opt.out, opt.max_lag, true);
  std::cout << summary_header(stats.stocks) << '\n' << summary_row(gamma_label(config.gamma), config.seed, stats) << '\n';
  return 0;
}

struct SweepOptions {
  std::optional<fs::path> config;
  std::vector<double> gammas;
  std::size_t seeds = 1;
  std::uint64_t base_seed = 0;
  fs::path out;
  std::size_t jobs = 0;  // 0: hardware concurrency
  std::size_t max_lag = default_max_lag;
  bool keep_series = false;
};

/// Drops repeated values, keeping first occurrences in order.
inline std::vector<double> deduplicate(const std::vector<double>& values, std::ostream& warnings) {
  std::vector<double> unique;
  for (double v : values) {
    if (std::find(unique.begin(), unique.end(), v) != unique.end()) {
      warnings << "warning: duplicate gamma " << detail::format_double(v) << " ignored\n";
      continue;
    }
    unique.push_back(v);
  }
  return unique;
}

struct SweepCell {
  double gamma = 0.0;
  std::uint64_t seed = 0;
  SummaryStats stats;
};

/// Mean off-diagonal volatility correlation; cc_12 when K = 2.
inline double mean_pair_correlation(const SummaryStats& s) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t a = 0; a < s.stocks; ++a)
    for (std::size_t b = a + 1; b < s.stocks; ++b, ++n) sum += s.cross_correlation[a][b];
  return n ? sum / static_cast<double>(n) : std::nan("");
}

struct SweepAggregate {
  double gamma = 0.0;
  std::size_t runs = 0;
  double mean_cc = 0.0;
  double stderr_cc = std::nan("");  ///< sample std / sqrt(runs); NaN for one run
};

inline std::vector<SweepAggregate> aggregate(const std::vector<SweepCell>& cells, const std::vector<double>& gammas) {
  std::vector<SweepAggregate> rows;
  for (double g : gammas) {
    std::vector<double> cc;
    for (const auto& c : cells)
      if (c.gamma == g) cc.push_back(mean_pair_correlation(c.stats));
    SweepAggregate row;
    row.gamma = g;
    row.runs = cc.size();
    if (cc.empty()) {
      rows.push_back(row);
      continue;
    }
    double sum = 0.0;
    for (double v : cc) sum += v;
    row.mean_cc = sum / static_cast<double>(cc.size());
    if (cc.size() > 1) {
      double ss = 0.0;
      for (double v : cc) ss += (v - row.mean_cc) * (v - row.mean_cc);
      row.stderr_cc = std::sqrt(ss / static_cast<double>(cc.size() - 1)) / std::sqrt(static_cast<double>(cc.size()));
    }
    rows.push_back(row);
  }
  return rows;
}

inline std::string aggregate_csv(const std::vector<SweepAggregate>& rows) {
  std::string out = "gamma,runs,mean_cc,stderr_cc\n";
  for (const auto& r : rows) {
    out += detail::format_double(r.gamma) + "," + std::to_string(r.runs) + "," + detail::format_double(r.mean_cc) + ",";
    if (!std::isnan(r.stderr_cc)) out += detail::format_double(r.stderr_cc);
    out += '\n';
  }
  return out;
}

inline std::string cell_directory_name(double gamma, std::uint64_t seed) {
  return "gamma_" + detail::format_double(gamma) + "_seed_" + std::to_string(seed);
}

/// Runs every (gamma, seed) cell, in parallel across cells. Each cell writes
/// only into its own directory; the combined tables are written afterwards.
inline std::vector<SweepCell> run_sweep(const SweepOptions& opt, std::ostream& log) {
  if (opt.gammas.empty()) throw ValidationError("gamma list is empty");
  if (opt.seeds < 1) throw ValidationError("seeds must be >= 1");
  const std::vector<double> gammas = deduplicate(opt.gammas, log);
  const SimConfig base = load_config(opt.config);

  std::vector<SweepCell> cells;
  std::vector<SimConfig> configs;
  for (double g : gammas) {
    for (std::size_t s = 0; s < opt.seeds; ++s) {
      SimConfig c = base;
      c.gamma = GammaMatrix::uniform(c.K, g);
      c.seed = opt.base_seed + s;
      validate(c);
      configs.push_back(c);
      cells.push_back({g, c.seed, {}});
    }
  }
  ensure_directory(opt.out);

  std::size_t jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
          try {
            const fs::path dir = opt.out / "cells" / cell_directory_name(cells[i].gamma, cells[i].seed);
            cells[i].stats = run_into(configs[i], dir, opt.max_lag, opt.keep_series);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::string summary = summary_header(base.K) + "\n";
  for (const auto& c : cells) summary += summary_row(c.gamma, c.seed, c.stats) + "\n";
  write_text_file(opt.out / "sweep_summary.csv", summary);
  write_text_file(opt.out / "sweep_table.csv", aggregate_csv(aggregate(cells, gammas)));
  return cells;
}

inline int sweep(const SweepOptions& opt) {
  const auto cells = run_sweep(opt, std::cerr);
  std::cout << read_text_file(opt.out / "sweep_table.csv");
  return cells.empty() ? 3 : 0;
}

struct AnalyzeOptions {
  fs::path input;
  std::size_t max_lag = default_max_lag;
  std::optional<fs::path> out;
};

/// Recomputes SummaryStats from a stored series CSV. Labels (gamma, seed) come
/// from a manifest next to the input when one exists.
inline int analyze(const AnalyzeOptions& opt) {
  const auto records = read_series_csv(opt.input);
  if (opt.max_lag + 2 > records.size()) {
    throw ValidationError("--max-lag " + std::to_string(opt.max_lag) + " too large for " +
                          std::to_string(records.size()) + " records (needs max_lag + 2 <= records)");
  }
  const SummaryStats stats = summarize(records, opt.max_lag);

  SimConfig labels;
  labels.K = stats.stocks;
  labels.gamma = GammaMatrix(stats.stocks);
  const fs::path manifest = opt.input.parent_path() / manifest_file;
  if (fs::exists(manifest)) labels = parse_manifest(read_text_file(manifest)).config;

  if (opt.out) {
    ensure_directory(*opt.out);
    write_stats(*opt.out, labels, stats);
  }
  std::cout << summary_header(stats.stocks) << '\n' << summary_row(gamma_label(labels.gamma), labels.seed, stats) << '\n';
  return 0;
}

}  // namespace ising_market::commands

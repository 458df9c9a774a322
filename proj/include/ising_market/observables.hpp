#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ising_market/error.hpp"

namespace ising_market {

/// One measured sweep. `returns` is empty on the first record of a run;
/// otherwise returns[k] = (M_k(t) - M_k(t-1)) / 2.
struct SeriesRecord {
  std::uint64_t t = 0;
  std::vector<double> magnetizations;
  std::vector<double> returns;

  bool has_returns() const noexcept { return !returns.empty(); }

  friend bool operator==(const SeriesRecord&, const SeriesRecord&) = default;
};

/// Statistics over the per-stock return series. Volatility is |return|.
/// All moments use the population (divide-by-T) convention.
struct SummaryStats {
  std::size_t stocks = 0;
  std::size_t samples = 0;  ///< returns per stock
  std::size_t max_lag = 0;
  /// Lag-0 correlation of volatilities, stocks x stocks.
  std::vector<std::vector<double>> cross_correlation;
  /// Per stock, entry l - 1 holds the lag-l autocorrelation, l = 1..max_lag.
  std::vector<std::vector<double>> volatility_autocorrelation;
  std::vector<std::vector<double>> return_autocorrelation;
  /// Of returns, per stock.
  std::vector<double> excess_kurtosis;
  std::vector<double> volatility_mean;
  std::vector<double> volatility_std;

  friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

inline std::vector<double> returns_from_magnetization(std::span<const double> magnetization) {
  if (magnetization.size() < 2) throw ValidationError("insufficient series: need at least 2 magnetizations");
  std::vector<double> out(magnetization.size() - 1);
  for (std::size_t t = 0; t + 1 < magnetization.size(); ++t) {
    out[t] = (magnetization[t + 1] - magnetization[t]) / 2.0;
  }
  return out;
}

inline std::vector<double> volatility(std::span<const double> returns) {
  if (returns.empty()) throw ValidationError("volatility: empty return series");
  std::vector<double> out(returns.size());
  std::transform(returns.begin(), returns.end(), out.begin(), [](double r) { return std::abs(r); });
  return out;
}

inline double mean(std::span<const double> x) {
  if (x.empty()) throw ValidationError("mean: empty series");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Population variance, sum (x - mean)^2 / T.
inline double variance(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

/// Pearson correlation at lag 0. Throws on length mismatch, fewer than two
/// samples, or a constant input.
inline double cross_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("cross_correlation: length mismatch (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw ValidationError("cross_correlation: need at least 2 samples");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double dx = x[t] - mx;
    const double dy = y[t] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("degenerate series: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Lag-l autocorrelation about the global mean: the mean lagged product over
/// the T - l overlapping pairs divided by the population variance. Lag 0 is 1.
inline double autocorrelation(std::span<const double> x, std::size_t lag) {
  if (lag >= x.size()) {
    throw ValidationError("autocorrelation: lag " + std::to_string(lag) + " must be below series length " +
                          std::to_string(x.size()));
  }
  const double m = mean(x);
  double var = 0.0;
  for (double v : x) var += (v - m) * (v - m);
  if (var == 0.0) throw ValidationError("degenerate series: zero variance");
  if (lag == 0) return 1.0;
  double cov = 0.0;
  for (std::size_t t = 0; t + lag < x.size(); ++t) cov += (x[t] - m) * (x[t + lag] - m);
  const auto n = static_cast<double>(x.size());
  return (cov / (n - static_cast<double>(lag))) / (var / n);
}

/// m4 / m2^2 - 3 with central population moments.
inline double excess_kurtosis(std::span<const double> x) {
  if (x.size() < 4) throw ValidationError("excess_kurtosis: need at least 4 samples");
  const double m = mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  if (m2 == 0.0) throw ValidationError("degenerate series: zero variance");
  const auto n = static_cast<double>(x.size());
  m2 /= n;
  m4 /= n;
  return m4 / (m2 * m2) - 3.0;
}

/// Collects return series record by record and produces SummaryStats.
/// Feeding the same records one at a time or as a batch gives identical
/// results, since both paths end in finish() over the same columns.
class SeriesAccumulator {
public:
  explicit SeriesAccumulator(std::size_t stocks) : returns_(stocks) {}

  void add(const SeriesRecord& record) {
    if (record.magnetizations.size() != returns_.size()) {
      throw ValidationError("record at t=" + std::to_string(record.t) + " has " +
                            std::to_string(record.magnetizations.size()) + " stocks, expected " +
                            std::to_string(returns_.size()));
    }
    ++records_;
    if (!record.has_returns()) return;
    if (record.returns.size() != returns_.size()) {
      throw ValidationError("record at t=" + std::to_string(record.t) + " has a mismatched return count");
    }
    for (std::size_t k = 0; k < returns_.size(); ++k) returns_[k].push_back(record.returns[k]);
  }

  void operator()(const SeriesRecord& record) { add(record); }

  std::size_t records() const noexcept { return records_; }
  std::span<const double> returns(std::size_t k) const { return returns_.at(k); }

  SummaryStats finish(std::size_t max_lag) const {
    if (records_ < max_lag + 2) {
      throw ValidationError("summary needs at least max_lag + 2 = " + std::to_string(max_lag + 2) +
                            " records, got " + std::to_string(records_));
    }
    const std::size_t stocks = returns_.size();
    SummaryStats stats;
    stats.stocks = stocks;
    stats.samples = returns_.front().size();
    stats.max_lag = max_lag;

    std::vector<std::vector<double>> vol(stocks);
    for (std::size_t k = 0; k < stocks; ++k) {
      vol[k] = volatility(returns_[k]);
      stats.volatility_mean.push_back(mean(vol[k]));
      stats.volatility_std.push_back(std::sqrt(variance(vol[k])));
      stats.excess_kurtosis.push_back(excess_kurtosis(returns_[k]));
      std::vector<double> vacf, racf;
      for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        vacf.push_back(autocorrelation(vol[k], lag));
        racf.push_back(autocorrelation(returns_[k], lag));
      }
      stats.volatility_autocorrelation.push_back(std::move(vacf));
      stats.return_autocorrelation.push_back(std::move(racf));
    }

    stats.cross_correlation.assign(stocks, std::vector<double>(stocks, 1.0));
    for (std::size_t a = 0; a < stocks; ++a) {
      for (std::size_t b = a + 1; b < stocks; ++b) {
        const double c = cross_correlation(vol[a], vol[b]);
        stats.cross_correlation[a][b] = c;
        stats.cross_correlation[b][a] = c;
      }
    }
    return stats;
  }

private:
  std::vector<std::vector<double>> returns_;
  std::size_t records_ = 0;
};

inline SummaryStats summarize(std::span<const SeriesRecord> records, std::size_t max_lag) {
  if (records.empty()) throw ValidationError("summarize: no records");
  SeriesAccumulator acc(records.front().magnetizations.size());
  for (const auto& r : records) acc.add(r);
  return acc.finish(max_lag);
}

}  // namespace ising_market

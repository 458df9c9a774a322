#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ising_market/error.hpp"
#include "ising_market/spin_grid.hpp"

namespace ising_market {

/// Dense K x K cross-stock coupling matrix. Entry (j, k) scales stock j's
/// magnetization inside stock k's local field.
class GammaMatrix {
public:
  GammaMatrix() = default;
  explicit GammaMatrix(std::size_t stocks) : stocks_(stocks), values_(stocks * stocks, 0.0) {}

  /// Every off-diagonal entry equal to `coupling`.
  static GammaMatrix uniform(std::size_t stocks, double coupling) {
    GammaMatrix g(stocks);
    for (std::size_t j = 0; j < stocks; ++j)
      for (std::size_t k = 0; k < stocks; ++k)
        if (j != k) g(j, k) = coupling;
    return g;
  }

  std::size_t stocks() const noexcept { return stocks_; }
  double& operator()(std::size_t from, std::size_t to) noexcept { return values_[from * stocks_ + to]; }
  double operator()(std::size_t from, std::size_t to) const noexcept { return values_[from * stocks_ + to]; }

  friend bool operator==(const GammaMatrix&, const GammaMatrix&) = default;

private:
  std::size_t stocks_ = 0;
  std::vector<double> values_;
};

/// Model and run parameters. Defaults are the two-stock, 120 x 120 protocol
/// with (beta, alpha, J) = (2, 30, 1) and no cross coupling.
struct SimConfig {
  std::size_t L = 120;
  std::size_t K = 2;
  double beta = 2.0;
  double alpha = 30.0;
  double J = 1.0;
  GammaMatrix gamma = GammaMatrix(2);
  std::uint64_t thermalization_sweeps = 10'000;
  std::uint64_t measurement_sweeps = 500'000;
  std::uint64_t seed = 0;
  NormalizationMode normalization = NormalizationMode::per_site;

  std::size_t sites() const noexcept { return L * L; }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Throws ValidationError naming the first offending field.
inline void validate(const SimConfig& c) {
  if (c.L < 2) throw ValidationError("L must be >= 2 (got " + std::to_string(c.L) + ")");
  if (c.K < 1) throw ValidationError("K must be >= 1 (got " + std::to_string(c.K) + ")");
  if (!std::isfinite(c.beta) || c.beta < 0.0) throw ValidationError("beta must be finite and >= 0");
  if (!std::isfinite(c.alpha) || c.alpha < 0.0) throw ValidationError("alpha must be finite and >= 0");
  if (!std::isfinite(c.J)) throw ValidationError("J must be finite");
  if (c.measurement_sweeps < 1) throw ValidationError("measurement_sweeps must be >= 1");
  if (c.gamma.stocks() != c.K) {
    throw ValidationError("gamma must be " + std::to_string(c.K) + "x" + std::to_string(c.K));
  }
  for (std::size_t j = 0; j < c.K; ++j) {
    if (c.gamma(j, j) != 0.0) throw ValidationError("gamma diagonal must be zero");
    for (std::size_t k = 0; k < c.K; ++k) {
      if (!std::isfinite(c.gamma(j, k))) throw ValidationError("gamma entries must be finite");
    }
  }
}

}  // namespace ising_market

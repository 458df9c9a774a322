#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ising_market {

/// How a lattice's spin sum is reported as a magnetization.
enum class NormalizationMode {
  per_site,  ///< sum / L^2, in [-1, 1]
  total,     ///< raw spin sum
};

using Spin = std::int8_t;

/// Periodic neighbors of `site` on an L x L torus, row-major, in the order
/// up, down, left, right. On L = 2 the up/down (and left/right) neighbors
/// coincide; they are reported twice so every site keeps coordination 4.
inline std::array<std::size_t, 4> neighbor_indices(std::size_t site, std::size_t L) {
  if (L == 0 || site >= L * L) {
    throw std::out_of_range("neighbor_indices: site " + std::to_string(site) +
                            " outside " + std::to_string(L) + "x" + std::to_string(L) +
                            " lattice");
  }
  const std::size_t row = site / L;
  const std::size_t col = site % L;
  const std::size_t up = row == 0 ? L - 1 : row - 1;
  const std::size_t down = row + 1 == L ? 0 : row + 1;
  const std::size_t left = col == 0 ? L - 1 : col - 1;
  const std::size_t right = col + 1 == L ? 0 : col + 1;
  return {up * L + col, down * L + col, row * L + left, row * L + right};
}

/// One stock's L x L lattice of +/-1 agents with an exactly maintained spin
/// sum. All mutation goes through set(), so sum() never drifts from the
/// stored spins.
class SpinGrid {
public:
  /// All spins +1.
  explicit SpinGrid(std::size_t side_length)
      : side_(side_length), spins_(side_length * side_length, Spin{1}),
        sum_(static_cast<std::int64_t>(side_length * side_length)) {
    if (side_length == 0) throw std::invalid_argument("SpinGrid: side length must be positive");
  }

  SpinGrid(std::size_t side_length, std::vector<Spin> spins)
      : side_(side_length), spins_(std::move(spins)), sum_(0) {
    if (side_length == 0) throw std::invalid_argument("SpinGrid: side length must be positive");
    if (spins_.size() != side_ * side_) {
      throw std::invalid_argument("SpinGrid: expected " + std::to_string(side_ * side_) +
                                  " spins, got " + std::to_string(spins_.size()));
    }
    for (Spin s : spins_) {
      if (s != 1 && s != -1) throw std::invalid_argument("SpinGrid: spins must be +1 or -1");
      sum_ += s;
    }
  }

  std::size_t side_length() const noexcept { return side_; }
  std::size_t size() const noexcept { return spins_.size(); }
  std::int64_t sum() const noexcept { return sum_; }
  std::span<const Spin> spins() const noexcept { return spins_; }

  Spin operator[](std::size_t site) const noexcept { return spins_[site]; }

  Spin at(std::size_t site) const {
    check_site(site);
    return spins_[site];
  }

  /// Sets one spin and adjusts the running sum by (new - old).
  void set(std::size_t site, Spin value) {
    check_site(site);
    if (value != 1 && value != -1) throw std::invalid_argument("SpinGrid::set: value must be +1 or -1");
    set_unchecked(site, value);
  }

  // Hot-loop variant; caller guarantees site < size() and value is +/-1.
  void set_unchecked(std::size_t site, Spin value) noexcept {
    sum_ += value - spins_[site];
    spins_[site] = value;
  }

  /// Sum of the four periodic neighbors of the site at (row, col); no range check.
  int neighbor_sum(std::size_t row, std::size_t col) const noexcept {
    const std::size_t site = row * side_ + col;
    const std::size_t up = row == 0 ? site + side_ * (side_ - 1) : site - side_;
    const std::size_t down = row + 1 == side_ ? col : site + side_;
    const std::size_t left = col == 0 ? site + side_ - 1 : site - 1;
    const std::size_t right = col + 1 == side_ ? site + 1 - side_ : site + 1;
    return spins_[up] + spins_[down] + spins_[left] + spins_[right];
  }

  int neighbor_sum(std::size_t site) const noexcept {
    return neighbor_sum(site / side_, site % side_);
  }

  friend bool operator==(const SpinGrid&, const SpinGrid&) = default;

private:
  void check_site(std::size_t site) const {
    if (site >= spins_.size()) {
      throw std::out_of_range("SpinGrid: site " + std::to_string(site) + " out of range");
    }
  }

  std::size_t side_;
  std::vector<Spin> spins_;
  std::int64_t sum_;
};

inline double normalize_sum(std::int64_t sum, std::size_t sites, NormalizationMode mode) noexcept {
  return mode == NormalizationMode::per_site
             ? static_cast<double>(sum) / static_cast<double>(sites)
             : static_cast<double>(sum);
}

inline double magnetization(const SpinGrid& grid, NormalizationMode mode) noexcept {
  return normalize_sum(grid.sum(), grid.size(), mode);
}

}  // namespace ising_market

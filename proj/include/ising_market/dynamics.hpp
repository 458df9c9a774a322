#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "ising_market/config.hpp"
#include "ising_market/random.hpp"
#include "ising_market/spin_grid.hpp"

namespace ising_market {

/// K lattices plus the sweep clock. Magnetizations are read from each grid's
/// exact integer spin sum and normalized on access, so they can never drift
/// from the spins themselves.
class MarketState {
public:
  MarketState(std::vector<SpinGrid> grids, NormalizationMode mode)
      : grids_(std::move(grids)), mode_(mode) {
    if (grids_.empty()) throw std::invalid_argument("MarketState: need at least one stock");
    for (const auto& g : grids_) {
      if (g.side_length() != grids_.front().side_length()) {
        throw std::invalid_argument("MarketState: all grids must share the same side length");
      }
    }
  }

  std::size_t stocks() const noexcept { return grids_.size(); }
  std::size_t sites() const noexcept { return grids_.front().size(); }
  std::size_t side_length() const noexcept { return grids_.front().side_length(); }
  NormalizationMode normalization() const noexcept { return mode_; }
  std::uint64_t time() const noexcept { return t_; }

  const SpinGrid& grid(std::size_t k) const { return grids_.at(k); }
  std::span<const SpinGrid> grids() const noexcept { return grids_; }

  double magnetization(std::size_t k) const noexcept {
    return normalize_sum(grids_[k].sum(), grids_[k].size(), mode_);
  }

  void set_spin(std::size_t k, std::size_t site, Spin value) { grids_.at(k).set(site, value); }
  void set_spin_unchecked(std::size_t k, std::size_t site, Spin value) noexcept {
    grids_[k].set_unchecked(site, value);
  }
  void advance_clock() noexcept { ++t_; }

  friend bool operator==(const MarketState&, const MarketState&) = default;

private:
  std::vector<SpinGrid> grids_;
  NormalizationMode mode_;
  std::uint64_t t_ = 0;
};

/// Fresh state with i.i.d. uniform +/-1 spins; stock k is filled from
/// streams[k].
inline MarketState random_state(const SimConfig& config, std::span<Engine> streams) {
  if (streams.size() != config.K) throw std::invalid_argument("random_state: one stream per stock required");
  std::vector<SpinGrid> grids;
  grids.reserve(config.K);
  for (std::size_t k = 0; k < config.K; ++k) {
    std::vector<Spin> spins(config.sites());
    for (auto& s : spins) s = (streams[k]() >> 63) ? Spin{1} : Spin{-1};
    grids.emplace_back(config.L, std::move(spins));
  }
  return MarketState(std::move(grids), config.normalization);
}

/// Local-field evaluator for one configuration. The magnetization
/// normalization is folded into the coupling constants, so the field is
/// computed straight from the integer spin sums:
///   h = J * (sum of the 4 neighbor spins) - alpha * s_i * |M_k| + sum_j gamma(j,k) * M_j
/// with every M read live from the current state.
class FieldModel {
public:
  explicit FieldModel(const SimConfig& config)
      : stocks_(config.K), J_(config.J), cross_(config.K * config.K, 0.0) {
    const double scale =
        config.normalization == NormalizationMode::per_site ? static_cast<double>(config.sites()) : 1.0;
    feedback_ = config.alpha / scale;
    for (std::size_t j = 0; j < stocks_; ++j)
      for (std::size_t k = 0; k < stocks_; ++k)
        if (j != k) cross_[k * stocks_ + j] = config.gamma(j, k) / scale;
  }

  double field(const MarketState& state, std::size_t k, std::size_t row, std::size_t col) const noexcept {
    const std::span<const SpinGrid> grids = state.grids();
    const SpinGrid& grid = grids[k];
    const double s = grid[row * grid.side_length() + col];
    const double own = static_cast<double>(grid.sum());
    double h = J_ * grid.neighbor_sum(row, col) - feedback_ * s * std::abs(own);
    const double* cross = cross_.data() + k * stocks_;
    for (std::size_t j = 0; j < stocks_; ++j) {
      if (j != k) h += cross[j] * static_cast<double>(grids[j].sum());
    }
    return h;
  }

  double field(const MarketState& state, std::size_t k, std::size_t site) const noexcept {
    const std::size_t L = state.side_length();
    return field(state, k, site / L, site % L);
  }

  double coupling() const noexcept { return J_; }
  double feedback() const noexcept { return feedback_; }
  /// gamma(j, k) / scale, the weight of stock j's sum in stock k's field.
  double cross(std::size_t j, std::size_t k) const noexcept { return cross_[k * stocks_ + j]; }

private:
  std::size_t stocks_;
  double J_;
  double feedback_ = 0.0;
  std::vector<double> cross_;  // row k holds gamma(j, k) / scale
};

inline double local_field(const MarketState& state, const SimConfig& config, std::size_t k,
                          std::size_t site) {
  return FieldModel(config).field(state, k, site);
}

/// Heat-bath probability 1 / (1 + exp(-2 beta h)) of the new spin being +1.
/// The exponent is always -|2 beta h|, so nothing overflows: for z >= 0 this is
/// 1 / (1 + e^-z), otherwise e^z / (1 + e^z). Written as one select over the
/// numerator because the sign of z is unpredictable in the update loop.
inline double update_probability(double h, double beta) noexcept {
  const double z = 2.0 * beta * h;
  const double e = std::exp(-std::abs(z));
  const double numerator = z >= 0.0 ? 1.0 : e;
  return numerator / (1.0 + e);
}

namespace detail {

// Brackets u < update_probability(h, beta) with a table of the logistic on a
// fixed grid of z = 2 beta h, so exp is only evaluated when u lands between the
// two grid values around z (about 1% of draws). Each bound carries a 1e-9
// relative margin, many orders above any rounding wobble of the logistic or of
// the cell index, so every bracketed decision matches the direct comparison.
class LogisticBracket {
public:
  static constexpr double z_min = -40.0;
  static constexpr double z_max = 40.0;
  static constexpr int per_unit = 16;
  static constexpr int cells = static_cast<int>((z_max - z_min) * per_unit);

  static const LogisticBracket& instance() {
    static const LogisticBracket table;
    return table;
  }

  /// +1 / -1 when the table decides, 0 when the exact comparison is needed.
  int decide(double z, double u) const noexcept { return decide_x((z - z_min) * per_unit, u); }

  /// Same, with z already mapped to table units x = (z - z_min) * per_unit.
  int decide_x(double x, double u) const noexcept {
    if (!(x >= 0.0 && x < cells)) return 0;
    const auto i = static_cast<std::size_t>(x);
    return static_cast<int>(u < below_[i]) - static_cast<int>(u >= above_[i + 1]);
  }

private:
  LogisticBracket() {
    for (int i = 0; i <= cells; ++i) {
      const double z = z_min + static_cast<double>(i) / per_unit;
      const double e = std::exp(-std::abs(z));
      const double p = (z >= 0.0 ? 1.0 : e) / (1.0 + e);
      below_[static_cast<std::size_t>(i)] = p * (1.0 - 1e-9);
      above_[static_cast<std::size_t>(i)] = p * (1.0 + 1e-9);
    }
  }

  std::array<double, cells + 1> below_{};
  std::array<double, cells + 1> above_{};
};

}  // namespace detail

/// Heat-bath outcome for field h given the variate u: +1 iff
/// u < update_probability(h, beta).
inline Spin heat_bath_outcome(double h, double beta, double u) noexcept {
  const int decided = detail::LogisticBracket::instance().decide(2.0 * beta * h, u);
  if (decided != 0) return static_cast<Spin>(decided);
  return u < update_probability(h, beta) ? Spin{1} : Spin{-1};
}

/// Draws a heat-bath spin for field h: +1 with probability
/// update_probability(h, beta), independent of the current value.
inline Spin heat_bath_spin(double h, double beta, Engine& rng) noexcept {
  return heat_bath_outcome(h, beta, uniform_unit(rng));
}

inline void update_site(MarketState& state, const SimConfig& config, std::size_t k, std::size_t site,
                        Engine& rng) {
  const double h = local_field(state, config, k, site);
  state.set_spin_unchecked(k, site, heat_bath_spin(h, config.beta, rng));
}

namespace detail {

/// Sweep that evaluates every field through FieldModel. Reference for the
/// fast kernel and the route taken when its rounding bound does not hold.
inline void sweep_by_field(MarketState& state, const SimConfig& config, std::span<Engine> streams) {
  const FieldModel model(config);
  const std::size_t L = state.side_length();
  const std::size_t n = state.sites();
  const std::size_t stocks = state.stocks();
  for (std::size_t round = 0; round < n; ++round) {
    for (std::size_t k = 0; k < stocks; ++k) {
      const auto [cell, u] = uniform_cell_and_unit(streams[k], L);
      const double h = model.field(state, k, cell.row, cell.col);
      state.set_spin_unchecked(k, cell.row * L + cell.col, heat_bath_outcome(h, config.beta, u));
    }
  }
}

// Table coordinates x = (2 beta h - z_min) * per_unit written as one affine
// form in the neighbor sum and the stock sums, with the sums held locally as
// doubles. x differs from the mapped FieldModel value only by rounding, which
// the table margin absorbs while every term stays below table_term_bound.
inline constexpr double table_term_bound = 1 << 20;

struct TableForm {
  double neighbor = 0.0;
  double offset = 0.0;
  double own = 0.0;
  std::vector<double> cross;  // row k: weight of stock j's sum
  bool exact_enough = false;

  TableForm(const FieldModel& model, const SimConfig& config) : cross(config.K * config.K, 0.0) {
    const double unit = 2.0 * config.beta * LogisticBracket::per_unit;
    const double sites = static_cast<double>(config.sites());
    neighbor = unit * model.coupling();
    offset = -LogisticBracket::z_min * LogisticBracket::per_unit;
    own = unit * model.feedback();
    double bound = std::abs(neighbor) * 4 + offset + std::abs(own) * sites;
    for (std::size_t k = 0; k < config.K; ++k)
      for (std::size_t j = 0; j < config.K; ++j) {
        cross[k * config.K + j] = unit * model.cross(j, k);
        bound += std::abs(cross[k * config.K + j]) * sites;
      }
    exact_enough = bound < table_term_bound;
  }
};

template <std::size_t FixedStocks>
void sweep_in_table_units(MarketState& state, const SimConfig& config, const FieldModel& model,
                          const TableForm& form, std::span<Engine> streams) {
  const std::size_t stocks = FixedStocks ? FixedStocks : state.stocks();
  const std::size_t L = state.side_length();
  const std::size_t n = state.sites();
  const LogisticBracket& table = LogisticBracket::instance();
  // Local copies whose addresses never escape, so the int8 spin stores cannot
  // alias them and the sums stay in registers.
  using Buffer = std::conditional_t<FixedStocks != 0, std::array<double, FixedStocks * FixedStocks>,
                                    std::vector<double>>;
  Buffer sums{}, weights{};
  if constexpr (FixedStocks == 0) {
    sums.resize(stocks);
    weights.resize(stocks * stocks);
  }
  for (std::size_t k = 0; k < stocks; ++k) sums[k] = static_cast<double>(state.grid(k).sum());
  for (std::size_t i = 0; i < stocks * stocks; ++i) weights[i] = form.cross[i];

  for (std::size_t round = 0; round < n; ++round) {
    for (std::size_t k = 0; k < stocks; ++k) {
      const auto [cell, u] = uniform_cell_and_unit(streams[k], L);
      const SpinGrid& grid = state.grid(k);
      const std::size_t site = cell.row * L + cell.col;
      const int s = grid[site];
      double x = form.neighbor * grid.neighbor_sum(cell.row, cell.col) + form.offset -
                 (form.own * s) * std::abs(sums[k]);
      for (std::size_t j = 0; j < stocks; ++j)
        if (j != k) x += weights[k * stocks + j] * sums[j];
      int value = table.decide_x(x, u);
      if (value == 0) {
        const double h = model.field(state, k, cell.row, cell.col);
        value = u < update_probability(h, config.beta) ? 1 : -1;
      }
      state.set_spin_unchecked(k, site, static_cast<Spin>(value));
      sums[k] += static_cast<double>(value - s);
    }
  }
}

}  // namespace detail

/// One model time step: N = L^2 rounds, each updating one uniformly chosen
/// site (with replacement) of stock 1, then stock 2, ..., then stock K.
/// Each single-site update of stock k consumes exactly one draw of
/// streams[k], which supplies both the site and the acceptance variate, so
/// with zero coupling each stock evolves exactly as it would alone.
/// Decisions are those of heat_bath_outcome on the FieldModel field.
inline void sweep(MarketState& state, const SimConfig& config, std::span<Engine> streams) {
  const FieldModel model(config);
  const detail::TableForm form(model, config);
  if (!form.exact_enough) {
    detail::sweep_by_field(state, config, streams);
  } else if (state.stocks() == 2) {
    detail::sweep_in_table_units<2>(state, config, model, form, streams);
  } else if (state.stocks() == 1) {
    detail::sweep_in_table_units<1>(state, config, model, form, streams);
  } else {
    detail::sweep_in_table_units<0>(state, config, model, form, streams);
  }
  state.advance_clock();
}

}  // namespace ising_market

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ising_market/config.hpp"
#include "ising_market/dynamics.hpp"
#include "ising_market/observables.hpp"
#include "ising_market/random.hpp"

namespace ising_market {

inline constexpr std::size_t default_max_lag = 100;

/// Runs the full protocol: random initial spins, `thermalization_sweeps`
/// silent sweeps, then `measurement_sweeps` sweeps each emitting one
/// SeriesRecord to `sink` (t counts measured sweeps from 0). Stock k uses the
/// stream make_stream(config.seed, k) for both its initial spins and its
/// updates, so (config) alone fixes every output. Exceptions thrown by the
/// sink propagate.
template <typename Sink>
SummaryStats run_simulation(const SimConfig& config, Sink&& sink, std::size_t max_lag = default_max_lag) {
  validate(config);
  if (config.measurement_sweeps < max_lag + 2) {
    throw ValidationError("measurement_sweeps must be at least max_lag + 2 = " + std::to_string(max_lag + 2));
  }

  std::vector<Engine> streams = make_streams(config.seed, config.K);
  MarketState state = random_state(config, streams);
  for (std::uint64_t i = 0; i < config.thermalization_sweeps; ++i) sweep(state, config, streams);

  SeriesAccumulator acc(config.K);
  SeriesRecord record;
  std::vector<double> previous;
  for (std::uint64_t i = 0; i < config.measurement_sweeps; ++i) {
    sweep(state, config, streams);
    record.t = i;
    record.magnetizations.resize(config.K);
    for (std::size_t k = 0; k < config.K; ++k) record.magnetizations[k] = state.magnetization(k);
    record.returns.clear();
    if (!previous.empty()) {
      for (std::size_t k = 0; k < config.K; ++k) {
        record.returns.push_back((record.magnetizations[k] - previous[k]) / 2.0);
      }
    }
    acc.add(record);
    sink(std::as_const(record));
    previous = record.magnetizations;
  }
  return acc.finish(max_lag);
}

inline SummaryStats run_simulation(const SimConfig& config, std::size_t max_lag = default_max_lag) {
  return run_simulation(config, [](const SeriesRecord&) {}, max_lag);
}

}  // namespace ising_market

#include <catch_amalgamated.hpp>

#include <sstream>
#include <stdexcept>

#include "ising_market/csv.hpp"
#include "ising_market/simulation.hpp"

using namespace ising_market;

namespace {

SimConfig small(std::uint64_t seed = 1) {
  SimConfig c;
  c.L = 8;
  c.K = 2;
  c.gamma = GammaMatrix::uniform(2, 0.1);
  c.thermalization_sweeps = 20;
  c.measurement_sweeps = 100;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("measurement sweeps give one record each and one fewer return") {
  std::vector<SeriesRecord> records;
  const SummaryStats s = run_simulation(small(), [&](const SeriesRecord& r) { records.push_back(r); }, 10);
  REQUIRE(records.size() == 100);
  CHECK_FALSE(records.front().has_returns());
  std::size_t with_returns = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].t == i);
    CHECK(records[i].magnetizations.size() == 2);
    if (records[i].has_returns()) ++with_returns;
  }
  CHECK(with_returns == 99);
  CHECK(s.samples == 99);
  CHECK(s.max_lag == 10);
}

TEST_CASE("returns are half the magnetization increments of consecutive records") {
  std::vector<SeriesRecord> records;
  run_simulation(small(4), [&](const SeriesRecord& r) { records.push_back(r); }, 10);
  for (std::size_t i = 1; i < records.size(); ++i)
    for (std::size_t k = 0; k < 2; ++k) {
      REQUIRE(records[i].returns[k] == (records[i].magnetizations[k] - records[i - 1].magnetizations[k]) / 2.0);
      REQUIRE(std::abs(records[i].magnetizations[k]) <= 1.0);
    }
}

TEST_CASE("a configuration fixes the series CSV byte for byte") {
  auto csv = [](const SimConfig& c) {
    std::ostringstream os;
    SeriesCsvWriter w(os, c.K);
    run_simulation(c, w, 10);
    return os.str();
  };
  CHECK(csv(small(3)) == csv(small(3)));
  CHECK(csv(small(3)) != csv(small(5)));
}

TEST_CASE("exceptions from the sink propagate") {
  int calls = 0;
  auto sink = [&](const SeriesRecord& r) {
    ++calls;
    if (r.t == 5) throw std::runtime_error("sink full");
  };
  CHECK_THROWS_WITH(run_simulation(small(), sink, 10), "sink full");
  CHECK(calls == 6);
}

TEST_CASE("invalid configurations fail before any record is produced") {
  int calls = 0;
  auto sink = [&](const SeriesRecord&) { ++calls; };
  SimConfig c = small();
  c.L = 1;
  CHECK_THROWS_AS(run_simulation(c, sink, 10), ValidationError);
  c = small();
  c.gamma(0, 0) = 0.3;
  CHECK_THROWS_AS(run_simulation(c, sink, 10), ValidationError);
  c = small();
  c.measurement_sweeps = 11;
  CHECK_THROWS_WITH(run_simulation(c, sink, 10), Catch::Matchers::ContainsSubstring("max_lag + 2"));
  CHECK(calls == 0);
}

TEST_CASE("online statistics equal those recomputed from the stored CSV") {
  std::ostringstream os;
  SeriesCsvWriter w(os, 2);
  const SummaryStats online = run_simulation(small(8), w, 20);
  std::istringstream is(os.str());
  CHECK(summarize(read_series_csv(is), 20) == online);
}

TEST_CASE("without coupling a stock follows its single-stock run exactly") {
  SimConfig pair = small(11);
  pair.gamma = GammaMatrix(2);
  SimConfig solo = pair;
  solo.K = 1;
  solo.gamma = GammaMatrix(1);

  std::vector<double> from_pair, from_solo;
  run_simulation(pair, [&](const SeriesRecord& r) { from_pair.push_back(r.magnetizations[0]); }, 10);
  run_simulation(solo, [&](const SeriesRecord& r) { from_solo.push_back(r.magnetizations[0]); }, 10);
  CHECK(from_pair == from_solo);
}

TEST_CASE("total normalization reports raw sums") {
  SimConfig c = small(2);
  c.normalization = NormalizationMode::total;
  c.alpha = 30.0 * 64;
  std::vector<SeriesRecord> records;
  run_simulation(c, [&](const SeriesRecord& r) { records.push_back(r); }, 10);
  for (const auto& r : records)
    for (double m : r.magnetizations) {
      REQUIRE(m == std::round(m));
      REQUIRE(std::abs(m) <= 64.0);
      REQUIRE(static_cast<long>(m) % 2 == 0);
    }
}

TEST_CASE("total normalization with rescaled couplings matches per-site dynamics") {
  // alpha / N and gamma / N in total mode give the per-site fields exactly.
  SimConfig per_site = small(6);
  SimConfig total = per_site;
  total.normalization = NormalizationMode::total;
  total.alpha = per_site.alpha / 64.0;
  total.gamma = GammaMatrix::uniform(2, 0.1 / 64.0);
  std::vector<double> a, b;
  run_simulation(per_site, [&](const SeriesRecord& r) { a.push_back(r.magnetizations[1] * 64.0); }, 10);
  run_simulation(total, [&](const SeriesRecord& r) { b.push_back(r.magnetizations[1]); }, 10);
  CHECK(a == b);
}

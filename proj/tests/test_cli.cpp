#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "ising_market/commands.hpp"

using namespace ising_market;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::StartsWith;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

class Workspace {
public:
  Workspace() : root_(fs::temp_directory_path() / ("ising_market_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(root_);
    fs::create_directories(root_);
    write_text_file(root_ / "small.cfg",
                    "L = 8\nK = 2\nthermalization_sweeps = 10\nmeasurement_sweeps = 150\ngamma = 0.05\n");
  }
  ~Workspace() { fs::remove_all(root_); }

  const fs::path& root() const { return root_; }
  fs::path operator/(const std::string& p) const { return root_ / p; }

  Result run(const std::string& args) const {
    const fs::path out = root_ / "stdout.txt";
    const fs::path err = root_ / "stderr.txt";
    const std::string cmd = std::string("\"") + ISING_MARKET_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text_file(out);
    r.err = read_text_file(err);
    return r;
  }

private:
  fs::path root_;
};

std::string cfg(const Workspace& w) { return "--config \"" + (w / "small.cfg").string() + "\""; }

}  // namespace

TEST_CASE("simulate without --out is a usage error") {
  Workspace w;
  const Result r = w.run("simulate --seed 1 " + cfg(w));
  CHECK(r.code == 1);
  CHECK_THAT(r.err, StartsWith("error["));
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("no subcommand is a usage error and --help succeeds") {
  Workspace w;
  CHECK(w.run("").code == 1);
  CHECK(w.run("--help").code == 0);
  CHECK_THAT(w.run("--version").out, ContainsSubstring("ising-market"));
}

TEST_CASE("simulate writes series, summary, tables and manifest") {
  Workspace w;
  const Result r = w.run("simulate " + cfg(w) + " --seed 5 --max-lag 20 --out \"" + (w / "a").string() + "\"");
  REQUIRE(r.code == 0);
  for (const char* f : {"series.csv", "summary.csv", "autocorrelation.csv", "moments.csv", "manifest.txt"})
    CHECK(fs::exists(w / "a" / f));
  const auto records = read_series_csv(w / "a" / "series.csv");
  CHECK(records.size() == 150);
  const RunManifest m = parse_manifest(read_text_file(w / "a" / "manifest.txt"));
  CHECK(m.config.seed == 5);
  CHECK(m.config.L == 8);
  CHECK(m.config.gamma == GammaMatrix::uniform(2, 0.05));
  CHECK(m.series_path == (w / "a" / "series.csv").string());
  CHECK_THAT(m.started_at, ContainsSubstring("T"));
  CHECK_THAT(r.out, StartsWith("gamma,seed,cc_12,kurtosis_1,kurtosis_2\n0.050000000000000003,5,"));
}

TEST_CASE("repeated runs produce identical series files") {
  Workspace w;
  REQUIRE(w.run("simulate " + cfg(w) + " --seed 9 --max-lag 10 --out \"" + (w / "x").string() + "\"").code == 0);
  REQUIRE(w.run("simulate " + cfg(w) + " --seed 9 --max-lag 10 --out \"" + (w / "y").string() + "\"").code == 0);
  CHECK(read_text_file(w / "x" / "series.csv") == read_text_file(w / "y" / "series.csv"));
  CHECK(read_text_file(w / "x" / "summary.csv") == read_text_file(w / "y" / "summary.csv"));
}

TEST_CASE("--gamma overrides the configuration") {
  Workspace w;
  REQUIRE(w.run("simulate " + cfg(w) + " --seed 2 --gamma 0.15 --max-lag 10 --out \"" + (w / "g").string() + "\"")
              .code == 0);
  const RunManifest m = parse_manifest(read_text_file(w / "g" / "manifest.txt"));
  CHECK(m.config.gamma == GammaMatrix::uniform(2, 0.15));
}

TEST_CASE("analyze reproduces the simulate statistics exactly") {
  Workspace w;
  const Result sim = w.run("simulate " + cfg(w) + " --seed 3 --max-lag 25 --out \"" + (w / "s").string() + "\"");
  REQUIRE(sim.code == 0);
  const Result an = w.run("analyze --input \"" + (w / "s" / "series.csv").string() + "\" --max-lag 25 --out \"" +
                          (w / "re").string() + "\"");
  REQUIRE(an.code == 0);
  CHECK(an.out == sim.out);
  for (const char* f : {"summary.csv", "autocorrelation.csv", "moments.csv"})
    CHECK(read_text_file(w / "re" / f) == read_text_file(w / "s" / f));
}

TEST_CASE("analyze reports malformed input and oversized lags") {
  Workspace w;
  write_text_file(w / "cut.csv", "t,M_1,r_1\n0,0.5,\n1,0.25,-0.1");
  Result r = w.run("analyze --input \"" + (w / "cut.csv").string() + "\"");
  CHECK(r.code == 1);
  CHECK_THAT(r.err, StartsWith("error[validation]:"));
  CHECK_THAT(r.err, ContainsSubstring("line 3"));

  REQUIRE(w.run("simulate " + cfg(w) + " --seed 1 --max-lag 10 --out \"" + (w / "s").string() + "\"").code == 0);
  r = w.run("analyze --input \"" + (w / "s" / "series.csv").string() + "\" --max-lag 149");
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("--max-lag"));

  r = w.run("analyze --input \"" + (w / "nope.csv").string() + "\"");
  CHECK(r.code == 2);
  CHECK_THAT(r.err, StartsWith("error[io]:"));
}

TEST_CASE("invalid configuration files are validation errors") {
  Workspace w;
  write_text_file(w / "bad.cfg", "L = 8\ngamma = 0.5, 0.1; 0.1, 0\n");
  const Result r =
      w.run("simulate --config \"" + (w / "bad.cfg").string() + "\" --seed 1 --out \"" + (w / "b").string() + "\"");
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("gamma diagonal must be zero"));
  CHECK_FALSE(fs::exists(w / "b"));
}

TEST_CASE("an unwritable output location is an I/O error") {
  Workspace w;
  write_text_file(w / "file", "x");
  const Result r = w.run("simulate " + cfg(w) + " --seed 1 --max-lag 10 --out \"" + (w / "file" / "sub").string() + "\"");
  CHECK(r.code == 2);
  CHECK_THAT(r.err, StartsWith("error[io]:"));
}

TEST_CASE("sweep tabulates every gamma once") {
  Workspace w;
  const Result r = w.run("sweep " + cfg(w) + " --gamma-list 0,0.05,0.07,0.05,0.1,0.15 --seeds 4 --max-lag 10 --out \"" +
                         (w / "grid").string() + "\"");
  REQUIRE(r.code == 0);
  CHECK_THAT(r.err, ContainsSubstring("warning: duplicate gamma 0.050000000000000003 ignored"));

  const std::string table = read_text_file(w / "grid" / "sweep_table.csv");
  CHECK(table == r.out);
  CHECK(std::count(table.begin(), table.end(), '\n') == 6);
  CHECK_THAT(table, StartsWith("gamma,runs,mean_cc,stderr_cc\n0,4,"));
  // Four seeds per gamma give a finite standard error on every row.
  std::istringstream rows(table);
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    CHECK(line.back() != ',');
    CHECK_THAT(line, ContainsSubstring(",4,"));
  }
  const std::string summary = read_text_file(w / "grid" / "sweep_summary.csv");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 21);
  CHECK(fs::exists(w / "grid" / "cells" / "gamma_0.14999999999999999_seed_3" / "manifest.txt"));
  CHECK_FALSE(fs::exists(w / "grid" / "cells" / "gamma_0_seed_0" / "series.csv"));
}

TEST_CASE("sweep with a single seed leaves the standard error empty") {
  Workspace w;
  const Result r =
      w.run("sweep " + cfg(w) + " --gamma-list 0.1 --max-lag 10 --keep-series --out \"" + (w / "one").string() + "\"");
  REQUIRE(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("\n0.10000000000000001,1,"));
  CHECK(r.out.back() == '\n');
  CHECK(r.out[r.out.size() - 2] == ',');
  CHECK(fs::exists(w / "one" / "cells" / "gamma_0.10000000000000001_seed_0" / "series.csv"));
}

TEST_CASE("sweep rejects an empty gamma list") {
  Workspace w;
  const Result r = w.run("sweep " + cfg(w) + " --gamma-list , --out \"" + (w / "e").string() + "\"");
  CHECK(r.code == 1);
  CHECK_THAT(r.err, StartsWith("error["));
}

TEST_CASE("aggregate uses the sample standard error") {
  std::vector<commands::SweepCell> cells;
  for (double cc : {0.1, 0.2, 0.3, 0.4}) {
    SummaryStats s;
    s.stocks = 2;
    s.cross_correlation = {{1.0, cc}, {cc, 1.0}};
    cells.push_back({0.15, 0, s});
  }
  const auto rows = commands::aggregate(cells, {0.15});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].runs == 4);
  CHECK_THAT(rows[0].mean_cc, Catch::Matchers::WithinAbs(0.25, 1e-15));
  // sample sd of {0.1, ..., 0.4} is sqrt(0.05 / 3); divided by sqrt(4).
  CHECK_THAT(rows[0].stderr_cc, Catch::Matchers::WithinAbs(std::sqrt(0.05 / 3.0) / 2.0, 1e-15));
}

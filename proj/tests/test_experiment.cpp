#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aims_bench/experiment.hpp"
#include "helpers.hpp"

using namespace aims;

namespace {

const char* kSmallConfig = R"(
[workload]
n = 40
alpha = 4
beta = 0.3
num_accounts = 480
initial_balance = 1000000
arrival_rate = 10
num_tenants = 3

[sweep]
m = 0,2,4
delta_ms = 200,400
partitions = 1,2,3
seeds = 1,2,3,4,5
trials = 30
)";

}  // namespace

TEST_CASE("minimal config fills defaults") {
  std::istringstream in(R"(
[workload]
n = 10
alpha = 3
beta = 0.2
num_accounts = 120

[sweep]
m = 1
delta_ms = 100
partitions = 1
seeds = 1
)");
  const ExperimentConfig cfg = parse_config(in);
  CHECK(cfg.base_commit_ms == 5);
  CHECK(cfg.arrival_mode == ArrivalMode::Fixed);
  CHECK(cfg.trials == 1000);
  CHECK(cfg.workload.initial_balance == 1'000'000);
  CHECK(cfg.synthetic.delay_lo == 10);
  CHECK(cfg.synthetic.delay_hi == 100);
}

TEST_CASE("empty sweep lists are rejected with their key path") {
  std::istringstream in(R"(
[workload]
n = 10
alpha = 3
beta = 0.2
num_accounts = 120

[sweep]
m =
delta_ms = 100
partitions = 1
seeds = 1
)");
  try {
    parse_config(in);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    bool mentions_m = false;
    for (const auto& issue : e.issues) {
      if (issue.find("sweep.m") != std::string::npos) mentions_m = true;
    }
    CHECK(mentions_m);
  }
}

TEST_CASE("unknown keys are rejected") {
  std::istringstream in(R"(
[workload]
n = 10
alpha = 3
beta = 0.2
num_accounts = 120
warp_speed = 9

[sweep]
m = 1
delta_ms = 100
partitions = 1
seeds = 1
)");
  CHECK_THROWS_AS(parse_config(in), ConfigError);
}

TEST_CASE("paper-table2 preset fills the benchmark defaults") {
  std::istringstream in(R"(
[workload]
preset = paper-table2

[sweep]
m = 100
delta_ms = 500
partitions = 1
seeds = 1
)");
  const ExperimentConfig cfg = parse_config(in);
  CHECK(cfg.workload.n == 5000);
  CHECK(cfg.workload.arrival_rate == 10.0);
  CHECK(cfg.workload.alpha == 10);
  CHECK(cfg.workload.beta == 0.5);
}

TEST_CASE("matrix produces one row per cell, deterministically") {
  std::istringstream in(kSmallConfig);
  const ExperimentConfig cfg = parse_config(in);
  const auto rows = run_matrix(cfg);
  REQUIRE(rows.size() == 3u * 2u * 3u * 5u);

  for (const auto& r : rows) {
    CHECK(!r.failed);
    if (r.m == 0) {
      CHECK(r.metrics.affected_count == 0);
      CHECK(r.metrics.episodes == 0);
    }
    CHECK(r.metrics.episodes <= r.m);
  }

  std::istringstream again(kSmallConfig);
  const auto rows2 = run_matrix(parse_config(again));
  CHECK(rows_to_csv(rows) == rows_to_csv(rows2));
}

TEST_CASE("csv round-trips through the fixed schema") {
  std::istringstream in(kSmallConfig);
  ExperimentConfig cfg = parse_config(in);
  cfg.sweep_m = {2};
  cfg.sweep_delta_ms = {200};
  cfg.sweep_partitions = {2};
  cfg.seeds = {1, 2};
  const auto rows = run_matrix(cfg);
  const std::string csv = rows_to_csv(rows);
  CHECK(csv.rfind("m,delta_ms,partitions,seed,affected,", 0) == 0);
  std::istringstream csv_in(csv);
  const auto parsed = rows_from_csv(csv_in);
  REQUIRE(parsed.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(parsed[i].m == rows[i].m);
    CHECK(parsed[i].seed == rows[i].seed);
    CHECK(parsed[i].metrics.affected_count == rows[i].metrics.affected_count);
  }
}

TEST_CASE("plot data aggregates over seeds") {
  std::istringstream in(kSmallConfig);
  const ExperimentConfig cfg = parse_config(in);
  const auto rows = run_matrix(cfg);
  const std::string dir = (std::filesystem::temp_directory_path() / "aims_plot_test").string();
  const auto files = emit_plotdata(rows, "m", dir);
  REQUIRE(files.size() == 3);
  for (const auto& f : files) {
    std::ifstream check(f);
    REQUIRE(check.good());
    std::string line;
    std::getline(check, line);  // header comment
    std::size_t points = 0;
    while (std::getline(check, line)) {
      if (!line.empty()) ++points;
    }
    CHECK(points == 3u * 2u * 3u);  // (m values) x (delta, partitions) series
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("plot means and stderr match hand arithmetic") {
  std::vector<CsvRow> rows(2);
  rows[0].m = 100;
  rows[0].delta_ms = 500;
  rows[0].partitions = 10;
  rows[0].seed = 1;
  rows[0].metrics.affected_count = 10;
  rows[0].metrics.avg_recovery_ms = 30.0;
  rows[0].metrics.avg_response_ms = 7.0;
  rows[1] = rows[0];
  rows[1].seed = 2;
  rows[1].metrics.affected_count = 14;

  const std::string dir = (std::filesystem::temp_directory_path() / "aims_plot_mean").string();
  const auto files = emit_plotdata(rows, "m", dir);
  std::ifstream affected(files[0]);
  std::string header, data;
  std::getline(affected, header);
  std::getline(affected, data);
  // mean 12, sample sd sqrt(8) = 2.828..., stderr = 2
  CHECK(data == "100 delta500_p10 12 2");
  std::filesystem::remove_all(dir);

  // single seed -> stderr 0
  const std::string dir2 = (std::filesystem::temp_directory_path() / "aims_plot_one").string();
  const auto files2 = emit_plotdata({rows[0]}, "m", dir2);
  std::ifstream one(files2[0]);
  std::getline(one, header);
  std::getline(one, data);
  CHECK(data == "100 delta500_p10 10 0");
  std::filesystem::remove_all(dir2);
}

TEST_CASE("empty plot input is an error") {
  CHECK_THROWS_AS(emit_plotdata({}, "m", "."), Error);
}

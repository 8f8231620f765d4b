#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aims_bench/partition.hpp"
#include "aims_bench/sim.hpp"
#include "aims_bench/workload.hpp"

namespace aims {

// Synthetic store-graph parameters used when no graph file is given. One
// graph is derived per (store count, seed) cell.
struct SyntheticStores {
  TimeMs delay_lo = 10;
  TimeMs delay_hi = 100;
  double cap_factor = 2.0;  // capacity = ceil(cap_factor * objects / stores)
};

struct ExperimentConfig {
  WorkloadSpec workload;     // m is overridden per sweep cell
  ArrivalMode arrival_mode = ArrivalMode::Fixed;
  std::optional<std::string> stores_file;
  SyntheticStores synthetic;
  TimeMs base_commit_ms = 5;
  std::int64_t event_cap = 20'000'000;
  std::vector<std::int32_t> sweep_m;
  std::vector<TimeMs> sweep_delta_ms;
  std::vector<std::int32_t> sweep_partitions;
  std::vector<std::uint64_t> seeds;
  std::int64_t trials = 1000;
  std::string out_dir = ".";
};

// Parses the key=value text config with [section] headers. Unknown sections
// or keys are rejected; all issues are reported together via ConfigError
// with section.key paths.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

struct CsvRow {
  std::int32_t m = 0;
  TimeMs delta_ms = 0;
  std::int32_t partitions = 0;
  std::uint64_t seed = 0;
  Metrics metrics;
  bool failed = false;
  std::string error;

  bool operator==(const CsvRow&) const = default;
};

inline constexpr const char* kCsvHeader =
    "m,delta_ms,partitions,seed,affected,avg_recovery_ms,avg_response_ms,episodes,blocked,"
    "plan_objective";

// One cell per (m, delta, partitions, seed): generate the workload, search a
// plan (partitions=1 is the unpartitioned baseline and skips the
// distribution constraint), simulate, compute metrics. Failed cells are
// carried in the row list; remaining cells still run.
std::vector<CsvRow> run_matrix(const ExperimentConfig& cfg);

std::string rows_to_csv(const std::vector<CsvRow>& rows);
std::vector<CsvRow> rows_from_csv(std::istream& in);

// Per-metric plot data: for each (x, series) cell, the seed-mean and
// standard error. `dimension` names the x column: "m" or "delta_ms"; the
// series label joins the remaining sweep dimensions. Returns the file names
// written under out_dir (affected.dat, avg_recovery_ms.dat,
// avg_response_ms.dat).
std::vector<std::string> emit_plotdata(const std::vector<CsvRow>& rows,
                                       const std::string& dimension, const std::string& out_dir);

}  // namespace aims

#include "aims_bench/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>

#include "aims_bench/rng.hpp"

namespace aims {

namespace {

struct ConfigReader {
  std::map<std::string, std::string> values;  // "section.key" -> raw value
  std::vector<std::string> issues;

  bool take(const std::string& path, std::string& out) {
    const auto it = values.find(path);
    if (it == values.end()) return false;
    out = it->second;
    values.erase(it);
    return true;
  }

  template <typename T>
  void take_number(const std::string& path, T& out) {
    std::string raw;
    if (!take(path, raw)) return;
    if constexpr (std::is_floating_point_v<T>) {
      double v = 0;
      const char* b = raw.data();
      auto [p, ec] = std::from_chars(b, b + raw.size(), v);
      if (ec != std::errc{} || p != b + raw.size()) {
        issues.push_back(path + ": not a number: '" + raw + "'");
        return;
      }
      out = static_cast<T>(v);
    } else {
      std::int64_t v = 0;
      const char* b = raw.data();
      auto [p, ec] = std::from_chars(b, b + raw.size(), v);
      if (ec != std::errc{} || p != b + raw.size()) {
        issues.push_back(path + ": not an integer: '" + raw + "'");
        return;
      }
      out = static_cast<T>(v);
    }
  }

  template <typename T>
  void take_list(const std::string& path, std::vector<T>& out) {
    std::string raw;
    if (!take(path, raw)) return;
    out.clear();
    std::size_t start = 0;
    while (start <= raw.size()) {
      const std::size_t pos = raw.find(',', start);
      const std::string item = raw.substr(start, pos - start);
      std::int64_t v = 0;
      const char* b = item.data();
      auto [p, ec] = std::from_chars(b, b + item.size(), v);
      if (ec != std::errc{} || p != b + item.size()) {
        issues.push_back(path + ": bad list item '" + item + "'");
        return;
      }
      out.push_back(static_cast<T>(v));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  }
};

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ConfigReader reader;
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t");
    const auto e = line.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    line = line.substr(b, e - b + 1);
    if (line.front() == '[') {
      if (line.back() != ']') {
        reader.issues.push_back("line " + std::to_string(lineno) + ": unterminated section header");
        continue;
      }
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      reader.issues.push_back("line " + std::to_string(lineno) + ": expected key=value");
      continue;
    }
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto strip = [](std::string& s) {
      const auto sb = s.find_first_not_of(" \t");
      const auto se = s.find_last_not_of(" \t");
      s = sb == std::string::npos ? "" : s.substr(sb, se - sb + 1);
    };
    strip(key);
    strip(val);
    if (section.empty()) {
      reader.issues.push_back("line " + std::to_string(lineno) + ": key outside any [section]");
      continue;
    }
    if (!reader.values.emplace(section + "." + key, val).second) {
      reader.issues.push_back(section + "." + key + ": duplicate key");
    }
  }

  ExperimentConfig cfg;

  std::string preset;
  if (reader.take("workload.preset", preset)) {
    if (preset == "paper-table2") {
      cfg.workload = table2_spec();
    } else {
      reader.issues.push_back("workload.preset: unknown preset '" + preset + "'");
    }
  }
  reader.take_number("workload.n", cfg.workload.n);
  reader.take_number("workload.alpha", cfg.workload.alpha);
  reader.take_number("workload.beta", cfg.workload.beta);
  reader.take_number("workload.num_accounts", cfg.workload.num_accounts);
  reader.take_number("workload.initial_balance", cfg.workload.initial_balance);
  reader.take_number("workload.arrival_rate", cfg.workload.arrival_rate);
  reader.take_number("workload.num_tenants", cfg.workload.num_tenants);

  std::string mode;
  if (reader.take("sim.arrival_mode", mode)) {
    if (mode == "fixed") {
      cfg.arrival_mode = ArrivalMode::Fixed;
    } else if (mode == "poisson") {
      cfg.arrival_mode = ArrivalMode::Poisson;
    } else {
      reader.issues.push_back("sim.arrival_mode: expected fixed or poisson, got '" + mode + "'");
    }
  }
  reader.take_number("sim.base_commit_ms", cfg.base_commit_ms);
  reader.take_number("sim.event_cap", cfg.event_cap);
  TimeMs sim_delta = -1;
  reader.take_number("sim.delta_ms", sim_delta);

  std::string stores_file;
  if (reader.take("stores.file", stores_file)) cfg.stores_file = stores_file;
  reader.take_number("stores.delay_lo", cfg.synthetic.delay_lo);
  reader.take_number("stores.delay_hi", cfg.synthetic.delay_hi);
  reader.take_number("stores.cap_factor", cfg.synthetic.cap_factor);

  reader.take_list("sweep.m", cfg.sweep_m);
  reader.take_list("sweep.delta_ms", cfg.sweep_delta_ms);
  reader.take_list("sweep.partitions", cfg.sweep_partitions);
  reader.take_list("sweep.seeds", cfg.seeds);
  reader.take_number("sweep.trials", cfg.trials);

  std::string out_dir;
  if (reader.take("out.dir", out_dir)) cfg.out_dir = out_dir;

  for (const auto& [path, value] : reader.values) {
    reader.issues.push_back(path + ": unknown key");
  }

  if (cfg.sweep_delta_ms.empty() && sim_delta >= 0) {
    cfg.sweep_delta_ms = {sim_delta};  // fixed detection delay, no sweep
  }
  if (cfg.sweep_m.empty()) reader.issues.push_back("sweep.m: sweep list must not be empty");
  if (cfg.sweep_delta_ms.empty()) {
    reader.issues.push_back("sweep.delta_ms: sweep list must not be empty");
  }
  if (cfg.sweep_partitions.empty()) {
    reader.issues.push_back("sweep.partitions: sweep list must not be empty");
  }
  if (cfg.seeds.empty()) reader.issues.push_back("sweep.seeds: sweep list must not be empty");
  {
    auto sorted = cfg.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      reader.issues.push_back("sweep.seeds: seeds must be distinct");
    }
  }
  if (cfg.trials < 1) reader.issues.push_back("sweep.trials: must be >= 1");
  for (const auto m : cfg.sweep_m) {
    if (m < 0 || m > cfg.workload.n) {
      reader.issues.push_back("sweep.m: " + std::to_string(m) + " outside [0, n]");
    }
  }
  for (const auto d : cfg.sweep_delta_ms) {
    if (d < 0) reader.issues.push_back("sweep.delta_ms: must be >= 0");
  }
  for (const auto p : cfg.sweep_partitions) {
    if (p < 1) reader.issues.push_back("sweep.partitions: must be >= 1");
  }
  if (reader.issues.empty()) {
    try {
      WorkloadSpec probe = cfg.workload;
      probe.m = cfg.sweep_m.front();
      probe.validate();
    } catch (const InvalidSpec& e) {
      reader.issues.push_back(std::string("workload: ") + e.what());
    }
  }

  if (!reader.issues.empty()) throw ConfigError(reader.issues);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return parse_config(in);
}

namespace {

StoreGraph graph_for_cell(const ExperimentConfig& cfg, std::int32_t partitions,
                          std::uint64_t seed) {
  if (cfg.stores_file) {
    StoreGraph g = read_store_graph_file(*cfg.stores_file);
    if (g.store_count() != partitions) {
      throw Error("stores file has " + std::to_string(g.store_count()) +
                  " stores but the cell asks for " + std::to_string(partitions));
    }
    return g;
  }
  const auto cap = static_cast<std::int64_t>(
      std::ceil(cfg.synthetic.cap_factor * static_cast<double>(cfg.workload.num_accounts) /
                static_cast<double>(partitions)));
  return synthetic_store_graph(partitions, cfg.synthetic.delay_lo, cfg.synthetic.delay_hi,
                               std::max<std::int64_t>(cap, cfg.workload.num_accounts / partitions + 1),
                               derive_seed(seed, 0x9e3779b9 + static_cast<std::uint64_t>(partitions)));
}

}  // namespace

std::vector<CsvRow> run_matrix(const ExperimentConfig& cfg) {
  std::vector<CsvRow> rows;
  for (const auto m : cfg.sweep_m) {
    for (const auto delta : cfg.sweep_delta_ms) {
      for (const auto partitions : cfg.sweep_partitions) {
        for (const auto seed : cfg.seeds) {
          CsvRow row;
          row.m = m;
          row.delta_ms = delta;
          row.partitions = partitions;
          row.seed = seed;
          try {
            WorkloadSpec spec = cfg.workload;
            spec.m = m;
            const Workload w = generate_workload(spec, seed, cfg.arrival_mode);
            const StoreGraph g = graph_for_cell(cfg, partitions, seed);

            PartitionPlan plan;
            std::int64_t objective = 0;
            if (partitions == 1) {
              // Unpartitioned baseline: a single store cannot satisfy the
              // distribution constraint, so it runs with validation relaxed.
              plan = single_store_plan(spec.num_accounts);
              if (g.capacity(0) < spec.num_accounts) {
                throw InvalidPlan("single store lacks capacity for all objects");
              }
            } else {
              SearchResult found = randomized_search(w, g, cfg.trials, derive_seed(seed, 0x91a));
              plan = std::move(found.plan);
              objective = found.objective;
            }

            SimConfig sim_cfg;
            sim_cfg.delta_ms = delta;
            sim_cfg.base_commit_ms = cfg.base_commit_ms;
            sim_cfg.arrival_mode = cfg.arrival_mode;
            sim_cfg.event_cap = cfg.event_cap;
            const SimResult sim = run_simulation(w, plan, g, sim_cfg, seed);
            row.metrics = sim.metrics;
            row.metrics.plan_objective = objective;
          } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

namespace {

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << std::fixed << v;
  std::string s = ss.str();
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

std::string rows_to_csv(const std::vector<CsvRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.m) + "," + std::to_string(r.delta_ms) + "," +
           std::to_string(r.partitions) + "," + std::to_string(r.seed) + "," +
           std::to_string(r.metrics.affected_count) + "," + format_double(r.metrics.avg_recovery_ms) +
           "," + format_double(r.metrics.avg_response_ms) + "," +
           std::to_string(r.metrics.episodes) + "," + std::to_string(r.metrics.blocked_count) + "," +
           std::to_string(r.metrics.plan_objective) + "\n";
  }
  return out;
}

std::vector<CsvRow> rows_from_csv(std::istream& in) {
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != kCsvHeader) throw MalformedInput(1, "header", "unexpected CSV header");
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t pos = line.find(',', start);
      cells.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (cells.size() != 10) throw MalformedInput(lineno, "row", "expected 10 columns");
    CsvRow r;
    try {
      r.m = std::stoi(cells[0]);
      r.delta_ms = std::stoll(cells[1]);
      r.partitions = std::stoi(cells[2]);
      r.seed = std::stoull(cells[3]);
      r.metrics.affected_count = std::stoll(cells[4]);
      r.metrics.avg_recovery_ms = std::stod(cells[5]);
      r.metrics.avg_response_ms = std::stod(cells[6]);
      r.metrics.episodes = std::stoll(cells[7]);
      r.metrics.blocked_count = std::stoll(cells[8]);
      r.metrics.plan_objective = std::stoll(cells[9]);
    } catch (const std::exception&) {
      throw MalformedInput(lineno, "row", "bad numeric cell");
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<std::string> emit_plotdata(const std::vector<CsvRow>& rows,
                                       const std::string& dimension, const std::string& out_dir) {
  if (rows.empty()) throw Error("empty input: nothing to plot");
  if (dimension != "m" && dimension != "delta_ms") {
    throw Error("dimension must be m or delta_ms");
  }

  struct Key {
    std::int64_t x;
    std::string series;
    bool operator<(const Key& o) const {
      return x != o.x ? x < o.x : series < o.series;
    }
  };
  struct Acc {
    std::vector<double> affected, recovery, response;
  };
  std::map<Key, Acc> cells;
  for (const auto& r : rows) {
    if (r.failed) continue;
    Key k;
    if (dimension == "m") {
      k.x = r.m;
      k.series = "delta" + std::to_string(r.delta_ms) + "_p" + std::to_string(r.partitions);
    } else {
      k.x = r.delta_ms;
      k.series = "m" + std::to_string(r.m) + "_p" + std::to_string(r.partitions);
    }
    auto& acc = cells[k];
    acc.affected.push_back(static_cast<double>(r.metrics.affected_count));
    acc.recovery.push_back(r.metrics.avg_recovery_ms);
    acc.response.push_back(r.metrics.avg_response_ms);
  }
  if (cells.empty()) throw Error("empty input: all rows failed");

  auto mean_stderr = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) return std::pair<double, double>{mean, 0.0};
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return std::pair<double, double>{mean, sd / std::sqrt(static_cast<double>(v.size()))};
  };

  std::filesystem::create_directories(out_dir);
  const std::vector<std::pair<std::string, std::vector<double> Acc::*>> metrics = {
      {"affected.dat", &Acc::affected},
      {"avg_recovery_ms.dat", &Acc::recovery},
      {"avg_response_ms.dat", &Acc::response},
  };
  std::vector<std::string> written;
  for (const auto& [fname, member] : metrics) {
    const std::string path = out_dir + "/" + fname;
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "# " << dimension << " series mean stderr\n";
    for (const auto& [key, acc] : cells) {
      const auto [mean, se] = mean_stderr(acc.*member);
      out << key.x << ' ' << key.series << ' ' << format_double(mean) << ' ' << format_double(se)
          << "\n";
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace aims

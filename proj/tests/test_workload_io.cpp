#include <doctest.h>

#include <sstream>

#include "aims_bench/workload.hpp"
#include "helpers.hpp"

using namespace aims;

namespace {

Workload roundtrip(const Workload& w) {
  std::ostringstream out;
  write_workload(w, out);
  std::istringstream in(out.str());
  return read_workload(in);
}

std::string first_line_replaced(const Workload& w, std::size_t line_index,
                                const std::string& replacement) {
  std::ostringstream out;
  write_workload(w, out);
  std::istringstream in(out.str());
  std::string line, result;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    result += (i == line_index ? replacement : line);
    result += "\n";
    ++i;
  }
  return result;
}

}  // namespace

TEST_CASE("fraction formatting") {
  CHECK(fraction_to_string(500) == "0.05");
  CHECK(fraction_to_string(1000) == "0.1");
  CHECK(fraction_to_string(123) == "0.0123");
  CHECK(fraction_to_string(100) == "0.01");
}

TEST_CASE("generated workload round-trips exactly") {
  const Workload w = generate_workload(testutil::small_spec(60, 0.4, 3), 123);
  CHECK(roundtrip(w) == w);
}

TEST_CASE("poisson workload round-trips exactly") {
  const Workload w = generate_workload(testutil::small_spec(30, 0.2, 1), 5, ArrivalMode::Poisson);
  CHECK(roundtrip(w) == w);
}

TEST_CASE("empty workload round-trips") {
  WorkloadSpec spec = testutil::small_spec(0, 0.5);
  const Workload w = generate_workload(spec, 1);
  const Workload back = roundtrip(w);
  CHECK(back.spec.n == 0);
  CHECK(back.transactions.empty());
  CHECK(back == w);
}

TEST_CASE("missing header is rejected") {
  std::istringstream in("");
  CHECK_THROWS_AS(read_workload(in), MalformedInput);
}

TEST_CASE("overlapping sources and destinations are rejected with a location") {
  const Workload w = generate_workload(testutil::small_spec(3, 0.0), 9);
  const Transaction& t = w.transactions[0];
  // rebuild line 2 (first transaction) with dst containing a source account
  std::string bad = std::to_string(t.id) + " " + to_string(t.kind) + " src=";
  bad += std::to_string(t.sources[0]);
  for (std::size_t i = 1; i < t.sources.size(); ++i) bad += "," + std::to_string(t.sources[i]);
  bad += " dst=" + std::to_string(t.sources[0]);
  for (std::size_t i = 1; i < t.destinations.size(); ++i) {
    bad += "," + std::to_string(t.destinations[i]);
  }
  bad += " frac=";
  for (std::size_t i = 0; i < t.fraction_bp.size(); ++i) {
    if (i) bad += ",";
    bad += fraction_to_string(t.fraction_bp[i]);
  }
  bad += " tenant=T" + std::to_string(t.tenant) + " mal=0 at=" + std::to_string(t.arrival_time);
  std::istringstream in(first_line_replaced(w, 1, bad));
  try {
    read_workload(in);
    FAIL("expected MalformedInput");
  } catch (const MalformedInput& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("fraction outside the benchmark range is rejected") {
  const Workload w = generate_workload(testutil::small_spec(2, 0.0), 9);
  std::ostringstream out;
  write_workload(w, out);
  std::string text = out.str();
  const std::size_t pos = text.find("frac=0.");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 9, "frac=0.5,");  // 0.5 > 0.1
  std::istringstream in(text);
  CHECK_THROWS_AS(read_workload(in), MalformedInput);
}

TEST_CASE("malicious count must match the header") {
  Workload w = generate_workload(testutil::small_spec(4, 0.0, 2), 9);
  w.spec.m = 1;  // header lies
  std::ostringstream out;
  write_workload(w, out);
  std::istringstream in(out.str());
  CHECK_THROWS_AS(read_workload(in), MalformedInput);
}

TEST_CASE("unknown header keys are rejected") {
  std::istringstream in(
      "n=0 alpha=2 beta=0 num_accounts=3 initial_balance=100 arrival_rate=1 m=0 num_tenants=1 "
      "bogus=1\n");
  CHECK_THROWS_AS(read_workload(in), MalformedInput);
}

TEST_CASE("unknown kind is rejected") {
  const Workload w = generate_workload(testutil::small_spec(1, 0.0), 9);
  std::ostringstream out;
  write_workload(w, out);
  std::string text = out.str();
  const std::size_t nl = text.find('\n');
  std::string line2 = text.substr(nl + 1);
  const std::size_t sp1 = line2.find(' ');
  const std::size_t sp2 = line2.find(' ', sp1 + 1);
  line2 = line2.substr(0, sp1) + " teleport" + line2.substr(sp2);
  std::istringstream in(text.substr(0, nl + 1) + line2);
  CHECK_THROWS_AS(read_workload(in), MalformedInput);
}

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "aims_bench/workload.hpp"

namespace aims {

namespace {

// Shortest text that round-trips the double exactly.
std::string double_repr(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool parse_i64(const std::string& s, std::int64_t& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc{} && ptr == e;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc{} && ptr == e;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<ObjectId> parse_id_list(const std::string& s, std::size_t line, const char* field,
                                    std::int32_t num_accounts) {
  std::vector<ObjectId> out;
  for (const auto& tok : split(s, ',')) {
    std::int64_t v = 0;
    if (tok.empty() || !parse_i64(tok, v) || v < 0 || v >= num_accounts) {
      throw MalformedInput(line, field, "bad account id '" + tok + "'");
    }
    out.push_back(static_cast<ObjectId>(v));
  }
  return out;
}

// "0.05" -> 500 tenths of a basis point; at most 4 fractional digits.
bool parse_fraction(const std::string& s, std::int32_t& out) {
  const std::size_t dot = s.find('.');
  std::string whole = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
  if (whole.empty() || frac.size() > 4) return false;
  std::int64_t w = 0;
  if (!parse_i64(whole, w) || w < 0) return false;
  while (frac.size() < 4) frac.push_back('0');
  std::int64_t f = 0;
  if (!frac.empty() && !parse_i64(frac, f)) return false;
  const std::int64_t v = w * 10000 + f;
  if (v > INT32_MAX) return false;
  out = static_cast<std::int32_t>(v);
  return true;
}

}  // namespace

std::string fraction_to_string(std::int32_t bp) {
  std::string digits = std::to_string(bp % 10000);
  while (digits.size() < 4) digits.insert(digits.begin(), '0');
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
  return std::to_string(bp / 10000) + "." + digits;
}

void write_workload(const Workload& w, std::ostream& out) {
  const WorkloadSpec& s = w.spec;
  out << "n=" << s.n << " alpha=" << s.alpha << " beta=" << double_repr(s.beta)
      << " num_accounts=" << s.num_accounts << " initial_balance=" << s.initial_balance
      << " arrival_rate=" << double_repr(s.arrival_rate) << " m=" << s.m
      << " num_tenants=" << s.num_tenants << "\n";
  for (const auto& t : w.transactions) {
    out << t.id << ' ' << to_string(t.kind) << " src=";
    for (std::size_t i = 0; i < t.sources.size(); ++i) {
      if (i) out << ',';
      out << t.sources[i];
    }
    out << " dst=";
    for (std::size_t i = 0; i < t.destinations.size(); ++i) {
      if (i) out << ',';
      out << t.destinations[i];
    }
    out << " frac=";
    for (std::size_t i = 0; i < t.fraction_bp.size(); ++i) {
      if (i) out << ',';
      out << fraction_to_string(t.fraction_bp[i]);
    }
    out << " tenant=T" << t.tenant << " mal=" << (t.is_malicious ? 1 : 0) << " at=" << t.arrival_time
        << "\n";
  }
}

Workload read_workload(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw MalformedInput(1, "header", "missing header line");
  }

  WorkloadSpec spec;
  {
    std::set<std::string> seen;
    std::istringstream hs(line);
    std::string tok;
    while (hs >> tok) {
      const std::size_t eq = tok.find('=');
      if (eq == std::string::npos) throw MalformedInput(1, tok, "expected key=value");
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (!seen.insert(key).second) throw MalformedInput(1, key, "duplicate header key");
      std::int64_t iv = 0;
      double dv = 0.0;
      if (key == "n" && parse_i64(val, iv)) {
        spec.n = static_cast<std::int32_t>(iv);
      } else if (key == "alpha" && parse_i64(val, iv)) {
        spec.alpha = static_cast<std::int32_t>(iv);
      } else if (key == "beta" && parse_double(val, dv)) {
        spec.beta = dv;
      } else if (key == "num_accounts" && parse_i64(val, iv)) {
        spec.num_accounts = static_cast<std::int32_t>(iv);
      } else if (key == "initial_balance" && parse_i64(val, iv)) {
        spec.initial_balance = iv;
      } else if (key == "arrival_rate" && parse_double(val, dv)) {
        spec.arrival_rate = dv;
      } else if (key == "m" && parse_i64(val, iv)) {
        spec.m = static_cast<std::int32_t>(iv);
      } else if (key == "num_tenants" && parse_i64(val, iv)) {
        spec.num_tenants = static_cast<std::int32_t>(iv);
      } else {
        throw MalformedInput(1, key, "unknown or unparsable header field");
      }
    }
    const std::vector<std::string> required = {"n",            "alpha", "beta",
                                               "num_accounts", "initial_balance",
                                               "arrival_rate", "m",     "num_tenants"};
    for (const auto& k : required) {
      if (!seen.count(k)) throw MalformedInput(1, k, "missing header field");
    }
  }
  try {
    spec.validate();
  } catch (const InvalidSpec& e) {
    throw MalformedInput(1, "header", e.what());
  }

  Workload w;
  w.spec = spec;
  w.transactions.reserve(static_cast<std::size_t>(spec.n));
  std::size_t lineno = 1;
  std::int32_t malicious_seen = 0;
  TimeMs prev_arrival = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string id_tok, kind_tok, src_tok, dst_tok, frac_tok, tenant_tok, mal_tok, at_tok, extra;
    if (!(ls >> id_tok >> kind_tok >> src_tok >> dst_tok >> frac_tok >> tenant_tok >> mal_tok >>
          at_tok)) {
      throw MalformedInput(lineno, "line", "expected 8 fields");
    }
    if (ls >> extra) throw MalformedInput(lineno, "line", "trailing field '" + extra + "'");

    Transaction t;
    std::int64_t iv = 0;
    if (!parse_i64(id_tok, iv) || iv != static_cast<std::int64_t>(w.transactions.size())) {
      throw MalformedInput(lineno, "id", "ids must be consecutive from 0");
    }
    t.id = static_cast<TxnId>(iv);
    if (!txn_kind_from_string(kind_tok, t.kind)) {
      throw MalformedInput(lineno, "kind", "unknown kind '" + kind_tok + "'");
    }
    auto expect_prefix = [&](const std::string& tok, const char* prefix,
                             const char* field) -> std::string {
      const std::size_t plen = std::string(prefix).size();
      if (tok.rfind(prefix, 0) != 0) {
        throw MalformedInput(lineno, field, std::string("expected ") + prefix + "...");
      }
      return tok.substr(plen);
    };
    t.sources = parse_id_list(expect_prefix(src_tok, "src=", "src"), lineno, "src",
                              spec.num_accounts);
    t.destinations = parse_id_list(expect_prefix(dst_tok, "dst=", "dst"), lineno, "dst",
                                   spec.num_accounts);
    for (const auto& ftok : split(expect_prefix(frac_tok, "frac=", "frac"), ',')) {
      std::int32_t bp = 0;
      if (!parse_fraction(ftok, bp) || bp < 100 || bp > 1000) {
        throw MalformedInput(lineno, "frac", "fraction '" + ftok + "' outside [0.01, 0.1]");
      }
      t.fraction_bp.push_back(bp);
    }
    const std::string tenant_val = expect_prefix(tenant_tok, "tenant=T", "tenant");
    if (!parse_i64(tenant_val, iv) || iv < 0 || iv >= spec.num_tenants) {
      throw MalformedInput(lineno, "tenant", "bad tenant '" + tenant_val + "'");
    }
    t.tenant = static_cast<TenantId>(iv);
    const std::string mal_val = expect_prefix(mal_tok, "mal=", "mal");
    if (mal_val != "0" && mal_val != "1") {
      throw MalformedInput(lineno, "mal", "expected 0 or 1");
    }
    t.is_malicious = mal_val == "1";
    if (!parse_i64(expect_prefix(at_tok, "at=", "at"), iv) || iv < 0) {
      throw MalformedInput(lineno, "at", "bad arrival time");
    }
    t.arrival_time = iv;

    // Type invariants.
    const auto ns = static_cast<std::int32_t>(t.sources.size());
    const auto nd = static_cast<std::int32_t>(t.destinations.size());
    switch (t.kind) {
      case TxnKind::Distribute:
        if (ns != 1 || nd < 2 || nd > spec.alpha) {
          throw MalformedInput(lineno, "kind", "distribute needs 1 source and 2..alpha destinations");
        }
        break;
      case TxnKind::Collect:
        if (nd != 1 || ns < 2 || ns > spec.alpha) {
          throw MalformedInput(lineno, "kind", "collect needs 2..alpha sources and 1 destination");
        }
        break;
      case TxnKind::ManyToMany:
        if (ns < 2 || nd < 2 || ns > spec.alpha || nd > spec.alpha) {
          throw MalformedInput(lineno, "kind", "m2m needs 2..alpha of each");
        }
        break;
    }
    if (t.fraction_bp.size() != t.sources.size()) {
      throw MalformedInput(lineno, "frac", "one fraction per source required");
    }
    {
      std::set<ObjectId> src_set(t.sources.begin(), t.sources.end());
      std::set<ObjectId> dst_set(t.destinations.begin(), t.destinations.end());
      if (src_set.size() != t.sources.size() || dst_set.size() != t.destinations.size()) {
        throw MalformedInput(lineno, "src", "duplicate endpoint within transaction");
      }
      for (ObjectId o : t.sources) {
        if (dst_set.count(o)) {
          throw MalformedInput(lineno, "src", "sources and destinations overlap on account " +
                                                  std::to_string(o));
        }
      }
    }
    if (t.arrival_time < prev_arrival) {
      throw MalformedInput(lineno, "at", "arrival times must be non-decreasing");
    }
    prev_arrival = t.arrival_time;
    malicious_seen += t.is_malicious ? 1 : 0;
    w.transactions.push_back(std::move(t));
  }
  if (static_cast<std::int32_t>(w.transactions.size()) != spec.n) {
    throw MalformedInput(lineno, "n", "expected " + std::to_string(spec.n) + " transactions, got " +
                                          std::to_string(w.transactions.size()));
  }
  if (malicious_seen != spec.m) {
    throw MalformedInput(lineno, "m", "expected " + std::to_string(spec.m) +
                                          " malicious transactions, got " +
                                          std::to_string(malicious_seen));
  }
  w.tenant_of_object = derive_object_tenants(spec, w.transactions);
  return w;
}

void write_workload_file(const Workload& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_workload(w, out);
}

Workload read_workload_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_workload(in);
}

}  // namespace aims

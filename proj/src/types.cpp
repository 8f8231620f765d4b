#include "aims_bench/types.hpp"

namespace aims {

std::string to_string(TxnKind k) {
  switch (k) {
    case TxnKind::Distribute: return "distribute";
    case TxnKind::Collect: return "collect";
    case TxnKind::ManyToMany: return "m2m";
  }
  return "?";
}

bool txn_kind_from_string(const std::string& s, TxnKind& out) {
  if (s == "distribute") {
    out = TxnKind::Distribute;
  } else if (s == "collect") {
    out = TxnKind::Collect;
  } else if (s == "m2m") {
    out = TxnKind::ManyToMany;
  } else {
    return false;
  }
  return true;
}

Money round_half_even_div10000(std::int64_t numerator) {
  const bool negative = numerator < 0;
  const std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(numerator + 1)) + 1
                                     : static_cast<std::uint64_t>(numerator);
  std::uint64_t q = mag / 10000;
  const std::uint64_t r = mag % 10000;
  if (r > 5000 || (r == 5000 && (q & 1) != 0)) {
    ++q;
  }
  const auto result = static_cast<std::int64_t>(q);
  return negative ? -result : result;
}

}  // namespace aims

#pragma once

#include <charconv>
#include <string>

namespace memrl::detail {

// Shortest round-trip decimal form; identical inputs always format to
// identical bytes, which the deterministic-output contract relies on.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace memrl::detail

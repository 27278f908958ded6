#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace aduwt {

/// Shortest decimal representation that round-trips the double exactly.
/// Used for every float written to reports so output is byte-stable.
inline std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace aduwt

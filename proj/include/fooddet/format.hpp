#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace fooddet {

/// Shortest-safe text for exact double round-trips (17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_double(std::string_view text, double& out);
bool parse_u64(std::string_view text, std::uint64_t& out);

}  // namespace fooddet

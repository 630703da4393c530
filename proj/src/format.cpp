#include "fooddet/format.hpp"

#include <cstdlib>

namespace fooddet {

bool parse_double(std::string_view text, double& out) {
  // The program never calls setlocale, so strtod parses with the C locale.
  std::string s(text);
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool parse_u64(std::string_view text, std::uint64_t& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace fooddet

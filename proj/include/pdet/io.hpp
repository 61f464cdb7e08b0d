#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <string>

namespace pdet {

// CSV output is locale-independent by construction: snprintf with the "C"
// numeric formats and std::to_chars only.

/// Probability / real value with 17 significant digits in scientific
/// notation, enough to round-trip a double exactly.
inline std::string format_value(double x) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.16e", x);
  return buf.data();
}

/// Shortest representation that round-trips exactly; used for grid
/// coordinates and SNRs.
inline std::string format_compact(double x) {
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

}  // namespace pdet

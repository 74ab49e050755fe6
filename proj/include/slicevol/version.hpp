#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "slicevol/error.hpp"

namespace slicevol {

inline constexpr std::string_view kFormatVersion = "1.0";

inline int format_major(std::string_view version) {
  int major = -1;
  auto dot = version.find('.');
  auto end = dot == std::string_view::npos ? version.size() : dot;
  auto [ptr, ec] = std::from_chars(version.data(), version.data() + end, major);
  if (ec != std::errc() || ptr != version.data() + end) return -1;
  return major;
}

// Readers accept any minor revision of the current major format.
inline void check_format_version(std::string_view version, const std::string& context) {
  if (format_major(version) != format_major(kFormatVersion)) {
    throw Error(Errc::version_mismatch,
                context + ": unsupported format_version '" + std::string(version) +
                    "' (expected major " + std::to_string(format_major(kFormatVersion)) + ")");
  }
}

}  // namespace slicevol

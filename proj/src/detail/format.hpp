#pragma once

#include <charconv>
#include <string>

namespace fraclap::detail {

// Shortest round-trip representation; locale independent, so CSV bytes are
// reproducible across runs and machines.
inline std::string fmt_num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace fraclap::detail

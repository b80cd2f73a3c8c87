#pragma once

#include <cstdio>
#include <string>

namespace efgeo::detail {

// Round-trip decimal form of a double.
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace efgeo::detail

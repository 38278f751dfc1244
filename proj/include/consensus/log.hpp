#pragma once

#include <iostream>
#include <string_view>

namespace consensus {

// 0 = silent, 1 = warnings, 2 = progress
inline int& verbosity() {
  static int level = 1;
  return level;
}

inline void warn(std::string_view msg) {
  if (verbosity() >= 1) std::cerr << "warning: " << msg << '\n';
}

inline void info(std::string_view msg) {
  if (verbosity() >= 2) std::cerr << msg << '\n';
}

}  // namespace consensus

#pragma once

#include <cstdio>
#include <string>

namespace rhslearn {

// Shortest round-trip decimal form of a double; used for all CSV output so
// reruns are byte-identical and values reload exactly.
inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Three significant digits, scientific. The baseline-matching protocol
// compares these strings for equality.
inline std::string format_sig3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

}  // namespace rhslearn

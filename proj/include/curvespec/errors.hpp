#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace curvespec {

// Bad input files, malformed JSON, violated schema constraints.
struct schema_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation that cannot proceed (non-monotone flow, unusable step size).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Warning sink, overridable so tests can capture messages.
inline std::ostream*& warning_stream() {
  static std::ostream* s = &std::clog;
  return s;
}

inline void warn(const std::string& message) {
  if (warning_stream() != nullptr)
    *warning_stream() << "curvespec: warning: " << message << '\n';
}

}  // namespace detail
}  // namespace curvespec
